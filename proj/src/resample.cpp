#include "dslab/resample.hpp"

#include <algorithm>
#include <cmath>

namespace dslab {

namespace {

double keys_kernel(double x) {
    // Keys (1981) cubic convolution kernel, a = -0.5.
    x = std::abs(x);
    if (x <= 1.0) return (1.5 * x - 2.5) * x * x + 1.0;
    if (x < 2.0) return ((-0.5 * x + 2.5) * x - 4.0) * x + 2.0;
    return 0.0;
}

double bspline_kernel(double x) {
    // Uniform cubic B-spline basis.
    x = std::abs(x);
    if (x <= 1.0) return 2.0 / 3.0 - x * x + 0.5 * x * x * x;
    if (x <= 2.0) {
        const double t = 2.0 - x;
        return t * t * t / 6.0;
    }
    return 0.0;
}

void check_refine_plan(const ResamplePlan& plan) {
    if (plan.direction != ResampleDirection::Refine)
        fail(ErrorCode::InvalidArgument, "plan direction must be Refine");
    if (plan.factor < 2) fail(ErrorCode::InvalidArgument, "resample factor must be >= 2");
}

}  // namespace

KernelKind kernel_from_name(const std::string& name) {
    if (name == "bilinear") return KernelKind::Bilinear;
    if (name == "bicubic") return KernelKind::BicubicKeys;
    if (name == "cubic_spline") return KernelKind::CubicBSpline;
    fail(ErrorCode::InvalidArgument,
         "unknown kernel '" + name + "' (expected bilinear, bicubic, or cubic_spline)");
}

const char* kernel_name(KernelKind kind) {
    switch (kind) {
        case KernelKind::Bilinear: return "bilinear";
        case KernelKind::BicubicKeys: return "bicubic";
        case KernelKind::CubicBSpline: return "cubic_spline";
    }
    return "?";
}

KernelWeights kernel_weights(KernelKind kind, double phase) {
    KernelWeights kw;
    if (kind == KernelKind::Bilinear) {
        kw.taps = 2;
        kw.leftmost = 0;
        kw.w[0] = 1.0 - phase;
        kw.w[1] = phase;
        return kw;
    }
    kw.taps = 4;
    kw.leftmost = -1;
    const auto kernel = kind == KernelKind::BicubicKeys ? keys_kernel : bspline_kernel;
    kw.w[0] = kernel(1.0 + phase);
    kw.w[1] = kernel(phase);
    kw.w[2] = kernel(1.0 - phase);
    kw.w[3] = kernel(2.0 - phase);
    return kw;
}

double sample_field(std::span<const double> field, int height, int width, KernelKind kind,
                    double y, double x) {
    const double fy = std::floor(y);
    const double fx = std::floor(x);
    const KernelWeights wy = kernel_weights(kind, y - fy);
    const KernelWeights wx = kernel_weights(kind, x - fx);
    const int iy = int(fy) + wy.leftmost;
    const int ix = int(fx) + wx.leftmost;
    double acc = 0.0;
    for (int a = 0; a < wy.taps; ++a) {
        if (wy.w[a] == 0.0) continue;
        const int r = std::clamp(iy + a, 0, height - 1);
        const double* row = field.data() + std::size_t(r) * width;
        double row_acc = 0.0;
        for (int b = 0; b < wx.taps; ++b) {
            if (wx.w[b] == 0.0) continue;
            const int c = std::clamp(ix + b, 0, width - 1);
            row_acc += wx.w[b] * row[c];
        }
        acc += wy.w[a] * row_acc;
    }
    return acc;
}

void coarsen_field(std::span<const double> field, int height, int width, const ResamplePlan& plan,
                   std::span<double> out) {
    if (plan.direction != ResampleDirection::Coarsen)
        fail(ErrorCode::InvalidArgument, "plan direction must be Coarsen");
    const int f = plan.factor;
    if (f < 2) fail(ErrorCode::InvalidArgument, "resample factor must be >= 2");
    if (height % f != 0 || width % f != 0)
        fail(ErrorCode::NonDivisibleFactor, "factor " + std::to_string(f) + " does not divide " +
                                                std::to_string(height) + "x" +
                                                std::to_string(width));
    for (double v : field)
        if (std::isnan(v)) fail(ErrorCode::NaNInput, "coarsening of gappy fields is unsupported");
    const int ch = height / f;
    const int cw = width / f;
    const double center = (f - 1) / 2.0;
    for (int r = 0; r < ch; ++r)
        for (int c = 0; c < cw; ++c)
            out[std::size_t(r) * cw + c] =
                sample_field(field, height, width, plan.kind, r * f + center, c * f + center);
}

void refine_field(std::span<const double> field, int height, int width, const ResamplePlan& plan,
                  std::span<double> out) {
    check_refine_plan(plan);
    const int f = plan.factor;
    const int oh = height * f;
    const int ow = width * f;
    for (int r = 0; r < oh; ++r) {
        const double y = (r + 0.5) / f - 0.5;
        for (int c = 0; c < ow; ++c) {
            const double x = (c + 0.5) / f - 0.5;
            out[std::size_t(r) * ow + c] = sample_field(field, height, width, plan.kind, y, x);
        }
    }
}

DailyGridSeries coarsen(const DailyGridSeries& series, const ResamplePlan& plan) {
    const int f = plan.factor;
    if (plan.direction != ResampleDirection::Coarsen)
        fail(ErrorCode::InvalidArgument, "plan direction must be Coarsen");
    if (f < 2) fail(ErrorCode::InvalidArgument, "resample factor must be >= 2");
    if (series.height() % f != 0 || series.width() % f != 0)
        fail(ErrorCode::NonDivisibleFactor,
             "factor " + std::to_string(f) + " does not divide " + std::to_string(series.height()) +
                 "x" + std::to_string(series.width()));
    const int ch = series.height() / f;
    const int cw = series.width() / f;
    DailyGridSeries out = DailyGridSeries::filled(series.days(), ch, cw, series.start_date(),
                                                  series.transform().coarsened(f), 0.0);
    for (int t = 0; t < series.days(); ++t)
        coarsen_field(series.day(t), series.height(), series.width(), plan, out.day(t));
    return out;
}

DailyGridSeries refine(const DailyGridSeries& series, const ResamplePlan& plan) {
    check_refine_plan(plan);
    const int f = plan.factor;
    DailyGridSeries out =
        DailyGridSeries::filled(series.days(), series.height() * f, series.width() * f,
                                series.start_date(), series.transform().refined(f), 0.0);
    for (int t = 0; t < series.days(); ++t)
        refine_field(series.day(t), series.height(), series.width(), plan, out.day(t));
    return out;
}

}  // namespace dslab
