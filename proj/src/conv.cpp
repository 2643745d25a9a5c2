#include <algorithm>
#include <vector>

#include "dslab/parallel.hpp"
#include "dslab/tensor.hpp"

namespace dslab {

namespace detail {
Tensor finish_op(std::shared_ptr<TensorData> out,
                 std::vector<std::shared_ptr<TensorData>> inputs,
                 std::function<void(TensorData&)> backward_fn);
}
using detail::finish_op;

namespace {

std::shared_ptr<TensorData> alloc_out(Shape shape) {
    auto data = std::make_shared<TensorData>();
    data->values.assign(std::size_t(shape_size(shape)), 0.0);
    data->shape = std::move(shape);
    return data;
}

struct ConvDims {
    int n, c, h, w, o, k, p, oh, ow;
};

ConvDims conv_dims(const Tensor& input, const Tensor& weight, const Tensor& bias, int padding) {
    if (input.shape().size() != 4)
        fail(ErrorCode::ShapeMismatch, "conv2d input must be N x C x H x W, got " +
                                           shape_string(input.shape()));
    if (weight.shape().size() != 4)
        fail(ErrorCode::ShapeMismatch, "conv2d weight must be O x C x k x k, got " +
                                           shape_string(weight.shape()));
    ConvDims d;
    d.n = input.shape()[0];
    d.c = input.shape()[1];
    d.h = input.shape()[2];
    d.w = input.shape()[3];
    d.o = weight.shape()[0];
    d.k = weight.shape()[2];
    d.p = padding;
    if (weight.shape()[1] != d.c)
        fail(ErrorCode::ShapeMismatch, "conv2d channel mismatch: input C=" + std::to_string(d.c) +
                                           ", weight C=" + std::to_string(weight.shape()[1]));
    if (weight.shape()[3] != d.k || d.k % 2 == 0)
        fail(ErrorCode::ShapeMismatch, "conv2d kernel must be square with odd side, got " +
                                           shape_string(weight.shape()));
    if (bias.shape() != Shape{d.o})
        fail(ErrorCode::ShapeMismatch, "conv2d bias must have shape [O], got " +
                                           shape_string(bias.shape()));
    if (padding < 0) fail(ErrorCode::InvalidArgument, "conv2d padding must be >= 0");
    d.oh = d.h + 2 * d.p - d.k + 1;
    d.ow = d.w + 2 * d.p - d.k + 1;
    if (d.oh < 1 || d.ow < 1)
        fail(ErrorCode::ShapeMismatch, "conv2d output would be empty");
    return d;
}

// dst[y, x] += coeff * src_plane rows shifted by (ky - p, kx - p), over the
// index range where the shifted source index is in bounds.
inline void accumulate_shifted(double* dst, int dst_w, const double* src, int src_h, int src_w,
                               int out_h, int out_w, int ky, int kx, int p, double coeff) {
    const int y0 = std::max(0, p - ky);
    const int y1 = std::min(out_h, src_h + p - ky);
    const int x0 = std::max(0, p - kx);
    const int x1 = std::min(out_w, src_w + p - kx);
    for (int y = y0; y < y1; ++y) {
        double* drow = dst + std::size_t(y) * dst_w + x0;
        const double* srow = src + std::size_t(y + ky - p) * src_w + (x0 + kx - p);
        const int count = x1 - x0;
        for (int i = 0; i < count; ++i) drow[i] += coeff * srow[i];
    }
}

}  // namespace

Tensor conv2d(const Tensor& input, const Tensor& weight, const Tensor& bias, int padding) {
    const ConvDims d = conv_dims(input, weight, bias, padding);
    auto out = alloc_out({d.n, d.o, d.oh, d.ow});

    const double* in = input.values().data();
    const double* wt = weight.values().data();
    const double* bs = bias.values().data();
    double* ov = out->values.data();
    const std::size_t in_plane = std::size_t(d.h) * d.w;
    const std::size_t out_plane = std::size_t(d.oh) * d.ow;

    parallel_for(std::int64_t(d.n) * d.o, [&](std::int64_t idx) {
        const int n = int(idx / d.o);
        const int o = int(idx % d.o);
        double* dst = ov + (std::size_t(n) * d.o + o) * out_plane;
        std::fill(dst, dst + out_plane, bs[o]);
        for (int c = 0; c < d.c; ++c) {
            const double* src = in + (std::size_t(n) * d.c + c) * in_plane;
            const double* wk = wt + ((std::size_t(o) * d.c + c) * d.k) * d.k;
            for (int ky = 0; ky < d.k; ++ky)
                for (int kx = 0; kx < d.k; ++kx)
                    accumulate_shifted(dst, d.ow, src, d.h, d.w, d.oh, d.ow, ky, kx, d.p,
                                       wk[std::size_t(ky) * d.k + kx]);
        }
    });

    auto xd = input.data();
    auto wd = weight.data();
    auto bd = bias.data();
    return finish_op(std::move(out), {xd, wd, bd}, [xd, wd, bd, d](TensorData& og) {
        const double* g = og.grad.data();
        const std::size_t in_plane = std::size_t(d.h) * d.w;
        const std::size_t out_plane = std::size_t(d.oh) * d.ow;
        if (bd->requires_grad) {
            bd->ensure_grad();
            parallel_for(d.o, [&](std::int64_t o) {
                double acc = 0.0;
                for (int n = 0; n < d.n; ++n) {
                    const double* gp = g + (std::size_t(n) * d.o + o) * out_plane;
                    for (std::size_t i = 0; i < out_plane; ++i) acc += gp[i];
                }
                bd->grad[std::size_t(o)] += acc;
            });
        }
        if (wd->requires_grad) {
            wd->ensure_grad();
            const double* in = xd->values.data();
            parallel_for(d.o, [&](std::int64_t o) {
                for (int c = 0; c < d.c; ++c) {
                    double* wk = wd->grad.data() + ((std::size_t(o) * d.c + c) * d.k) * d.k;
                    for (int ky = 0; ky < d.k; ++ky)
                        for (int kx = 0; kx < d.k; ++kx) {
                            const int y0 = std::max(0, d.p - ky);
                            const int y1 = std::min(d.oh, d.h + d.p - ky);
                            const int x0 = std::max(0, d.p - kx);
                            const int x1 = std::min(d.ow, d.w + d.p - kx);
                            double acc = 0.0;
                            for (int n = 0; n < d.n; ++n) {
                                const double* gp = g + (std::size_t(n) * d.o + o) * out_plane;
                                const double* src = in + (std::size_t(n) * d.c + c) * in_plane;
                                for (int y = y0; y < y1; ++y) {
                                    const double* grow = gp + std::size_t(y) * d.ow + x0;
                                    const double* srow =
                                        src + std::size_t(y + ky - d.p) * d.w + (x0 + kx - d.p);
                                    const int count = x1 - x0;
                                    double row_acc = 0.0;
#pragma omp simd reduction(+ : row_acc)
                                    for (int i = 0; i < count; ++i) row_acc += grow[i] * srow[i];
                                    acc += row_acc;
                                }
                            }
                            wk[std::size_t(ky) * d.k + kx] += acc;
                        }
                }
            });
        }
        if (xd->requires_grad) {
            xd->ensure_grad();
            const double* wt = wd->values.data();
            parallel_for(d.n, [&](std::int64_t n) {
                for (int o = 0; o < d.o; ++o) {
                    const double* gp = g + (std::size_t(n) * d.o + o) * out_plane;
                    for (int c = 0; c < d.c; ++c) {
                        double* dx = xd->grad.data() + (std::size_t(n) * d.c + c) * in_plane;
                        const double* wk = wt + ((std::size_t(o) * d.c + c) * d.k) * d.k;
                        for (int ky = 0; ky < d.k; ++ky)
                            for (int kx = 0; kx < d.k; ++kx) {
                                // Transpose of the forward shift: out row y
                                // fed from in row y + ky - p, so grads flow
                                // back along the same pairing.
                                const double coeff = wk[std::size_t(ky) * d.k + kx];
                                const int y0 = std::max(0, d.p - ky);
                                const int y1 = std::min(d.oh, d.h + d.p - ky);
                                const int x0 = std::max(0, d.p - kx);
                                const int x1 = std::min(d.ow, d.w + d.p - kx);
                                for (int y = y0; y < y1; ++y) {
                                    double* dxrow =
                                        dx + std::size_t(y + ky - d.p) * d.w + (x0 + kx - d.p);
                                    const double* grow = gp + std::size_t(y) * d.ow + x0;
                                    const int count = x1 - x0;
                                    for (int i = 0; i < count; ++i) dxrow[i] += coeff * grow[i];
                                }
                            }
                    }
                }
            });
        }
    });
}

Tensor pixel_shuffle(const Tensor& input, int factor) {
    if (input.shape().size() != 4)
        fail(ErrorCode::ShapeMismatch, "pixel_shuffle input must be N x C x H x W");
    if (factor < 1) fail(ErrorCode::InvalidArgument, "pixel_shuffle factor must be >= 1");
    const int n = input.shape()[0], ch = input.shape()[1], h = input.shape()[2],
              w = input.shape()[3];
    const int r2 = factor * factor;
    if (ch % r2 != 0)
        fail(ErrorCode::ChannelNotDivisible, "channels " + std::to_string(ch) +
                                                 " not divisible by r^2=" + std::to_string(r2));
    const int oc = ch / r2;
    const int oh = h * factor, ow = w * factor;
    auto out = alloc_out({n, oc, oh, ow});
    const double* in = input.values().data();
    double* ov = out->values.data();
    const auto src_index = [=](int nn, int cc, int a, int b, int y, int x) {
        return ((std::size_t(nn) * ch + std::size_t(cc) * r2 + std::size_t(a) * factor + b) * h +
                y) * w + x;
    };
    for (int nn = 0; nn < n; ++nn)
        for (int cc = 0; cc < oc; ++cc)
            for (int y = 0; y < h; ++y)
                for (int a = 0; a < factor; ++a) {
                    double* drow =
                        ov + ((std::size_t(nn) * oc + cc) * oh + std::size_t(y) * factor + a) * ow;
                    for (int x = 0; x < w; ++x)
                        for (int b = 0; b < factor; ++b)
                            drow[std::size_t(x) * factor + b] = in[src_index(nn, cc, a, b, y, x)];
                }
    auto xd = input.data();
    return finish_op(std::move(out), {xd}, [xd, n, oc, ch, h, w, factor, r2, oh, ow,
                                           src_index](TensorData& og) {
        if (!xd->requires_grad) return;
        xd->ensure_grad();
        const double* g = og.grad.data();
        for (int nn = 0; nn < n; ++nn)
            for (int cc = 0; cc < oc; ++cc)
                for (int y = 0; y < h; ++y)
                    for (int a = 0; a < factor; ++a) {
                        const double* grow =
                            g +
                            ((std::size_t(nn) * oc + cc) * oh + std::size_t(y) * factor + a) * ow;
                        for (int x = 0; x < w; ++x)
                            for (int b = 0; b < factor; ++b)
                                xd->grad[src_index(nn, cc, a, b, y, x)] +=
                                    grow[std::size_t(x) * factor + b];
                    }
    });
}

Tensor pixel_unshuffle(const Tensor& input, int factor) {
    if (input.shape().size() != 4)
        fail(ErrorCode::ShapeMismatch, "pixel_unshuffle input must be N x C x H x W");
    if (factor < 1) fail(ErrorCode::InvalidArgument, "pixel_unshuffle factor must be >= 1");
    const int n = input.shape()[0], ch = input.shape()[1], ih = input.shape()[2],
              iw = input.shape()[3];
    if (ih % factor != 0 || iw % factor != 0)
        fail(ErrorCode::ShapeMismatch, "pixel_unshuffle spatial dims must divide by factor");
    const int h = ih / factor, w = iw / factor;
    const int r2 = factor * factor;
    const int oc = ch * r2;
    auto out = alloc_out({n, oc, h, w});
    const double* in = input.values().data();
    double* ov = out->values.data();
    for (int nn = 0; nn < n; ++nn)
        for (int cc = 0; cc < ch; ++cc)
            for (int a = 0; a < factor; ++a)
                for (int b = 0; b < factor; ++b) {
                    double* dst =
                        ov + ((std::size_t(nn) * ch + cc) * r2 + std::size_t(a) * factor + b) * h * w;
                    const double* src = in + ((std::size_t(nn) * ch + cc) * ih + a) * iw + b;
                    for (int y = 0; y < h; ++y)
                        for (int x = 0; x < w; ++x)
                            dst[std::size_t(y) * w + x] =
                                src[std::size_t(y) * factor * iw + std::size_t(x) * factor];
                }
    auto xd = input.data();
    return finish_op(std::move(out), {xd},
                     [xd, n, ch, ih, iw, h, w, factor, r2](TensorData& og) {
                         if (!xd->requires_grad) return;
                         xd->ensure_grad();
                         const double* g = og.grad.data();
                         for (int nn = 0; nn < n; ++nn)
                             for (int cc = 0; cc < ch; ++cc)
                                 for (int a = 0; a < factor; ++a)
                                     for (int b = 0; b < factor; ++b) {
                                         const double* src =
                                             g + ((std::size_t(nn) * ch + cc) * r2 +
                                                  std::size_t(a) * factor + b) *
                                                     h * w;
                                         double* dst = xd->grad.data() +
                                                       ((std::size_t(nn) * ch + cc) * ih + a) * iw +
                                                       b;
                                         for (int y = 0; y < h; ++y)
                                             for (int x = 0; x < w; ++x)
                                                 dst[std::size_t(y) * factor * iw +
                                                     std::size_t(x) * factor] +=
                                                     src[std::size_t(y) * w + x];
                                     }
                     });
}

}  // namespace dslab
