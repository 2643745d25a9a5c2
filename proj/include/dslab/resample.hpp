#pragma once

#include <array>
#include <span>
#include <string>

#include "dslab/grid.hpp"

namespace dslab {

/// Resampling kernels over the unit-spaced sample lattice.
///  - Bilinear: 2-tap hat, interpolating.
///  - BicubicKeys: Keys' 4-tap cubic with a = -0.5, interpolating, exact for
///    polynomials of degree <= 2.
///  - CubicBSpline: uniform cubic B-spline, approximating (smooths through
///    samples, no prefilter), exact for degree <= 1. This is the behavior of
///    the cubic_spline resampler in common geospatial tooling.
enum class KernelKind { Bilinear, BicubicKeys, CubicBSpline };

enum class ResampleDirection { Coarsen, Refine };

struct ResamplePlan {
    KernelKind kind = KernelKind::CubicBSpline;
    int factor = 2;
    ResampleDirection direction = ResampleDirection::Coarsen;
    // Boundary handling is always edge-replicate.
};

KernelKind kernel_from_name(const std::string& name);
const char* kernel_name(KernelKind kind);

/// Kernel taps for a sample point with fractional phase in [0, 1).
/// Tap i weights the sample at floor(u) + leftmost + i. Weights sum to 1.
struct KernelWeights {
    std::array<double, 4> w{};
    int taps = 0;
    int leftmost = 0;
};

KernelWeights kernel_weights(KernelKind kind, double phase);

/// Kernel-weighted sample of `field` at continuous pixel coordinate
/// (y, x), where integer coordinates are sample centers. Edge-replicate
/// beyond bounds. Taps with weight exactly 0 are skipped.
double sample_field(std::span<const double> field, int height, int width, KernelKind kind,
                    double y, double x);

/// Coarsens an H x W field by plan.factor. Output pixel (R, C) is the kernel
/// sample of the fine field at the coarse pixel center, fine coordinate
/// (R*f + (f-1)/2, C*f + (f-1)/2). The factor must divide both dims; NaN
/// input is rejected.
void coarsen_field(std::span<const double> field, int height, int width, const ResamplePlan& plan,
                   std::span<double> out);

/// Refines an h x w field by plan.factor using the center-aligned mapping
/// u = (U + 0.5)/f - 0.5 with edge replication.
void refine_field(std::span<const double> field, int height, int width, const ResamplePlan& plan,
                  std::span<double> out);

/// Day-by-day series variants; the geotransform is scaled accordingly.
DailyGridSeries coarsen(const DailyGridSeries& series, const ResamplePlan& plan);
DailyGridSeries refine(const DailyGridSeries& series, const ResamplePlan& plan);

}  // namespace dslab
