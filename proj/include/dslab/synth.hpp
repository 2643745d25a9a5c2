#pragma once

#include <cstdint>
#include <string>

#include "dslab/grid.hpp"
#include "dslab/stations.hpp"

namespace dslab {

/// Deterministic synthetic climate. One master seed drives every stream;
/// sub-seeds are derived per purpose (see rng.hpp) so regenerating any one
/// product never disturbs the others.
struct SynthConfig {
    std::uint64_t seed = 1;
    int height = 64;
    int width = 64;
    int years = 4;
    int start_year = 2001;
    double mean_c = 9.0;          // domain base temperature
    double amplitude_c = 9.0;     // seasonal cycle half-range
    int peak_doy = 200;           // warmest day of year
    double lapse_amplitude_c = 3.0;  // pseudo-topography spatial range scale
    double noise_std_c = 1.0;     // daily weather noise before smoothing
    double noise_corr_len = 2.0;  // Gaussian smoothing length, pixels
    double bias_c = 0.0;          // offset for the projection branch

    void validate() const;
};

/// High-resolution daily "observations":
///   value(d, r, c) = mean + amplitude*cos(2 pi (doy(d) - peak)/365.2425)
///                    + lapse(r, c) + noise(d, r, c)
/// lapse is a fixed seeded sum of plane-wave components across low and
/// mid/high spatial frequencies; noise is per-day white noise smoothed
/// with a separable Gaussian. Fully determined by cfg.seed.
DailyGridSeries synth_hr(const SynthConfig& cfg);

/// Coarse "projection": cubic-B-spline coarsening of hr, plus bias. With
/// shuffle_years, whole years are permuted within equal-length classes
/// (365- and 366-day years separately), which preserves every annual mean
/// while destroying daily correspondence.
DailyGridSeries synth_projection(const DailyGridSeries& hr, int factor, double bias,
                                 bool shuffle_years, std::uint64_t seed);

/// `count` stations at distinct pixel centers, sampled without
/// replacement; observations are the pixel's hr series plus optional
/// noise. Throws CountTooLarge when count > H*W.
StationSet synth_stations(const DailyGridSeries& hr, int count, std::uint64_t seed,
                          double noise_std = 0.0);

/// Canonical JSON round-trip; parsing is strict (unknown keys rejected).
std::string synth_config_to_json(const SynthConfig& cfg);
SynthConfig synth_config_from_json_text(const std::string& text, const std::string& origin);

}  // namespace dslab
