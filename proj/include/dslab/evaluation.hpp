#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dslab/grid.hpp"
#include "dslab/indicators.hpp"
#include "dslab/stations.hpp"

namespace dslab {

/// Aligned truth/prediction indicator sequences for one station; only
/// periods valid on both sides are present, in period order.
struct EvalPair {
    std::string station_id;
    IndicatorKind kind = IndicatorKind::AnnualTg;
    std::vector<double> truth;
    std::vector<double> predicted;
};

/// sqrt( (1/M) * sum over all retained (t, n) of (predicted - truth)^2 )
/// with M = total retained sample count. Throws NoValidSamples when M = 0.
double indicator_rmse(const std::vector<EvalPair>& pairs);

struct EvalRow {
    IndicatorKind kind = IndicatorKind::AnnualTg;
    double rmse = 0.0;
    int n_stations = 0;          // stations contributing >= 1 retained period
    std::int64_t n_samples = 0;  // retained (t, n) samples
    std::int64_t n_skipped = 0;  // periods dropped by the validity alignment
};

struct EvalReport {
    std::string method;
    std::vector<EvalRow> rows;  // one per requested indicator, in request order
};

/// Daily series of the grid pixel containing the station location; no
/// interpolation. Throws OutOfExtent for stations outside the grid.
DailySeries station_pixel_series(const DailyGridSeries& grid, const Station& station);

/// Station observations as a dense daily series over the observed span,
/// NaN where days are missing.
DailySeries station_observation_series(const Station& station);

/// For every station: extract the containing-pixel series, compute each
/// indicator on both the pixel series and the observations, keep periods
/// within [year_begin, year_end] that are valid on both sides, and pool
/// everything into one RMSE per indicator. retained + skipped = T*N where
/// T counts years (or year-months) in the range and N counts stations.
EvalReport evaluate_method(const std::string& method, const DailyGridSeries& downscaled,
                           const StationSet& stations, const std::vector<IndicatorKind>& kinds,
                           int year_begin, int year_end);

/// CSV "method,indicator,rmse,n_stations,n_samples,n_skipped".
void write_report_csv(const std::vector<EvalReport>& reports, const std::string& path);

}  // namespace dslab
