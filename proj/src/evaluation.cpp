#include "dslab/evaluation.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

namespace dslab {

double indicator_rmse(const std::vector<EvalPair>& pairs) {
    double sum_sq = 0.0;
    std::int64_t m = 0;
    for (const auto& pair : pairs) {
        if (pair.truth.size() != pair.predicted.size())
            fail(ErrorCode::InvalidArgument, "eval pair for station " + pair.station_id +
                                                 " has unaligned sequences");
        for (std::size_t i = 0; i < pair.truth.size(); ++i) {
            const double d = pair.predicted[i] - pair.truth[i];
            sum_sq += d * d;
        }
        m += std::int64_t(pair.truth.size());
    }
    if (m == 0) fail(ErrorCode::NoValidSamples, "no retained (t, n) samples");
    return std::sqrt(sum_sq / double(m));
}

DailySeries station_pixel_series(const DailyGridSeries& grid, const Station& station) {
    const auto [row, col] = pixel_of(grid.transform(), grid.height(), grid.width(), station.x,
                                     station.y);
    DailySeries series;
    series.start_date = grid.start_date();
    series.values.resize(std::size_t(grid.days()));
    for (int t = 0; t < grid.days(); ++t) series.values[std::size_t(t)] = grid.at(t, row, col);
    return series;
}

DailySeries station_observation_series(const Station& station) {
    if (station.observations.empty())
        fail(ErrorCode::NoValidSamples, "station " + station.id + " has no observations");
    const std::int64_t first = station.observations.begin()->first;
    const std::int64_t last = station.observations.rbegin()->first;
    DailySeries series;
    series.start_date = Date::from_epoch_days(first);
    series.values.assign(std::size_t(last - first + 1), std::nan(""));
    for (const auto& [day, value] : station.observations)
        series.values[std::size_t(day - first)] = value;
    return series;
}

namespace {

// (year, month) keys of every period the RMSE could draw from; month = 0
// for annual indicators.
std::vector<std::pair<int, int>> period_keys(IndicatorKind kind, int year_begin, int year_end) {
    std::vector<std::pair<int, int>> keys;
    for (int y = year_begin; y <= year_end; ++y) {
        if (kind == IndicatorKind::MonthlyTg)
            for (int m = 1; m <= 12; ++m) keys.emplace_back(y, m);
        else
            keys.emplace_back(y, 0);
    }
    return keys;
}

const IndicatorValue* find_period(const std::vector<IndicatorValue>& values, int year, int month) {
    for (const auto& v : values)
        if (v.year == year && v.month == month) return &v;
    return nullptr;
}

}  // namespace

EvalReport evaluate_method(const std::string& method, const DailyGridSeries& downscaled,
                           const StationSet& stations, const std::vector<IndicatorKind>& kinds,
                           int year_begin, int year_end) {
    if (year_end < year_begin)
        fail(ErrorCode::InvalidArgument, "year range " + std::to_string(year_begin) + "-" +
                                             std::to_string(year_end) + " is empty");
    if (stations.size() == 0) fail(ErrorCode::InvalidArgument, "no stations to evaluate");

    // Indicator series per station are shared across indicator kinds.
    std::vector<DailySeries> pixel_series, obs_series;
    pixel_series.reserve(stations.size());
    obs_series.reserve(stations.size());
    for (const auto& station : stations.stations()) {
        pixel_series.push_back(station_pixel_series(downscaled, station));
        obs_series.push_back(station_observation_series(station));
    }

    EvalReport report;
    report.method = method;
    for (IndicatorKind kind : kinds) {
        const auto keys = period_keys(kind, year_begin, year_end);
        EvalRow row;
        row.kind = kind;
        std::vector<EvalPair> pairs;
        for (std::size_t s = 0; s < stations.size(); ++s) {
            const auto predicted = compute_indicator(kind, pixel_series[s]);
            const auto truth = compute_indicator(kind, obs_series[s]);
            EvalPair pair;
            pair.station_id = stations.at(s).id;
            pair.kind = kind;
            for (const auto& [year, month] : keys) {
                const IndicatorValue* p = find_period(predicted, year, month);
                const IndicatorValue* t = find_period(truth, year, month);
                if (p != nullptr && t != nullptr && p->valid && t->valid) {
                    pair.predicted.push_back(p->value);
                    pair.truth.push_back(t->value);
                } else {
                    row.n_skipped += 1;
                }
            }
            if (!pair.truth.empty()) {
                row.n_stations += 1;
                row.n_samples += std::int64_t(pair.truth.size());
                pairs.push_back(std::move(pair));
            }
        }
        row.rmse = indicator_rmse(pairs);
        report.rows.push_back(std::move(row));
    }
    return report;
}

void write_report_csv(const std::vector<EvalReport>& reports, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) fail(ErrorCode::IoError, "cannot open " + path + " for writing");
    out << "method,indicator,rmse,n_stations,n_samples,n_skipped\n";
    char buf[64];
    for (const auto& report : reports)
        for (const auto& row : report.rows) {
            std::snprintf(buf, sizeof buf, "%.9g", row.rmse);
            out << report.method << ',' << indicator_name(row.kind) << ',' << buf << ','
                << row.n_stations << ',' << row.n_samples << ',' << row.n_skipped << '\n';
        }
    if (!out) fail(ErrorCode::IoError, "short write to " + path);
}

}  // namespace dslab
