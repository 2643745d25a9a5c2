#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "dslab/date.hpp"
#include "dslab/evaluation.hpp"
#include "dslab/grid.hpp"
#include "dslab/indicators.hpp"
#include "dslab/rng.hpp"
#include "dslab/stations.hpp"
#include "tests/checks.hpp"
#include "tests/oracles.hpp"

using dslab::DailyGridSeries;
using dslab::DailySeries;
using dslab::Date;
using dslab::ErrorCode;
using dslab::EvalPair;
using dslab::EvalReport;
using dslab::GeoTransform;
using dslab::IndicatorKind;
using dslab::Rng;
using dslab::Station;
using dslab::StationSet;
using testutil::error_code_of;

namespace {

oracle::Fold fold_of(IndicatorKind kind) {
    switch (kind) {
        case IndicatorKind::AnnualTg:
        case IndicatorKind::MonthlyTg: return oracle::Fold::Mean;
        case IndicatorKind::Hdd15_5: return oracle::Fold::DeficitBelow;
        default: return oracle::Fold::ExcessAbove;
    }
}

double threshold_of(IndicatorKind kind) {
    switch (kind) {
        case IndicatorKind::Gdd5: return 5.0;
        case IndicatorKind::Cdd22: return 22.0;
        case IndicatorKind::Hdd15_5: return 15.5;
        default: return 0.0;
    }
}

bool monthly_of(IndicatorKind kind) { return kind == IndicatorKind::MonthlyTg; }

std::vector<oracle::PeriodValue> oracle_indicator(IndicatorKind kind, const Date& start,
                                                  const std::vector<double>& values) {
    return oracle::periods({start.year(), start.month(), start.day()}, values, monthly_of(kind),
                           fold_of(kind), threshold_of(kind));
}

const oracle::PeriodValue* find_period(const std::vector<oracle::PeriodValue>& values, int year,
                                       int month) {
    for (const auto& v : values)
        if (v.year == year && v.month == month) return &v;
    return nullptr;
}

/// Everything evaluate_method computes, re-derived with the oracle
/// indicator loops and plain aggregation.
struct BruteRow {
    double rmse = 0.0;
    int n_stations = 0;
    std::int64_t n_samples = 0;
    std::int64_t n_skipped = 0;
    bool throws = false;
};

BruteRow brute_force_row(IndicatorKind kind, const std::vector<DailySeries>& pixel,
                         const std::vector<DailySeries>& obs, int year_begin, int year_end) {
    std::vector<std::pair<int, int>> keys;
    for (int y = year_begin; y <= year_end; ++y) {
        if (monthly_of(kind))
            for (int m = 1; m <= 12; ++m) keys.emplace_back(y, m);
        else
            keys.emplace_back(y, 0);
    }
    BruteRow row;
    double ss = 0.0;
    for (std::size_t s = 0; s < pixel.size(); ++s) {
        const auto predicted = oracle_indicator(kind, pixel[s].start_date, pixel[s].values);
        const auto truth = oracle_indicator(kind, obs[s].start_date, obs[s].values);
        std::int64_t station_samples = 0;
        for (const auto& [year, month] : keys) {
            const auto* p = find_period(predicted, year, month);
            const auto* t = find_period(truth, year, month);
            if (p != nullptr && t != nullptr && p->valid && t->valid) {
                const double d = p->value - t->value;
                ss += d * d;
                station_samples += 1;
            } else {
                row.n_skipped += 1;
            }
        }
        if (station_samples > 0) {
            row.n_stations += 1;
            row.n_samples += station_samples;
        }
    }
    if (row.n_samples == 0) {
        row.throws = true;
        return row;
    }
    row.rmse = std::sqrt(ss / double(row.n_samples));
    return row;
}

}  // namespace

TEST_CASE("indicator_rmse equals the plain pooled double loop") {
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
        Rng rng(seed);
        const int n_stations = 1 + int(rng.below(8));
        std::vector<EvalPair> pairs;
        std::vector<std::vector<double>> truth, predicted;
        for (int s = 0; s < n_stations; ++s) {
            // Empty sequences model stations whose periods were all skipped.
            const int len = int(rng.below(7));
            EvalPair pair;
            pair.station_id = "s" + std::to_string(s);
            for (int i = 0; i < len; ++i) {
                pair.truth.push_back(rng.normal(283.0, 5.0));
                pair.predicted.push_back(rng.normal(283.0, 5.0));
            }
            truth.push_back(pair.truth);
            predicted.push_back(pair.predicted);
            pairs.push_back(std::move(pair));
        }
        const auto want = oracle::pooled_rmse(truth, predicted);
        if (want.samples == 0) {
            CHECK(error_code_of([&] { dslab::indicator_rmse(pairs); }) ==
                  ErrorCode::NoValidSamples);
        } else {
            REQUIRE(std::fabs(dslab::indicator_rmse(pairs) - want.value) <= 1e-12);
        }
    }

    EvalPair lopsided;
    lopsided.station_id = "x";
    lopsided.truth = {1.0, 2.0};
    lopsided.predicted = {1.0};
    CHECK(error_code_of([&] { dslab::indicator_rmse({lopsided}); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("station_pixel_series extracts the containing pixel day by day") {
    const int days = 7, h = 3, w = 4;
    const GeoTransform g(10.0, 8.0, 2.0, 2.0);  // x in [10, 18), y in (2, 8]
    std::vector<double> values(std::size_t(days) * h * w);
    for (std::size_t i = 0; i < values.size(); ++i) values[i] = double(i) * 0.5;
    const DailyGridSeries grid(values, days, h, w, Date(2002, 3, 1), g);

    Station st;
    st.id = "mid";
    st.x = g.pixel_center_x(2);  // column 2
    st.y = g.pixel_center_y(1);  // row 1
    const DailySeries series = dslab::station_pixel_series(grid, st);
    CHECK(series.start_date == Date(2002, 3, 1));
    REQUIRE(series.values.size() == std::size_t(days));
    for (int t = 0; t < days; ++t)
        REQUIRE(series.values[std::size_t(t)] == grid.at(t, 1, 2));

    Station outside;
    outside.id = "out";
    outside.x = 50.0;
    outside.y = 5.0;
    CHECK(error_code_of([&] { dslab::station_pixel_series(grid, outside); }) ==
          ErrorCode::OutOfExtent);
}

TEST_CASE("station_observation_series densifies the observed span with NaN gaps") {
    Station st;
    st.id = "sparse";
    st.observations[Date(2001, 5, 10).epoch_days()] = 3.0;
    st.observations[Date(2001, 5, 13).epoch_days()] = 4.5;
    st.observations[Date(2001, 5, 15).epoch_days()] = -1.0;
    const DailySeries s = dslab::station_observation_series(st);
    CHECK(s.start_date == Date(2001, 5, 10));
    REQUIRE(s.values.size() == 6);
    CHECK(s.values[0] == 3.0);
    CHECK(std::isnan(s.values[1]));
    CHECK(std::isnan(s.values[2]));
    CHECK(s.values[3] == 4.5);
    CHECK(std::isnan(s.values[4]));
    CHECK(s.values[5] == -1.0);

    Station empty;
    empty.id = "none";
    CHECK(error_code_of([&] { dslab::station_observation_series(empty); }) ==
          ErrorCode::NoValidSamples);
}

TEST_CASE("evaluate_method matches a from-scratch brute force on random instances") {
    const auto& kinds = dslab::all_indicators();
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
        Rng rng(seed * 13 + 7);
        const int h = 3 + int(rng.below(3));
        const int w = 3 + int(rng.below(3));
        const int start_year = 2002 + int(rng.below(3));  // spans cover 2004, a leap year
        const int n_years = 2 + int(rng.below(3));
        const Date start(start_year, 1, 1);
        const Date end(start_year + n_years - 1, 12, 31);
        const int days = int(end - start) + 1;
        const GeoTransform g(0.0, double(h), 1.0, 1.0);

        std::vector<double> values(std::size_t(days) * h * w);
        for (double& v : values) v = rng.normal(9.0, 7.0);
        const DailyGridSeries grid(values, days, h, w, start, g);

        // Stations sit at random pixel centers; observations follow the
        // pixel with noise, random gaps and a possibly shorter span.
        const int n_stations = 2 + int(rng.below(4));
        StationSet stations;
        std::vector<DailySeries> pixel_series, obs_series;
        for (int s = 0; s < n_stations; ++s) {
            const int r = int(rng.below(std::uint64_t(h)));
            const int c = int(rng.below(std::uint64_t(w)));
            Station st;
            st.id = "s" + std::to_string(s);
            st.x = g.pixel_center_x(c);
            st.y = g.pixel_center_y(r);

            const int skip_head = int(rng.below(200));
            const int skip_tail = int(rng.below(200));
            const double gap_rate = 0.05 * double(rng.below(4));
            for (int t = skip_head; t < days - skip_tail; ++t) {
                if (rng.uniform() < gap_rate) continue;
                st.observations[start.plus_days(t).epoch_days()] =
                    grid.at(t, r, c) + rng.normal(0.0, 0.8);
            }
            if (st.observations.empty())
                st.observations[start.epoch_days()] = grid.at(0, r, c);
            stations.add(st);

            DailySeries pix;
            pix.start_date = start;
            pix.values.resize(std::size_t(days));
            for (int t = 0; t < days; ++t) pix.values[std::size_t(t)] = grid.at(t, r, c);
            pixel_series.push_back(std::move(pix));
            obs_series.push_back(dslab::station_observation_series(stations.at(std::size_t(s))));
        }

        const int year_begin = start_year;
        const int year_end = start_year + n_years - 1;

        bool any_throws = false;
        std::vector<BruteRow> brute;
        for (const IndicatorKind kind : kinds) {
            brute.push_back(brute_force_row(kind, pixel_series, obs_series, year_begin, year_end));
            any_throws = any_throws || brute.back().throws;
        }

        if (any_throws) {
            CHECK(error_code_of([&] {
                      dslab::evaluate_method("m", grid, stations, kinds, year_begin, year_end);
                  }) == ErrorCode::NoValidSamples);
            continue;
        }

        const EvalReport report =
            dslab::evaluate_method("m", grid, stations, kinds, year_begin, year_end);
        CHECK(report.method == "m");
        REQUIRE(report.rows.size() == kinds.size());
        std::int64_t total_skipped = 0;
        for (std::size_t i = 0; i < kinds.size(); ++i) {
            const auto& row = report.rows[i];
            const auto& want = brute[i];
            INFO("seed " << seed << " indicator " << dslab::indicator_name(kinds[i]));
            CHECK(row.kind == kinds[i]);
            REQUIRE(row.n_stations == want.n_stations);
            REQUIRE(row.n_samples == want.n_samples);
            REQUIRE(row.n_skipped == want.n_skipped);
            REQUIRE(std::fabs(row.rmse - want.rmse) <= 1e-12);
            // retained + skipped = periods-in-range x stations
            const std::int64_t periods =
                std::int64_t(year_end - year_begin + 1) * (monthly_of(kinds[i]) ? 12 : 1);
            REQUIRE(row.n_samples + row.n_skipped == periods * n_stations);
            total_skipped += row.n_skipped;
        }
        CHECK(total_skipped > 0);  // gappy spans genuinely produce skipped periods
    }
}

TEST_CASE("evaluate_method validates its inputs") {
    const GeoTransform g(0.0, 2.0, 1.0, 1.0);
    const DailyGridSeries grid =
        DailyGridSeries::filled(366, 2, 2, Date(2004, 1, 1), g, 10.0);
    StationSet stations;
    Station st;
    st.id = "a";
    st.x = g.pixel_center_x(0);
    st.y = g.pixel_center_y(0);
    st.observations[Date(2004, 6, 1).epoch_days()] = 10.0;
    stations.add(st);

    CHECK(error_code_of([&] {
              dslab::evaluate_method("m", grid, stations, dslab::all_indicators(), 2005, 2004);
          }) == ErrorCode::InvalidArgument);
    CHECK(error_code_of([&] {
              dslab::evaluate_method("m", grid, StationSet{}, dslab::all_indicators(), 2004, 2004);
          }) == ErrorCode::InvalidArgument);
    // One partial observation year: everything is skipped.
    CHECK(error_code_of([&] {
              dslab::evaluate_method("m", grid, stations, dslab::all_indicators(), 2004, 2004);
          }) == ErrorCode::NoValidSamples);
}

TEST_CASE("report csv carries one line per method-indicator pair") {
    testutil::TmpDir tmp;
    const std::string path = tmp.file("report.csv");
    EvalReport a;
    a.method = "bicubic";
    dslab::EvalRow row;
    row.kind = IndicatorKind::AnnualTg;
    row.rmse = 0.5;
    row.n_stations = 3;
    row.n_samples = 9;
    row.n_skipped = 1;
    a.rows.push_back(row);
    EvalReport b;
    b.method = "edsr";
    row.kind = IndicatorKind::Hdd15_5;
    row.rmse = 12.25;
    b.rows.push_back(row);
    dslab::write_report_csv({a, b}, path);

    const std::string text = testutil::read_text(path);
    CHECK(text.find("method,indicator,rmse,n_stations,n_samples,n_skipped\n") == 0);
    CHECK(text.find("bicubic,annual_tg,0.5,3,9,1\n") != std::string::npos);
    CHECK(text.find("edsr,hdd15.5,12.25,3,9,1\n") != std::string::npos);
}
