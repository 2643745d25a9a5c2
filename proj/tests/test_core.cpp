#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <numeric>
#include <random>
#include <vector>

#include "dslab/date.hpp"
#include "dslab/grid.hpp"
#include "dslab/grid_io.hpp"
#include "dslab/parallel.hpp"
#include "dslab/rng.hpp"
#include "dslab/stations.hpp"
#include "tests/checks.hpp"
#include "tests/oracles.hpp"

using dslab::DailyGridSeries;
using dslab::Date;
using dslab::ErrorCode;
using dslab::GeoTransform;
using dslab::Rng;
using dslab::Station;
using dslab::StationSet;
using testutil::error_code_of;
using testutil::TmpDir;

namespace {

// Walks `days` consecutive dates starting at (y, m, d) and checks every
// calendar accessor against the day-stepping oracle.
void check_date_walk(int y, int m, int d, int days) {
    oracle::Ymd cur{y, m, d};
    const Date base(y, m, d);
    int doy = 0;
    {
        oracle::Ymd probe{y, 1, 1};
        std::int64_t jan1 = oracle::epoch_days(probe);
        doy = int(oracle::epoch_days(cur) - jan1) + 1;
    }
    for (int i = 0; i < days; ++i) {
        const Date date = base.plus_days(i);
        REQUIRE(date.year() == cur.y);
        REQUIRE(date.month() == cur.m);
        REQUIRE(date.day() == cur.d);
        REQUIRE(date.day_of_year() == doy);
        REQUIRE(date.epoch_days() == oracle::epoch_days(cur));
        REQUIRE(Date::from_epoch_days(date.epoch_days()) == date);
        const oracle::Ymd next = oracle::next_day(cur);
        doy = next.y == cur.y ? doy + 1 : 1;
        cur = next;
    }
}

}  // namespace

TEST_CASE("date arithmetic matches a day-stepping calendar oracle") {
    // 1999-2009 spans leap years 2000 (div-400 rule), 2004 and 2008.
    check_date_walk(1999, 1, 1, 4018);
    // Around 2100, which the div-100 rule makes a common year.
    check_date_walk(2099, 12, 1, 460);
    // Mid-year start: day_of_year must pick up mid-count.
    check_date_walk(2003, 7, 17, 900);
    CHECK(Date(1970, 1, 1).epoch_days() == 0);
    CHECK(Date(2001, 1, 1) - Date(2000, 1, 1) == 366);
    CHECK(Date(2002, 1, 1) - Date(2001, 1, 1) == 365);
}

TEST_CASE("leap-year predicate and period lengths follow the Gregorian rules") {
    CHECK(dslab::is_leap_year(2000));
    CHECK(dslab::is_leap_year(2004));
    CHECK_FALSE(dslab::is_leap_year(1900));
    CHECK_FALSE(dslab::is_leap_year(2100));
    CHECK_FALSE(dslab::is_leap_year(2001));
    CHECK(dslab::days_in_year(2004) == 366);
    CHECK(dslab::days_in_year(2100) == 365);
    CHECK(dslab::days_in_month(2004, 2) == 29);
    CHECK(dslab::days_in_month(2001, 2) == 28);
    CHECK(dslab::days_in_month(2000, 2) == 29);
    CHECK(dslab::days_in_month(1900, 2) == 28);
    for (int m = 1; m <= 12; ++m) CHECK(dslab::days_in_month(2003, m) == oracle::month_len(2003, m));
}

TEST_CASE("date parsing accepts ISO dates and rejects malformed text") {
    CHECK(Date::parse("2004-02-29") == Date(2004, 2, 29));
    CHECK(Date::parse("1970-01-01").epoch_days() == 0);
    CHECK(Date(2004, 2, 29).to_string() == "2004-02-29");
    CHECK(Date::parse("2001-12-31").day_of_year() == 365);
    CHECK(error_code_of([] { Date::parse("2005-02-29"); }) == ErrorCode::InvalidArgument);
    CHECK(error_code_of([] { Date::parse("2004-13-01"); }) == ErrorCode::InvalidArgument);
    CHECK(error_code_of([] { Date::parse("2004-00-10"); }) == ErrorCode::InvalidArgument);
    CHECK(error_code_of([] { Date::parse("not-a-date"); }) == ErrorCode::InvalidArgument);
    CHECK(error_code_of([] { Date::parse(""); }) == ErrorCode::InvalidArgument);
    CHECK(error_code_of([] { Date::parse("2004-02-29x"); }) == ErrorCode::InvalidArgument);
    CHECK(error_code_of([] { Date(2023, 2, 29); }) == ErrorCode::InvalidArgument);
    CHECK(error_code_of([] { Date(2023, 4, 31); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("rng wraps the standard mt19937_64 sequence") {
    // The C++ standard pins the 10000th draw of a default-seeded (5489)
    // mt19937_64; our wrapper must reproduce the same raw stream.
    Rng r(5489);
    std::uint64_t last = 0;
    for (int i = 0; i < 10000; ++i) last = r.next_u64();
    CHECK(last == 9981545732273789042ULL);

    Rng a(42), b(42), c(43);
    bool all_equal = true, any_diff = false;
    for (int i = 0; i < 1000; ++i) {
        const std::uint64_t va = a.next_u64();
        all_equal = all_equal && va == b.next_u64();
        any_diff = any_diff || va != c.next_u64();
    }
    CHECK(all_equal);
    CHECK(any_diff);
}

TEST_CASE("rng transforms stay in range with sane moments") {
    Rng r(7);
    double lo = 1.0, hi = 0.0;
    for (int i = 0; i < 20000; ++i) {
        const double u = r.uniform();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        lo = std::min(lo, u);
        hi = std::max(hi, u);
    }
    CHECK(lo < 0.01);
    CHECK(hi > 0.99);

    for (int i = 0; i < 1000; ++i) {
        const double v = r.uniform(-3.0, 5.0);
        REQUIRE(v >= -3.0);
        REQUIRE(v < 5.0);
    }

    std::vector<std::int64_t> counts(13, 0);
    for (int i = 0; i < 26000; ++i) counts[std::size_t(r.below(13))] += 1;
    for (const std::int64_t n : counts) {
        CHECK(n > 1600);  // expected 2000 per bin
        CHECK(n < 2400);
    }

    double sum = 0.0, sum_sq = 0.0;
    const int n = 40000;
    for (int i = 0; i < n; ++i) {
        const double z = r.normal();
        sum += z;
        sum_sq += z * z;
    }
    const double mean = sum / n;
    const double var = sum_sq / n - mean * mean;
    CHECK(std::fabs(mean) < 0.02);
    CHECK(std::fabs(var - 1.0) < 0.03);
    CHECK(r.normal(10.0, 0.0) == 10.0);
}

TEST_CASE("rng shuffle is a deterministic permutation") {
    std::vector<int> v(257);
    std::iota(v.begin(), v.end(), 0);
    std::vector<int> w = v, original = v;
    Rng a(99), b(99);
    a.shuffle(v);
    b.shuffle(w);
    CHECK(v == w);
    CHECK(v != original);  // 257! permutations; identity is effectively impossible
    std::sort(w.begin(), w.end());
    CHECK(w == original);
}

TEST_CASE("splitmix64 reproduces the published seed-0 vector") {
    std::uint64_t state = 0;
    CHECK(dslab::splitmix64(state) == 0xE220A8397B1DCDAFULL);
    CHECK(dslab::splitmix64(state) == 0x6E789E6AA1B965F4ULL);
    CHECK(dslab::splitmix64(state) == 0x06C45D188009454FULL);
    CHECK(dslab::splitmix64(state) == 0xF88BB8A8724C81ECULL);
}

TEST_CASE("derive_seed separates master seeds and streams") {
    CHECK(dslab::derive_seed(1, 0) != dslab::derive_seed(1, 1));
    CHECK(dslab::derive_seed(1, 0) != dslab::derive_seed(2, 0));
    CHECK(dslab::derive_seed(1, 5) == dslab::derive_seed(1, 5));
    // A derived stream differs from the master's own raw stream.
    Rng master(1), derived(dslab::derive_seed(1, 0));
    CHECK(master.next_u64() != derived.next_u64());
}

TEST_CASE("parallel_for covers every index exactly once") {
    const std::int64_t n = 100000;
    std::vector<int> hits(std::size_t(n), 0);
    dslab::parallel_for(n, [&](std::int64_t i) { hits[std::size_t(i)] += 1; });
    CHECK(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }));

    bool ran = false;
    dslab::parallel_for(0, [&](std::int64_t) { ran = true; });
    CHECK_FALSE(ran);
    int count = 0;
    dslab::parallel_for(1, [&](std::int64_t) { ++count; });
    CHECK(count == 1);
    CHECK(dslab::thread_count() >= 1);
}

TEST_CASE("parallel_for output is bitwise invariant to the worker count") {
    const std::int64_t n = 4096;
    auto run = [n](const char* threads) {
        ::setenv("DOWNSCALE_LAB_THREADS", threads, 1);
        std::vector<double> out(std::size_t(n), 0.0);
        dslab::parallel_for(
            n, [&](std::int64_t i) { out[std::size_t(i)] = std::sin(0.001 * double(i)) * 3.7; });
        return out;
    };
    const auto one = run("1");
    for (const char* t : {"2", "3", "7", "16"}) CHECK(run(t) == one);
    ::unsetenv("DOWNSCALE_LAB_THREADS");
}

TEST_CASE("geotransform pixel containment is west- and north-closed") {
    const GeoTransform g(100.0, 500.0, 10.0, 5.0);
    const int h = 4, w = 6;  // extent x [100, 160), y (480, 500]

    CHECK(dslab::pixel_of(g, h, w, 100.0, 500.0) == std::pair<int, int>(0, 0));
    CHECK(dslab::pixel_of(g, h, w, 109.999, 500.0) == std::pair<int, int>(0, 0));
    CHECK(dslab::pixel_of(g, h, w, 110.0, 500.0) == std::pair<int, int>(0, 1));  // west edge closed
    CHECK(dslab::pixel_of(g, h, w, 159.999, 480.001) == std::pair<int, int>(3, 5));
    // Row 0 covers y in (495, 500]; exactly 495 falls to row 1's closed north edge.
    CHECK(dslab::pixel_of(g, h, w, 100.0, 495.0) == std::pair<int, int>(1, 0));
    CHECK(dslab::pixel_of(g, h, w, 100.0, 494.999) == std::pair<int, int>(1, 0));

    CHECK(error_code_of([&] { dslab::pixel_of(g, h, w, 99.999, 500.0); }) == ErrorCode::OutOfExtent);
    CHECK(error_code_of([&] { dslab::pixel_of(g, h, w, 160.0, 500.0); }) == ErrorCode::OutOfExtent);
    CHECK(error_code_of([&] { dslab::pixel_of(g, h, w, 100.0, 480.0); }) == ErrorCode::OutOfExtent);
    CHECK(error_code_of([&] { dslab::pixel_of(g, h, w, 100.0, 500.001); }) ==
          ErrorCode::OutOfExtent);

    CHECK(g.pixel_center_x(0) == doctest::Approx(105.0));
    CHECK(g.pixel_center_y(0) == doctest::Approx(497.5));
    CHECK(g.pixel_center_y(3) == doctest::Approx(482.5));

    const GeoTransform coarse = g.coarsened(2);
    CHECK(coarse == GeoTransform(100.0, 500.0, 20.0, 10.0));
    const GeoTransform fine = g.refined(2);
    CHECK(fine == GeoTransform(100.0, 500.0, 5.0, 2.5));

    CHECK(error_code_of([] { GeoTransform(0.0, 0.0, -1.0, 1.0); }) == ErrorCode::InvalidArgument);
    CHECK(error_code_of([] { GeoTransform(0.0, 0.0, 1.0, 0.0); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("pixel centers and pixel_of are mutually consistent") {
    const GeoTransform g(-3.25, 7.5, 0.75, 1.25);
    for (int r = 0; r < 5; ++r)
        for (int c = 0; c < 9; ++c)
            CHECK(dslab::pixel_of(g, 5, 9, g.pixel_center_x(c), g.pixel_center_y(r)) ==
                  std::pair<int, int>(r, c));
}

TEST_CASE("daily grid series validates construction and indexes time-major") {
    const GeoTransform g(0.0, 3.0, 1.0, 1.0);
    std::vector<double> values(2 * 3 * 4);
    std::iota(values.begin(), values.end(), 0.0);
    const DailyGridSeries s(values, 2, 3, 4, Date(2001, 2, 27), g);

    CHECK(s.days() == 2);
    CHECK(s.height() == 3);
    CHECK(s.width() == 4);
    CHECK(s.at(0, 0, 0) == 0.0);
    CHECK(s.at(0, 1, 2) == 6.0);   // (t*H + r)*W + c
    CHECK(s.at(1, 2, 3) == 23.0);
    CHECK(s.day(1)[0] == 12.0);
    CHECK(s.day(1).size() == 12);
    CHECK(s.date_of_index(0) == Date(2001, 2, 27));
    CHECK(s.date_of_index(2) == Date(2001, 3, 1));

    CHECK(error_code_of([&] { DailyGridSeries({1.0, 2.0}, 1, 1, 3, Date(2001, 1, 1), g); }) ==
          ErrorCode::InvalidArgument);
    CHECK(error_code_of([&] { DailyGridSeries({}, 0, 1, 1, Date(2001, 1, 1), g); }) ==
          ErrorCode::InvalidArgument);

    const DailyGridSeries f = DailyGridSeries::filled(3, 2, 2, Date(2001, 1, 1), g, 1.5);
    CHECK(f.values() == std::vector<double>(12, 1.5));
}

TEST_CASE("date_to_index spans the series and rejects outside dates") {
    const DailyGridSeries s =
        DailyGridSeries::filled(10, 1, 1, Date(2003, 12, 28), GeoTransform(0, 1, 1, 1), 0.0);
    CHECK(dslab::date_to_index(s, Date(2003, 12, 28)) == 0);
    CHECK(dslab::date_to_index(s, Date(2004, 1, 1)) == 4);
    CHECK(dslab::date_to_index(s, Date(2004, 1, 6)) == 9);
    CHECK(error_code_of([&] { dslab::date_to_index(s, Date(2003, 12, 27)); }) ==
          ErrorCode::OutOfRange);
    CHECK(error_code_of([&] { dslab::date_to_index(s, Date(2004, 1, 7)); }) ==
          ErrorCode::OutOfRange);
}

TEST_CASE("check_bounds passes NaN and rejects out-of-range finite values") {
    DailyGridSeries s =
        DailyGridSeries::filled(1, 2, 2, Date(2001, 1, 1), GeoTransform(0, 2, 1, 1), 5.0);
    s.at(0, 0, 1) = std::nan("");
    CHECK_NOTHROW(s.check_bounds(-100.0, 100.0));
    s.at(0, 1, 0) = 250.0;
    CHECK(error_code_of([&] { s.check_bounds(-100.0, 100.0); }) == ErrorCode::OutOfRange);
    s.at(0, 1, 0) = -100.0;  // open interval: the endpoint itself is rejected
    CHECK(error_code_of([&] { s.check_bounds(-100.0, 100.0); }) == ErrorCode::OutOfRange);
}

TEST_CASE("grid files round-trip at f32 precision") {
    TmpDir tmp;
    const std::string path = tmp.file("series.grd");
    const GeoTransform g(12.5, -7.25, 0.125, 2.5);
    Rng r(314);
    std::vector<double> values(5 * 6 * 7);
    for (double& v : values) v = r.uniform(-30.0, 40.0);
    values[13] = std::nan("");
    values[100] = std::nan("");
    const DailyGridSeries original(values, 5, 6, 7, Date(1999, 12, 31), g);

    dslab::write_grid(original, path);
    const DailyGridSeries back = dslab::read_grid(path);

    CHECK(back.days() == 5);
    CHECK(back.height() == 6);
    CHECK(back.width() == 7);
    CHECK(back.start_date() == Date(1999, 12, 31));
    CHECK(back.transform() == g);
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (std::isnan(values[i])) {
            REQUIRE(std::isnan(back.values()[i]));
        } else {
            REQUIRE(back.values()[i] == double(float(values[i])));
        }
    }

    // A second round-trip reproduces the f32-rounded series bit-exactly.
    const std::string path2 = tmp.file("series2.grd");
    dslab::write_grid(back, path2);
    const DailyGridSeries again = dslab::read_grid(path2);
    const auto& a = back.values();
    const auto& b = again.values();
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (std::isnan(a[i]))
            REQUIRE(std::isnan(b[i]));
        else
            REQUIRE(a[i] == b[i]);
    }
    CHECK(testutil::read_bytes(path) == testutil::read_bytes(path2));
}

TEST_CASE("grid reader rejects foreign, truncated and padded files") {
    TmpDir tmp;
    const std::string path = tmp.file("series.grd");
    const DailyGridSeries s =
        DailyGridSeries::filled(2, 3, 4, Date(2001, 1, 1), GeoTransform(0, 3, 1, 1), 1.0);
    dslab::write_grid(s, path);
    const std::vector<char> good = testutil::read_bytes(path);

    auto corrupted = good;
    corrupted[0] = 'X';
    testutil::write_bytes(path, corrupted);
    CHECK(error_code_of([&] { dslab::read_grid(path); }) == ErrorCode::BadMagic);

    // Chopping anywhere — inside the payload or inside the header — is Truncated.
    for (const std::size_t keep : {good.size() - 5, std::size_t(20), std::size_t(2)}) {
        testutil::write_bytes(path, std::vector<char>(good.begin(), good.begin() + long(keep)));
        CHECK(error_code_of([&] { dslab::read_grid(path); }) == ErrorCode::Truncated);
    }

    auto padded = good;
    padded.push_back('\0');
    testutil::write_bytes(path, padded);
    CHECK(error_code_of([&] { dslab::read_grid(path); }) == ErrorCode::Truncated);

    // Zero dimension in an otherwise intact header.
    auto zero_dim = good;
    zero_dim[4] = zero_dim[5] = zero_dim[6] = zero_dim[7] = '\0';  // W = 0
    testutil::write_bytes(path, zero_dim);
    CHECK(error_code_of([&] { dslab::read_grid(path); }) == ErrorCode::OutOfRange);
}

TEST_CASE("grid reader applies sanity bounds to finite values only") {
    TmpDir tmp;
    const std::string path = tmp.file("hot.grd");
    DailyGridSeries s =
        DailyGridSeries::filled(1, 2, 2, Date(2001, 1, 1), GeoTransform(0, 2, 1, 1), 20.0);
    s.at(0, 0, 0) = std::nan("");  // NaN always passes
    s.at(0, 1, 1) = 150.0;
    dslab::write_grid(s, path);

    CHECK(error_code_of([&] { dslab::read_grid(path); }) == ErrorCode::OutOfRange);
    dslab::GridReadOptions relaxed;
    relaxed.check_bounds = false;
    CHECK_NOTHROW(dslab::read_grid(path, relaxed));
    dslab::GridReadOptions wide;
    wide.lo = -500.0;
    wide.hi = 500.0;
    CHECK_NOTHROW(dslab::read_grid(path, wide));
}

TEST_CASE("station csv files round-trip ids, coordinates and observations") {
    TmpDir tmp;
    StationSet set;
    Station a;
    a.id = "alpha";
    a.x = 3.14159;
    a.y = -0.125;
    a.observations[Date(2001, 1, 1).epoch_days()] = 1.5;
    a.observations[Date(2001, 1, 3).epoch_days()] = -7.25;
    Station b;
    b.id = "beta-2";
    b.x = 1e6 + 0.5;
    b.y = 42.0;
    b.observations[Date(2004, 2, 29).epoch_days()] = 0.0625;
    set.add(a);
    set.add(b);

    const std::string st_path = tmp.file("stations.csv");
    const std::string ob_path = tmp.file("observations.csv");
    dslab::write_stations(set, st_path);
    dslab::write_observations(set, ob_path);

    StationSet back = dslab::read_stations(st_path);
    dslab::read_observations(ob_path, back);

    REQUIRE(back.size() == 2);
    CHECK(back.at(0).id == "alpha");
    CHECK(back.at(1).id == "beta-2");
    CHECK(back.at(0).x == 3.14159);  // %.17g writes doubles exactly
    CHECK(back.at(0).y == -0.125);
    CHECK(back.at(1).x == 1e6 + 0.5);
    CHECK(back.index_of("beta-2") == 1);
    CHECK(back.contains("alpha"));
    CHECK_FALSE(back.contains("gamma"));
    REQUIRE(back.at(0).observations.size() == 2);
    CHECK(back.at(0).observations.at(Date(2001, 1, 1).epoch_days()) == 1.5);
    CHECK(back.at(0).observations.at(Date(2001, 1, 3).epoch_days()) == -7.25);
    CHECK(back.at(1).observations.at(Date(2004, 2, 29).epoch_days()) == 0.0625);
    CHECK(back.at(0).has_observation(Date(2001, 1, 1)));
    CHECK_FALSE(back.at(0).has_observation(Date(2001, 1, 2)));
}

TEST_CASE("station io rejects structural errors with precise codes") {
    TmpDir tmp;
    const std::string path = tmp.file("bad.csv");

    testutil::write_text(path, "wrong,header\n");
    CHECK(error_code_of([&] { dslab::read_stations(path); }) == ErrorCode::MalformedRow);

    testutil::write_text(path, "id,x,y\ns1,1.0\n");
    CHECK(error_code_of([&] { dslab::read_stations(path); }) == ErrorCode::MalformedRow);

    testutil::write_text(path, "id,x,y\n,1.0,2.0\n");
    CHECK(error_code_of([&] { dslab::read_stations(path); }) == ErrorCode::MalformedRow);

    testutil::write_text(path, "id,x,y\ns1,abc,2.0\n");
    CHECK(error_code_of([&] { dslab::read_stations(path); }) == ErrorCode::MalformedRow);

    testutil::write_text(path, "id,x,y\ns1,1.0,2.0\ns1,3.0,4.0\n");
    CHECK(error_code_of([&] { dslab::read_stations(path); }) == ErrorCode::DuplicateStationId);

    testutil::write_text(path, "id,x,y\ns1,1.0,2.0\n");
    StationSet set = dslab::read_stations(path);

    const std::string obs = tmp.file("obs.csv");
    testutil::write_text(obs, "station_id,date,value_c\nghost,2001-01-01,3.0\n");
    CHECK(error_code_of([&] { dslab::read_observations(obs, set); }) == ErrorCode::UnknownStation);

    testutil::write_text(obs, "station_id,date,value_c\ns1,2001-13-01,3.0\n");
    CHECK(error_code_of([&] { dslab::read_observations(obs, set); }) == ErrorCode::MalformedRow);

    testutil::write_text(obs, "station_id,date,value_c\ns1,2001-01-01\n");
    CHECK(error_code_of([&] { dslab::read_observations(obs, set); }) == ErrorCode::MalformedRow);

    CHECK(error_code_of([&] { set.index_of("ghost"); }) == ErrorCode::UnknownStation);
    CHECK(error_code_of([] { dslab::read_stations("/nonexistent/path.csv"); }) ==
          ErrorCode::IoError);

    StationSet dup;
    Station s;
    s.id = "x";
    dup.add(s);
    CHECK(error_code_of([&] { dup.add(s); }) == ErrorCode::DuplicateStationId);
}
