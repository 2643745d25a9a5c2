#include "dslab/indicators.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>

#include "dslab/error.hpp"

namespace dslab {

namespace {

constexpr double kCelsiusToKelvin = 273.15;

struct Accum {
    double sum = 0.0;
    std::int64_t finite_days = 0;
    std::int64_t covered_days = 0;
    std::int64_t missing_days = 0;
};

// Walks the series once, folding each day into the bucket chosen by `key`.
// Buckets come out in calendar order because the keys are monotone.
template <typename KeyFn, typename DayFn>
std::map<std::int64_t, Accum> accumulate(const DailySeries& s, KeyFn key, DayFn fold) {
    std::map<std::int64_t, Accum> buckets;
    Date cur = s.start_date;
    for (std::int64_t i = 0; i < s.days(); ++i) {
        Accum& a = buckets[key(cur)];
        a.covered_days += 1;
        const double v = s.values[std::size_t(i)];
        if (std::isnan(v)) {
            a.missing_days += 1;
        } else {
            a.finite_days += 1;
            a.sum += fold(v);
        }
        cur = cur.plus_days(1);
    }
    return buckets;
}

}  // namespace

std::vector<IndicatorValue> annual_tg(const DailySeries& s) {
    auto buckets = accumulate(
        s, [](const Date& d) { return std::int64_t(d.year()); }, [](double v) { return v; });
    std::vector<IndicatorValue> out;
    out.reserve(buckets.size());
    for (const auto& [year, a] : buckets) {
        IndicatorValue v;
        v.year = int(year);
        v.value = a.finite_days > 0 ? a.sum / double(a.finite_days) + kCelsiusToKelvin
                                    : std::nan("");
        v.valid = a.missing_days == 0 && a.covered_days == days_in_year(int(year));
        out.push_back(v);
    }
    return out;
}

std::vector<IndicatorValue> monthly_tg(const DailySeries& s) {
    auto buckets = accumulate(
        s, [](const Date& d) { return std::int64_t(d.year()) * 12 + (d.month() - 1); },
        [](double v) { return v; });
    std::vector<IndicatorValue> out;
    out.reserve(buckets.size());
    for (const auto& [key, a] : buckets) {
        IndicatorValue v;
        v.year = int(key / 12);
        v.month = int(key % 12) + 1;
        v.value = a.finite_days > 0 ? a.sum / double(a.finite_days) + kCelsiusToKelvin
                                    : std::nan("");
        v.valid = a.missing_days == 0 && a.covered_days == days_in_month(v.year, v.month);
        out.push_back(v);
    }
    return out;
}

std::vector<IndicatorValue> degree_days(const DailySeries& s, double threshold_c,
                                        DegreeDirection direction) {
    if (!std::isfinite(threshold_c))
        fail(ErrorCode::InvalidArgument, "degree_days threshold must be finite");
    auto fold = [threshold_c, direction](double v) {
        const double d = direction == DegreeDirection::Above ? v - threshold_c : threshold_c - v;
        return d > 0.0 ? d : 0.0;
    };
    auto buckets = accumulate(s, [](const Date& d) { return std::int64_t(d.year()); }, fold);
    std::vector<IndicatorValue> out;
    out.reserve(buckets.size());
    for (const auto& [year, a] : buckets) {
        IndicatorValue v;
        v.year = int(year);
        v.value = a.sum;
        v.valid = a.missing_days == 0 && a.covered_days == days_in_year(int(year));
        out.push_back(v);
    }
    return out;
}

const std::vector<IndicatorKind>& all_indicators() {
    static const std::vector<IndicatorKind> kinds = {IndicatorKind::AnnualTg,
                                                     IndicatorKind::MonthlyTg, IndicatorKind::Gdd5,
                                                     IndicatorKind::Cdd22, IndicatorKind::Hdd15_5};
    return kinds;
}

std::string indicator_name(IndicatorKind kind) {
    switch (kind) {
        case IndicatorKind::AnnualTg: return "annual_tg";
        case IndicatorKind::MonthlyTg: return "monthly_tg";
        case IndicatorKind::Gdd5: return "gdd5";
        case IndicatorKind::Cdd22: return "cdd22";
        case IndicatorKind::Hdd15_5: return "hdd15.5";
    }
    fail(ErrorCode::InvalidArgument, "bad indicator kind");
}

std::string indicator_unit(IndicatorKind kind) {
    switch (kind) {
        case IndicatorKind::AnnualTg:
        case IndicatorKind::MonthlyTg: return "K";
        default: return "K*day";
    }
}

std::vector<IndicatorValue> compute_indicator(IndicatorKind kind, const DailySeries& s) {
    switch (kind) {
        case IndicatorKind::AnnualTg: return annual_tg(s);
        case IndicatorKind::MonthlyTg: return monthly_tg(s);
        case IndicatorKind::Gdd5: return degree_days(s, 5.0, DegreeDirection::Above);
        case IndicatorKind::Cdd22: return degree_days(s, 22.0, DegreeDirection::Above);
        case IndicatorKind::Hdd15_5: return degree_days(s, 15.5, DegreeDirection::Below);
    }
    fail(ErrorCode::InvalidArgument, "bad indicator kind");
}

void write_indicator_csv(const std::vector<IndicatorRow>& rows, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) fail(ErrorCode::IoError, "cannot open " + path + " for writing");
    out << "series_id,indicator,year,month,value,unit,valid\n";
    char buf[64];
    for (const auto& row : rows) {
        std::snprintf(buf, sizeof buf, "%.17g", row.value.value);
        out << row.series_id << ',' << indicator_name(row.kind) << ',' << row.value.year << ',';
        if (row.value.month > 0) out << row.value.month;
        out << ',' << buf << ',' << indicator_unit(row.kind) << ',' << (row.value.valid ? 1 : 0)
            << '\n';
    }
    if (!out) fail(ErrorCode::IoError, "short write to " + path);
}

}  // namespace dslab
