#pragma once

#include <string>
#include <vector>

#include "dslab/date.hpp"

namespace dslab {

/// Consecutive-calendar-day temperature series, °C, NaN = missing day.
struct DailySeries {
    Date start_date;
    std::vector<double> values;

    Date date_of(std::int64_t i) const { return start_date.plus_days(i); }
    std::int64_t days() const { return std::int64_t(values.size()); }
};

enum class DegreeDirection { Above, Below };

/// One indicator sample. month is 0 for annual indicators. A period is
/// valid only when the series fully covers it with non-missing days; the
/// value is still computed over whatever days are available.
struct IndicatorValue {
    int year = 0;
    int month = 0;
    double value = 0.0;  // K for TG indicators, K*day for degree days
    bool valid = true;
};

/// Calendar-year mean of daily mean temperature, reported in Kelvin.
std::vector<IndicatorValue> annual_tg(const DailySeries& s);

/// Calendar-month mean of daily mean temperature, in Kelvin.
std::vector<IndicatorValue> monthly_tg(const DailySeries& s);

/// Per calendar year: sum over days of max(0, T - threshold) for Above,
/// max(0, threshold - T) for Below. A day exactly at the threshold
/// contributes zero either way. Unit K*day (identical in K and °C).
std::vector<IndicatorValue> degree_days(const DailySeries& s, double threshold_c,
                                        DegreeDirection direction);

/// The five standard indicators used throughout evaluation.
enum class IndicatorKind { AnnualTg, MonthlyTg, Gdd5, Cdd22, Hdd15_5 };

const std::vector<IndicatorKind>& all_indicators();
std::string indicator_name(IndicatorKind kind);  // annual_tg, monthly_tg, gdd5, cdd22, hdd15.5
std::string indicator_unit(IndicatorKind kind);  // K or K*day
std::vector<IndicatorValue> compute_indicator(IndicatorKind kind, const DailySeries& s);

struct IndicatorRow {
    std::string series_id;
    IndicatorKind kind;
    IndicatorValue value;
};

/// CSV "series_id,indicator,year,month,value,unit,valid"; the month field
/// is empty for annual indicators, valid is 1/0.
void write_indicator_csv(const std::vector<IndicatorRow>& rows, const std::string& path);

}  // namespace dslab
