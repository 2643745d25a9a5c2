#pragma once

#include <chrono>
#include <cstdint>
#include <string>

#include "dslab/error.hpp"

namespace dslab {

/// Calendar date on the proleptic Gregorian calendar (real leap years).
/// Stored as year/month/day; conversions go through days since 1970-01-01.
class Date {
public:
    Date() : Date(1970, 1, 1) {}

    Date(int year, int month, int day) : year_(year), month_(month), day_(day) {
        namespace chr = std::chrono;
        const chr::year_month_day ymd{chr::year{year}, chr::month{unsigned(month)},
                                      chr::day{unsigned(day)}};
        if (!ymd.ok())
            fail(ErrorCode::InvalidArgument, "invalid calendar date " + iso_string(year, month, day));
        epoch_days_ = chr::sys_days(ymd).time_since_epoch().count();
    }

    static Date from_epoch_days(std::int64_t days) {
        namespace chr = std::chrono;
        const chr::year_month_day ymd{chr::sys_days{chr::days{days}}};
        Date d;
        d.year_ = int(ymd.year());
        d.month_ = int(unsigned(ymd.month()));
        d.day_ = int(unsigned(ymd.day()));
        d.epoch_days_ = days;
        return d;
    }

    /// Parses "YYYY-MM-DD". Throws InvalidArgument on malformed input.
    static Date parse(const std::string& text);

    int year() const { return year_; }
    int month() const { return month_; }
    int day() const { return day_; }
    std::int64_t epoch_days() const { return epoch_days_; }

    Date plus_days(std::int64_t n) const { return from_epoch_days(epoch_days_ + n); }

    /// 1-based day of year (1 = Jan 1).
    int day_of_year() const { return int(epoch_days_ - Date(year_, 1, 1).epoch_days()) + 1; }

    std::string to_string() const { return iso_string(year_, month_, day_); }

    friend bool operator==(const Date& a, const Date& b) { return a.epoch_days_ == b.epoch_days_; }
    friend bool operator!=(const Date& a, const Date& b) { return a.epoch_days_ != b.epoch_days_; }
    friend bool operator<(const Date& a, const Date& b) { return a.epoch_days_ < b.epoch_days_; }
    friend bool operator<=(const Date& a, const Date& b) { return a.epoch_days_ <= b.epoch_days_; }
    friend std::int64_t operator-(const Date& a, const Date& b) {
        return a.epoch_days_ - b.epoch_days_;
    }

private:
    static std::string iso_string(int y, int m, int d);

    int year_;
    int month_;
    int day_;
    std::int64_t epoch_days_ = 0;
};

inline bool is_leap_year(int year) {
    return (year % 4 == 0 && year % 100 != 0) || year % 400 == 0;
}

inline int days_in_year(int year) { return is_leap_year(year) ? 366 : 365; }

inline int days_in_month(int year, int month) {
    static const int lengths[12] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    if (month == 2 && is_leap_year(year)) return 29;
    return lengths[month - 1];
}

}  // namespace dslab
