#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "dslab/date.hpp"
#include "dslab/error.hpp"

namespace dslab {

/// Planar north-up georeference. Pixel (r,c) covers
///   x in [x0 + c*dx, x0 + (c+1)*dx)   (closed west, open east)
///   y in (y0 - (r+1)*dy, y0 - r*dy]   (open south, closed north)
/// so row 0 is the northernmost row and rows increase southward.
struct GeoTransform {
    double x0 = 0.0;
    double y0 = 0.0;
    double dx = 1.0;
    double dy = 1.0;

    GeoTransform() = default;
    GeoTransform(double x0_, double y0_, double dx_, double dy_) : x0(x0_), y0(y0_), dx(dx_), dy(dy_) {
        if (!(dx > 0.0) || !(dy > 0.0))
            fail(ErrorCode::InvalidArgument, "pixel sizes must be positive");
    }

    /// Transform of the same extent at `factor`-times coarser sampling.
    GeoTransform coarsened(int factor) const {
        return GeoTransform(x0, y0, dx * factor, dy * factor);
    }
    GeoTransform refined(int factor) const {
        return GeoTransform(x0, y0, dx / factor, dy / factor);
    }

    double pixel_center_x(int col) const { return x0 + (col + 0.5) * dx; }
    double pixel_center_y(int row) const { return y0 - (row + 0.5) * dy; }

    friend bool operator==(const GeoTransform&, const GeoTransform&) = default;
};

/// Containing pixel of point (x, y) under the GeoTransform coverage rule.
/// Throws OutOfExtent for points outside [x0, x0+W*dx) x (y0-H*dy, y0].
std::pair<int, int> pixel_of(const GeoTransform& transform, int height, int width, double x,
                             double y);

/// T consecutive daily H x W fields. Missing values are NaN. Values are
/// degrees Celsius throughout; Kelvin appears only in the indicator layer.
class DailyGridSeries {
public:
    DailyGridSeries(std::vector<double> values, int days, int height, int width, Date start_date,
                    GeoTransform transform)
        : values_(std::move(values)),
          days_(days),
          height_(height),
          width_(width),
          start_date_(start_date),
          transform_(transform) {
        if (days < 1 || height < 1 || width < 1)
            fail(ErrorCode::InvalidArgument, "series dimensions must be at least 1");
        if (values_.size() != std::size_t(days) * std::size_t(height) * std::size_t(width))
            fail(ErrorCode::InvalidArgument, "value count does not match T*H*W");
    }

    static DailyGridSeries filled(int days, int height, int width, Date start_date,
                                  GeoTransform transform, double value) {
        return DailyGridSeries(
            std::vector<double>(std::size_t(days) * height * width, value), days, height, width,
            start_date, transform);
    }

    int days() const { return days_; }
    int height() const { return height_; }
    int width() const { return width_; }
    const Date& start_date() const { return start_date_; }
    const GeoTransform& transform() const { return transform_; }

    std::span<const double> day(int t) const {
        return {values_.data() + std::size_t(t) * height_ * width_,
                std::size_t(height_) * width_};
    }
    std::span<double> day(int t) {
        return {values_.data() + std::size_t(t) * height_ * width_,
                std::size_t(height_) * width_};
    }

    double at(int t, int r, int c) const {
        return values_[(std::size_t(t) * height_ + r) * width_ + c];
    }
    double& at(int t, int r, int c) {
        return values_[(std::size_t(t) * height_ + r) * width_ + c];
    }

    const std::vector<double>& values() const { return values_; }
    std::vector<double>& values() { return values_; }

    Date date_of_index(int t) const { return start_date_.plus_days(t); }

    /// Throws when any finite value falls outside (lo, hi).
    void check_bounds(double lo, double hi) const;

private:
    std::vector<double> values_;
    int days_;
    int height_;
    int width_;
    Date start_date_;
    GeoTransform transform_;
};

/// Day offset of `d` from the series start (0 = start date).
/// Throws OutOfRange when d is outside the series span.
int date_to_index(const DailyGridSeries& series, const Date& d);

}  // namespace dslab
