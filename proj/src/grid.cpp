#include "dslab/grid.hpp"

#include <cmath>
#include <string>

namespace dslab {

std::pair<int, int> pixel_of(const GeoTransform& transform, int height, int width, double x,
                             double y) {
    // Under the coverage rule the extent is [x0, x0+W*dx) x (y0-H*dy, y0]:
    // u = W and v = H land exactly on the open edges and are rejected, while
    // y = y0 gives v = 0 (closed north edge of row 0). Interior row/column
    // boundaries fall to the cell whose closed edge they touch, which is
    // exactly what floor() yields.
    const double u = (x - transform.x0) / transform.dx;
    const double v = (transform.y0 - y) / transform.dy;
    if (!(u >= 0.0) || !(u < double(width)) || !(v >= 0.0) || !(v < double(height)))
        fail(ErrorCode::OutOfExtent, "point (" + std::to_string(x) + ", " + std::to_string(y) +
                                         ") outside grid extent");
    return {int(std::floor(v)), int(std::floor(u))};
}

void DailyGridSeries::check_bounds(double lo, double hi) const {
    for (std::size_t i = 0; i < values_.size(); ++i) {
        const double v = values_[i];
        if (std::isnan(v)) continue;
        if (!(v > lo) || !(v < hi))
            fail(ErrorCode::OutOfRange, "value " + std::to_string(v) + " at flat index " +
                                            std::to_string(i) + " outside sanity bounds (" +
                                            std::to_string(lo) + ", " + std::to_string(hi) + ")");
    }
}

int date_to_index(const DailyGridSeries& series, const Date& d) {
    const std::int64_t offset = d - series.start_date();
    if (offset < 0 || offset >= series.days())
        fail(ErrorCode::OutOfRange, "date " + d.to_string() + " outside series span " +
                                        series.start_date().to_string() + " .. " +
                                        series.date_of_index(series.days() - 1).to_string());
    return int(offset);
}

}  // namespace dslab
