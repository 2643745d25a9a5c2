#include "dslab/grid_io.hpp"

#include <cstdint>
#include <vector>

#include "byteio.hpp"

namespace dslab {

using namespace byteio;

void write_grid(const DailyGridSeries& series, const std::string& path) {
    std::vector<char> out;
    const std::size_t count = series.values().size();
    out.reserve(48 + count * 4);
    put_bytes(out, "GRD1", 4);
    put_u32(out, std::uint32_t(series.width()));
    put_u32(out, std::uint32_t(series.height()));
    put_u32(out, std::uint32_t(series.days()));
    put_u64(out, std::uint64_t(series.start_date().epoch_days()));
    const GeoTransform& g = series.transform();
    put_f64(out, g.x0);
    put_f64(out, g.y0);
    put_f64(out, g.dx);
    put_f64(out, g.dy);
    for (double v : series.values()) put_f32(out, float(v));
    spill(path, out);
}

DailyGridSeries read_grid(const std::string& path, const GridReadOptions& options) {
    Reader r(slurp(path), path);
    r.expect_magic("GRD1");
    const std::uint32_t width = r.u32("W");
    const std::uint32_t height = r.u32("H");
    const std::uint32_t days = r.u32("T");
    if (width == 0 || height == 0 || days == 0)
        fail(ErrorCode::OutOfRange, path + ": zero dimension in header");
    const std::int64_t start_days = std::int64_t(r.u64("start date"));
    const double x0 = r.f64("x0");
    const double y0 = r.f64("y0");
    const double dx = r.f64("dx");
    const double dy = r.f64("dy");
    const std::size_t count = std::size_t(days) * height * width;
    r.expect_payload(count * 4, "value payload");
    std::vector<double> values(count);
    for (std::size_t i = 0; i < count; ++i) values[i] = double(r.f32("value"));
    r.expect_end();
    DailyGridSeries series(std::move(values), int(days), int(height), int(width),
                           Date::from_epoch_days(start_days), GeoTransform(x0, y0, dx, dy));
    if (options.check_bounds) series.check_bounds(options.lo, options.hi);
    return series;
}

}  // namespace dslab
