#pragma once

#include <string>

#include "dslab/grid.hpp"

namespace dslab {

/// GRD1 grid file, little-endian:
///   bytes 0-3   magic "GRD1"
///   u32         W, H, T
///   i64         start date, days since 1970-01-01
///   f64         x0, y0, dx, dy
///   f32 * T*H*W values, time-major, row-major per slice, row 0 = north
/// Values are stored at 32-bit precision; read(write(s)) reproduces the
/// f32-rounded series bit-exactly.
void write_grid(const DailyGridSeries& series, const std::string& path);

struct GridReadOptions {
    // Sanity bounds on finite values, degrees Celsius. NaN passes.
    double lo = -100.0;
    double hi = 100.0;
    bool check_bounds = true;
};

DailyGridSeries read_grid(const std::string& path, const GridReadOptions& options = {});

}  // namespace dslab
