#include "dslab/date.hpp"

#include <cstdio>

namespace dslab {

Date Date::parse(const std::string& text) {
    int y = 0, m = 0, d = 0;
    char tail = 0;
    if (std::sscanf(text.c_str(), "%d-%d-%d%c", &y, &m, &d, &tail) != 3)
        fail(ErrorCode::InvalidArgument, "expected YYYY-MM-DD, got '" + text + "'");
    return Date(y, m, d);
}

std::string Date::iso_string(int y, int m, int d) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", y, m, d);
    return buf;
}

}  // namespace dslab
