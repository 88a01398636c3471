#pragma once

#include <charconv>
#include <cmath>
#include <string>

namespace chipdse {

/// Shortest text that parses back to the same double; locale-independent.
inline std::string num(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return ec == std::errc{} ? std::string(buf, end) : "nan";
}

}  // namespace chipdse
