#pragma once

#include <charconv>
#include <stdexcept>
#include <string>

namespace asr {

/// Shortest decimal representation that round-trips the double exactly.
inline std::string fmt_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline double parse_double(const std::string& s) {
    double v = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{}) throw std::runtime_error("bad double: '" + s + "'");
    return v;
}

}  // namespace asr
