#pragma once

#include <cstdarg>
#include <cstdio>
#include <string>

namespace mova {

// printf-style formatting into std::string. Uses the C locale semantics of
// snprintf, so numeric output is stable across machines.
inline std::string str_printf(const char* fmt, ...)
    __attribute__((format(printf, 1, 2)));

inline std::string str_printf(const char* fmt, ...) {
    va_list args;
    va_start(args, fmt);
    va_list args2;
    va_copy(args2, args);
    const int n = std::vsnprintf(nullptr, 0, fmt, args);
    va_end(args);
    std::string out;
    if (n > 0) {
        out.resize(static_cast<std::size_t>(n));
        std::vsnprintf(out.data(), out.size() + 1, fmt, args2);
    }
    va_end(args2);
    return out;
}

// Shortest clean decimal for scale factors and granularities (0.01, 1, 100).
inline std::string format_compact(double v) {
    std::string s = str_printf("%.10g", v);
    return s;
}

} // namespace mova
