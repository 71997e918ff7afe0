#pragma once

#include <charconv>
#include <cstdio>
#include <string>
#include <string_view>
#include <vector>

#include "qpack/error.hpp"

namespace qpack {

inline std::string trim(std::string_view s) {
    const char* ws = " \t\r\n";
    auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) return {};
    auto e = s.find_last_not_of(ws);
    return std::string(s.substr(b, e - b + 1));
}

/// Strip a trailing `# comment` (full-line or inline).
inline std::string strip_comment(std::string_view line) {
    auto pos = line.find('#');
    if (pos != std::string_view::npos) line = line.substr(0, pos);
    return trim(line);
}

inline std::vector<std::string> split(std::string_view s, char delim) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= s.size()) {
        auto pos = s.find(delim, start);
        if (pos == std::string_view::npos) {
            out.push_back(trim(s.substr(start)));
            break;
        }
        out.push_back(trim(s.substr(start, pos - start)));
        start = pos + 1;
    }
    return out;
}

/// Whitespace-separated tokens.
inline std::vector<std::string> tokens(std::string_view s) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
        std::size_t j = i;
        while (j < s.size() && s[j] != ' ' && s[j] != '\t') ++j;
        if (j > i) out.emplace_back(s.substr(i, j - i));
        i = j;
    }
    return out;
}

inline double parse_double(const std::string& s, const std::string& context) {
    try {
        std::size_t used = 0;
        double v = std::stod(s, &used);
        if (used != s.size()) fail("malformed number '" + s + "' in " + context);
        return v;
    } catch (const Error&) {
        throw;
    } catch (const std::exception&) {
        fail("malformed number '" + s + "' in " + context);
    }
}

inline long parse_long(const std::string& s, const std::string& context) {
    try {
        std::size_t used = 0;
        long v = std::stol(s, &used);
        if (used != s.size()) fail("malformed integer '" + s + "' in " + context);
        return v;
    } catch (const Error&) {
        throw;
    } catch (const std::exception&) {
        fail("malformed integer '" + s + "' in " + context);
    }
}

/// Parse "<number><unit>" or "<number> <unit>" with a unit lookup table.
inline double parse_with_units(const std::string& s,
                               const std::vector<std::pair<std::string, double>>& units,
                               const std::string& kind, const std::string& context) {
    std::size_t pos = 0;
    double value = 0.0;
    try {
        value = std::stod(s, &pos);
    } catch (const std::exception&) {
        fail("malformed " + kind + " '" + s + "' in " + context);
    }
    const std::string unit = trim(s.substr(pos));
    for (const auto& [name, scale] : units)
        if (unit == name) return value * scale;
    fail("unknown " + kind + " unit '" + unit + "' in " + context);
}

inline double parse_time_s(const std::string& s, const std::string& context) {
    return parse_with_units(s, {{"s", 1.0}, {"ms", 1e-3}, {"us", 1e-6}, {"ns", 1e-9}}, "time",
                            context);
}

inline double parse_frequency_hz(const std::string& s, const std::string& context) {
    return parse_with_units(s, {{"Hz", 1.0}, {"kHz", 1e3}, {"MHz", 1e6}, {"GHz", 1e9}},
                            "frequency", context);
}

inline double parse_voltage_v(const std::string& s, const std::string& context) {
    return parse_with_units(s, {{"V", 1.0}, {"mV", 1e-3}, {"uV", 1e-6}}, "voltage", context);
}

/// Shortest round-trip-exact decimal form of a double.
inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    // Prefer the shorter %.15g / %.16g form when it round-trips exactly.
    for (int prec = 15; prec <= 16; ++prec) {
        char probe[40];
        std::snprintf(probe, sizeof(probe), "%.*g", prec, v);
        double back = 0.0;
        std::sscanf(probe, "%lf", &back);
        if (back == v) return probe;
    }
    return buf;
}

}  // namespace qpack
