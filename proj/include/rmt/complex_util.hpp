// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cctype>
#include <complex>
#include <cstdio>
#include <optional>
#include <string>

namespace rmt {

using cdouble = std::complex<double>;

// Parses "a+bi" / "a-bi" / "a" / "bi" (no spaces). Returns nullopt on bad input.
inline std::optional<cdouble> parse_complex(const std::string& text) {
    if (text.empty()) return std::nullopt;
    std::string s = text;
    bool has_i = (s.back() == 'i' || s.back() == 'I');
    if (has_i) s.pop_back();
    if (s.empty()) return has_i ? std::optional<cdouble>(cdouble(0, 1)) : std::nullopt;

    // split at the last '+'/'-' that is not an exponent sign and not leading
    std::size_t split = std::string::npos;
    for (std::size_t i = s.size(); i-- > 1;) {
        if ((s[i] == '+' || s[i] == '-') && s[i - 1] != 'e' && s[i - 1] != 'E') {
            split = i;
            break;
        }
    }
    auto to_double = [](const std::string& t) -> std::optional<double> {
        if (t.empty() || t == "+" || t == "-") {
            if (t == "+") return 1.0;
            if (t == "-") return -1.0;
            return std::nullopt;
        }
        char* end = nullptr;
        double v = std::strtod(t.c_str(), &end);
        if (end != t.c_str() + t.size()) return std::nullopt;
        return v;
    };

    if (!has_i) {
        auto re = to_double(s);
        if (!re) return std::nullopt;
        return cdouble(*re, 0.0);
    }
    if (split == std::string::npos) {
        auto im = to_double(s);
        if (!im) return std::nullopt;
        return cdouble(0.0, *im);
    }
    auto re = to_double(s.substr(0, split));
    auto im = to_double(s.substr(split));
    if (!re || !im) return std::nullopt;
    return cdouble(*re, *im);
}

inline std::string format_complex(cdouble z, int precision = 12) {
    char buf[80];
    std::snprintf(buf, sizeof(buf), "%.*g%+.*gi", precision, z.real(), precision, z.imag());
    return buf;
}

}  // namespace rmt
