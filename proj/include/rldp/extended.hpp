#pragma once

// Extended-real conventions used throughout: values live in (-inf, +inf],
// +inf marks "infinite rate / CGF diverges". NaN is never a legal value;
// guarded helpers below keep 0 * inf and inf - inf out of the arithmetic.

#include <cassert>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <string>

namespace rldp {

inline constexpr double inf = std::numeric_limits<double>::infinity();

inline bool is_finite(double x) { return std::isfinite(x); }

// Product with the convention that 0 * inf is a programming error, not 0 or NaN.
inline double xmul(double a, double b) {
    assert(!((a == 0.0 && std::isinf(b)) || (b == 0.0 && std::isinf(a))) &&
           "0 * inf is undefined here; guard the caller");
    double r = a * b;
    assert(!std::isnan(r));
    return r;
}

// Sum where inf + finite = inf; (-inf) + (+inf) is an error.
inline double xadd(double a, double b) {
    assert(!(std::isinf(a) && std::isinf(b) && (a > 0) != (b > 0)));
    double r = a + b;
    assert(!std::isnan(r));
    return r;
}

// Serialization: finite values carry 17 significant digits (round-trip exact
// for IEEE doubles); infinities use "+inf"/"-inf" literals.
inline std::string format_real(double x) {
    if (std::isinf(x)) return x > 0 ? "+inf" : "-inf";
    assert(!std::isnan(x));
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline bool parse_real(const std::string& s, double& out) {
    if (s == "+inf" || s == "inf") { out = inf; return true; }
    if (s == "-inf") { out = -inf; return true; }
    char* end = nullptr;
    out = std::strtod(s.c_str(), &end);
    return end && *end == '\0' && !s.empty() && !std::isnan(out);
}

} // namespace rldp
