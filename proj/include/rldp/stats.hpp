#pragma once

// Thin statistical helpers over Boost.Math: exact binomial (Clopper-Pearson)
// confidence intervals for hit counts, plus the gamma / Poisson / normal
// CDFs used by distribution cross-checks.

#include <cstdint>
#include <stdexcept>

#include <boost/math/distributions/binomial.hpp>
#include <boost/math/distributions/gamma.hpp>
#include <boost/math/distributions/poisson.hpp>

namespace rldp {

struct ProbCI {
    double lo = 0;
    double hi = 1;
};

// Two-sided Clopper-Pearson interval at the given confidence (default 99%).
inline ProbCI clopper_pearson(std::uint64_t hits, std::uint64_t n, double confidence = 0.99) {
    if (n == 0) throw std::invalid_argument("clopper_pearson: n must be > 0");
    if (hits > n) throw std::invalid_argument("clopper_pearson: hits > n");
    using boost::math::binomial_distribution;
    const double alpha = (1.0 - confidence) / 2.0;
    ProbCI ci;
    ci.lo = hits == 0 ? 0.0
                      : binomial_distribution<double>::find_lower_bound_on_p(
                            static_cast<double>(n), static_cast<double>(hits), alpha);
    ci.hi = hits == n ? 1.0
                      : binomial_distribution<double>::find_upper_bound_on_p(
                            static_cast<double>(n), static_cast<double>(hits), alpha);
    return ci;
}

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x * 0.70710678118654752440); }

// P[Gamma(shape, rate) <= x]
inline double gamma_cdf(double x, double shape, double rate) {
    if (x <= 0) return 0;
    boost::math::gamma_distribution<double> g(shape, 1.0 / rate);
    return boost::math::cdf(g, x);
}

// P[Poisson(mean) <= k]
inline double poisson_cdf(double k, double mean) {
    if (k < 0) return 0;
    boost::math::poisson_distribution<double> p(mean);
    return boost::math::cdf(p, std::floor(k));
}

} // namespace rldp
