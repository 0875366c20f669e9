#pragma once

// Joint laws of one renewal step: a wait S > 0 and a reward vector X in R^d,
// d <= 3. Each law carries tail exponents for the wait distribution,
//   ell_s = liminf_{s->inf} -ln P(S > s) / s   (used by the upper-bound rate)
//   ell_i = limsup_{s->inf} -ln P(S > s) / s   (used by the lower-bound rate)
// with 0 <= ell_s <= ell_i <= +inf.
//
// Built-in families:
//   exp_unit(lambda)            S ~ Exp(lambda), X = 1                 (d = 1)
//   exp_gauss(lambda, m, Sigma) S ~ Exp(lambda), X ~ N(m, Sigma) indep (d <= 3)
//   gauss_tail_cauchy()         P(S > s) = exp(-s^2), X = (S, Cauchy)  (d = 2)
//   reward_of_wait(f, lambda)   S ~ Exp(lambda), X = f(S), f sublinear (d = 1)
//   oscillating_tail(es, ei)    piecewise-linear hazard, X = S         (d = 1)
//   empirical(samples)          resampling from ingested (s, x) pairs
//
// Sampling is inverse-CDF driven (see rng.hpp) so results are reproducible
// across platforms for a fixed seed and worker layout.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "rldp/extended.hpp"
#include "rldp/quadrature.hpp"
#include "rldp/rng.hpp"
#include "rldp/special.hpp"
#include "rldp/vec.hpp"

namespace rldp {

enum class Family { exp_unit, exp_gauss, gauss_tail_cauchy, reward_of_wait, oscillating_tail, empirical };

enum class RewardFn { sqrt_wait, log1p_wait, pow_wait };

struct TailSpec {
    double ell_s = inf; // liminf exponent (smaller)
    double ell_i = inf; // limsup exponent (larger)
};

struct Sample {
    double s = 0;
    Vec x;
};

struct PairLaw {
    Family family = Family::exp_unit;
    int dim = 1;
    TailSpec tail;
    std::string name;

    double lambda = 1.0; // exponential wait rate where applicable

    Vec gauss_mean;                 // exp_gauss
    LowerTri gauss_chol;            // exp_gauss sampling factor
    double gauss_cov[9] = {0};      // exp_gauss, row-major d x d

    RewardFn reward = RewardFn::sqrt_wait; // reward_of_wait
    double reward_c = 1.0;                 // pow_wait scale
    double reward_p = 0.5;                 // pow_wait exponent in (0, 1)

    std::shared_ptr<const PiecewiseHazard> hazard; // oscillating_tail

    std::shared_ptr<const std::vector<Sample>> data; // empirical
    bool tail_low_confidence = false;                // empirical tail fit weak
};

inline double reward_value(const PairLaw& law, double s) {
    switch (law.reward) {
        case RewardFn::sqrt_wait: return std::sqrt(s);
        case RewardFn::log1p_wait: return std::log1p(s);
        case RewardFn::pow_wait: return law.reward_c * std::pow(s, law.reward_p);
    }
    return 0;
}

inline const char* reward_fn_name(RewardFn f) {
    switch (f) {
        case RewardFn::sqrt_wait: return "sqrt";
        case RewardFn::log1p_wait: return "log1p";
        case RewardFn::pow_wait: return "pow";
    }
    return "?";
}

// ---------- factories ----------

inline void require(bool ok, const std::string& msg) {
    if (!ok) throw std::invalid_argument(msg);
}

inline PairLaw make_exp_unit(double lambda = 1.0) {
    require(std::isfinite(lambda) && lambda > 0, "exp_unit: lambda must be finite and > 0");
    PairLaw law;
    law.family = Family::exp_unit;
    law.dim = 1;
    law.lambda = lambda;
    law.tail = {lambda, lambda};
    law.name = "exp_unit(lambda=" + format_real(lambda) + ")";
    return law;
}

inline PairLaw make_exp_gauss(double lambda, const Vec& mean, const double* cov_row_major) {
    require(std::isfinite(lambda) && lambda > 0, "exp_gauss: lambda must be finite and > 0");
    require(mean.dim >= 1 && mean.dim <= max_dim, "exp_gauss: reward dimension must be 1..3");
    PairLaw law;
    law.family = Family::exp_gauss;
    law.dim = mean.dim;
    law.lambda = lambda;
    law.gauss_mean = mean;
    int d = mean.dim;
    double scale = 0;
    for (int i = 0; i < d * d; ++i) {
        require(std::isfinite(cov_row_major[i]), "exp_gauss: covariance entries must be finite");
        scale = std::max(scale, std::fabs(cov_row_major[i]));
        law.gauss_cov[i] = cov_row_major[i];
    }
    for (int i = 0; i < d; ++i)
        for (int j = i + 1; j < d; ++j)
            require(std::fabs(cov_row_major[i * d + j] - cov_row_major[j * d + i]) <= 1e-12 * (1 + scale),
                    "exp_gauss: covariance must be symmetric");
    require(cholesky(law.gauss_cov, d, law.gauss_chol),
            "exp_gauss: covariance must be positive definite");
    law.tail = {lambda, lambda};
    law.name = "exp_gauss(lambda=" + format_real(lambda) + ",d=" + std::to_string(d) + ")";
    return law;
}

inline PairLaw make_gauss_tail_cauchy() {
    PairLaw law;
    law.family = Family::gauss_tail_cauchy;
    law.dim = 2;
    law.tail = {inf, inf};
    law.name = "gauss_tail_cauchy";
    return law;
}

inline PairLaw make_reward_of_wait(RewardFn fn, double lambda = 1.0, double c = 1.0, double p = 0.5) {
    require(std::isfinite(lambda) && lambda > 0, "reward_of_wait: lambda must be finite and > 0");
    PairLaw law;
    law.family = Family::reward_of_wait;
    law.dim = 1;
    law.lambda = lambda;
    law.reward = fn;
    if (fn == RewardFn::pow_wait) {
        require(std::isfinite(c) && c > 0, "reward_of_wait: pow scale must be finite and > 0");
        require(p > 0 && p < 1, "reward_of_wait: pow exponent must lie in (0, 1)");
        law.reward_c = c;
        law.reward_p = p;
    }
    law.tail = {lambda, lambda};
    law.name = std::string("reward_of_wait(") + reward_fn_name(fn) +
               ",lambda=" + format_real(lambda) + ")";
    return law;
}

inline PairLaw make_oscillating_tail(double ell_s, double ell_i) {
    require(std::isfinite(ell_s) && std::isfinite(ell_i) && ell_s > 0 && ell_s <= ell_i,
            "oscillating_tail: need 0 < ell_s <= ell_i < +inf");
    PairLaw law;
    law.family = Family::oscillating_tail;
    law.dim = 1;
    law.hazard = std::make_shared<PiecewiseHazard>(ell_s, ell_i);
    law.tail = {ell_s, ell_i};
    law.name = "oscillating_tail(ell_s=" + format_real(ell_s) + ",ell_i=" + format_real(ell_i) + ")";
    return law;
}

// Least-squares tail fit on the top decile of sorted waits: regress
// -ln(empirical survival) on s over sorted positions i with survival
// (n-1-i)/n > 0 inside the decile; slope clamped at 0. Flagged low
// confidence when the decile is short (< 30 points), the fit explains
// little (R^2 < 0.95), or the slope is non-positive.
inline TailSpec estimate_empirical_tail(const std::vector<Sample>& samples, bool& low_confidence) {
    std::vector<double> s;
    s.reserve(samples.size());
    for (const auto& r : samples) s.push_back(r.s);
    std::sort(s.begin(), s.end());
    const std::size_t n = s.size();
    const std::size_t i0 = static_cast<std::size_t>(0.9 * static_cast<double>(n));
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    std::size_t m = 0;
    for (std::size_t i = i0; i + 1 < n; ++i) {
        double surv = static_cast<double>(n - 1 - i) / static_cast<double>(n);
        double y = -std::log(surv);
        sx += s[i]; sy += y; sxx += s[i] * s[i]; sxy += s[i] * y; syy += y * y;
        ++m;
    }
    low_confidence = true;
    if (m < 2) return {0.0, 0.0};
    double dm = static_cast<double>(m);
    double det = dm * sxx - sx * sx;
    if (det <= 0) return {0.0, 0.0};
    double slope = (dm * sxy - sx * sy) / det;
    double intercept = (sy - slope * sx) / dm;
    double ss_tot = syy - sy * sy / dm;
    double ss_res = 0;
    // second pass for residuals
    {
        std::size_t i = i0, k = 0;
        for (; i + 1 < n; ++i, ++k) {
            double surv = static_cast<double>(n - 1 - i) / static_cast<double>(n);
            double y = -std::log(surv);
            double e = y - (intercept + slope * s[i]);
            ss_res += e * e;
        }
    }
    double r2 = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 0.0;
    double ell = std::max(slope, 0.0);
    low_confidence = (m < 30) || (r2 < 0.95) || (slope <= 0);
    return {ell, ell};
}

inline PairLaw make_empirical(std::vector<Sample> samples) {
    require(samples.size() >= 2, "empirical: need at least 2 samples");
    int d = samples.front().x.dim;
    require(d >= 1 && d <= max_dim, "empirical: reward dimension must be 1..3");
    for (const auto& r : samples) {
        require(std::isfinite(r.s) && r.s > 0, "empirical: waits must be finite and > 0");
        require(r.x.dim == d, "empirical: inconsistent reward dimension");
        for (int j = 0; j < d; ++j)
            require(std::isfinite(r.x[j]), "empirical: rewards must be finite");
    }
    PairLaw law;
    law.family = Family::empirical;
    law.dim = d;
    law.tail = estimate_empirical_tail(samples, law.tail_low_confidence);
    law.data = std::make_shared<const std::vector<Sample>>(std::move(samples));
    law.name = "empirical(n=" + std::to_string(law.data->size()) + ")";
    return law;
}

// Rows "s,x1[,x2[,x3]]"; an optional first line whose first field is not a
// number is treated as a header. Blank lines are skipped.
inline std::vector<Sample> parse_samples_csv(std::istream& in) {
    std::vector<Sample> out;
    std::string line;
    int dim = 0;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string tok;
        while (std::getline(ss, tok, ',')) fields.push_back(tok);
        if (fields.empty()) continue;
        double s;
        if (!parse_real(fields[0], s)) {
            if (out.empty() && lineno == 1) continue; // header
            throw std::invalid_argument("samples csv: bad number on line " + std::to_string(lineno));
        }
        if (fields.size() < 2 || fields.size() > 1 + max_dim)
            throw std::invalid_argument("samples csv: expected 2..4 fields on line " + std::to_string(lineno));
        Sample r;
        r.s = s;
        r.x.dim = static_cast<int>(fields.size()) - 1;
        for (int j = 0; j < r.x.dim; ++j) {
            if (!parse_real(fields[static_cast<std::size_t>(j) + 1], r.x[j]))
                throw std::invalid_argument("samples csv: bad number on line " + std::to_string(lineno));
        }
        if (dim == 0) dim = r.x.dim;
        else if (dim != r.x.dim)
            throw std::invalid_argument("samples csv: inconsistent field count on line " + std::to_string(lineno));
        out.push_back(r);
    }
    return out;
}

// ---------- sampling ----------

inline Sample sample_pair(const PairLaw& law, Stream& stream) {
    Sample r;
    switch (law.family) {
        case Family::exp_unit:
            r.s = stream.exponential(law.lambda);
            r.x = Vec{1.0};
            break;
        case Family::exp_gauss: {
            r.s = stream.exponential(law.lambda);
            Vec z = zeros(law.dim);
            for (int j = 0; j < law.dim; ++j) z[j] = stream.normal();
            r.x = law.gauss_mean + tri_mul(law.gauss_chol, z);
            break;
        }
        case Family::gauss_tail_cauchy:
            r.s = stream.gaussian_tail_wait();
            r.x = Vec{r.s, stream.cauchy()};
            break;
        case Family::reward_of_wait:
            r.s = stream.exponential(law.lambda);
            r.x = Vec{reward_value(law, r.s)};
            break;
        case Family::oscillating_tail:
            // reward = the wait itself, so the tail term can trade a long
            // wait against reward mass and the two mixed rates can differ
            r.s = law.hazard->inverse(stream.exponential(1.0));
            r.x = Vec{r.s};
            break;
        case Family::empirical: {
            // modulo bias is ~ n / 2^64, far below Monte Carlo noise
            std::uint64_t idx = stream.next_u64() % law.data->size();
            r = (*law.data)[idx];
            break;
        }
    }
    return r;
}

// ---------- means ----------

struct LawMean {
    double mean_s = 0;
    Vec mean_x;
    bool x_defined = true; // false when E[X] does not exist (heavy tails)
};

// E[S] and E[S^2] for the gaussian-tail wait, computed as integrals of the
// survival function by 128-node Gauss-Legendre on [0, 8] (the tail beyond 8
// is below exp(-64)).
inline double gauss_tail_mean_s() {
    return gl_integrate([](double s) { return std::exp(-s * s); }, 0.0, 8.0, gl128());
}
inline double gauss_tail_second_moment_s() {
    return gl_integrate([](double s) { return 2.0 * s * std::exp(-s * s); }, 0.0, 8.0, gl128());
}

// E[f(S)] for reward_of_wait. The sqrt reward integrates smoothly in
// u = sqrt(s); log1p is analytic on [0, inf); pow has a mild endpoint
// singularity handled by geometric panels toward 0.
inline double reward_mean(const PairLaw& law) {
    double lam = law.lambda;
    double T = 60.0 / lam; // exp(-lam T) = e^-60
    switch (law.reward) {
        case RewardFn::sqrt_wait:
            return gl_integrate(
                [lam](double u) { return lam * std::exp(-lam * u * u) * u * 2.0 * u; },
                0.0, std::sqrt(T), gl128());
        case RewardFn::log1p_wait: {
            double acc = 0;
            int panels = 6;
            for (int k = 0; k < panels; ++k)
                acc += gl_integrate(
                    [lam](double s) { return lam * std::exp(-lam * s) * std::log1p(s); },
                    T * k / panels, T * (k + 1) / panels, gl128());
            return acc;
        }
        case RewardFn::pow_wait: {
            double acc = 0;
            double hi = T;
            for (int m = 0; m < 30; ++m) {
                double lo = hi / 4.0;
                acc += gl_integrate(
                    [&law, lam](double s) {
                        return lam * std::exp(-lam * s) * law.reward_c * std::pow(s, law.reward_p);
                    },
                    lo, hi, gl128());
                hi = lo;
            }
            return acc;
        }
    }
    return 0;
}

inline LawMean law_mean(const PairLaw& law) {
    LawMean out;
    out.mean_x = zeros(law.dim);
    switch (law.family) {
        case Family::exp_unit:
            out.mean_s = 1.0 / law.lambda;
            out.mean_x = Vec{1.0};
            break;
        case Family::exp_gauss:
            out.mean_s = 1.0 / law.lambda;
            out.mean_x = law.gauss_mean;
            break;
        case Family::gauss_tail_cauchy:
            out.mean_s = gauss_tail_mean_s();
            out.mean_x = Vec{out.mean_s, 0.0};
            out.x_defined = false; // Cauchy coordinate has no mean
            break;
        case Family::reward_of_wait:
            out.mean_s = 1.0 / law.lambda;
            out.mean_x = Vec{reward_mean(law)};
            break;
        case Family::oscillating_tail:
            out.mean_s = law.hazard->mean_wait();
            out.mean_x = Vec{out.mean_s};
            break;
        case Family::empirical: {
            double ss = 0;
            Vec sx = zeros(law.dim);
            for (const auto& r : *law.data) {
                ss += r.s;
                sx += r.x;
            }
            double n = static_cast<double>(law.data->size());
            out.mean_s = ss / n;
            out.mean_x = (1.0 / n) * sx;
            break;
        }
    }
    return out;
}

} // namespace rldp
