#pragma once

// Joint cumulant generating function of one renewal step,
//   Lambda(zeta, phi) = ln E[ exp(zeta * S + phi . X) ],
// evaluated per family with gradient (the tilted mean of (S, X)) and Hessian
// (the tilted covariance). Values live in (-inf, +inf]; +inf marks points
// outside the effective domain.
//
// Coordinates that *must* stay at zero for finiteness (a reward coordinate
// with a heavy two-sided tail) are reported through `pinned`: the value and
// derivatives describe the slice {phi_j = 0}, and callers must not move or
// match those coordinates.
//
// Quadrature families (gauss_tail_cauchy, reward_of_wait) evaluate all
// moment integrals in one log-shifted pass over a window that captures the
// integrand peak to ~e^-60, so huge tilts neither overflow nor lose the
// gradient/Hessian consistency.

#include <algorithm>
#include <cassert>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "rldp/laws.hpp"
#include "rldp/quadrature.hpp"
#include "rldp/vec.hpp"

namespace rldp {

struct DualPoint {
    double zeta = 0;
    Vec phi; // phi.dim == law.dim
};

struct CgfValue {
    double value = inf;
    bool finite = false;

    bool has_grad = false;
    double dzeta = 0;
    Vec dphi;

    bool pinned[max_dim] = {false, false, false};

    bool has_hess = false;
    double hess[16] = {0}; // row-major, stride 4, order (zeta, phi_1..phi_d)

    double se = 0; // statistical uncertainty of `value` (empirical laws)
    bool has_se = false;
    bool unreliable = false; // empirical estimate dominated by few samples
};

inline double& hess_at(CgfValue& v, int i, int j) { return v.hess[i * 4 + j]; }
inline double hess_at(const CgfValue& v, int i, int j) { return v.hess[i * 4 + j]; }

namespace detail {

// Moments of the gaussian-tail wait under tilt theta:
// E[e^{theta S}], tilted mean and second moment, via one shifted pass.
// Density 2 s e^{-s^2}; peak of the full integrand at the positive root of
// 2 s^2 - theta s - 1 = 0.
struct TiltMoments {
    double ln_m0, mean, second;
};

inline TiltMoments gauss_tail_tilt(double theta) {
    double speak = (theta + std::sqrt(theta * theta + 8.0)) / 4.0;
    double lo, hi;
    if (theta >= -10.0) {
        lo = std::max(0.0, speak - 10.0);
        hi = speak + 10.0;
    } else {
        lo = 0.0;
        hi = 50.0 / (-theta) + 1.0;
    }
    std::vector<std::function<double(double)>> w = {
        [](double s) { return 2.0 * s; },
        [](double s) { return 2.0 * s * s; },
        [](double s) { return 2.0 * s * s * s; },
    };
    auto m = shifted_moments([theta](double s) { return theta * s - s * s; }, w, lo, hi, 4);
    TiltMoments out;
    out.ln_m0 = m.log_scale + std::log(m.vals[0]);
    out.mean = m.vals[1] / m.vals[0];
    out.second = m.vals[2] / m.vals[0];
    return out;
}

// Tilted moments for reward_of_wait: with L = lambda - zeta > 0 and tilt
// phi on the reward f, returns ln integral e^{-L s + phi f(s)} ds plus the
// tilted first/second moments of (s, f(s)). Windows are chosen so the
// dropped tail is below e^-60 relative to the peak; the sqrt reward is
// integrated in u = sqrt(s) (smooth), pow uses geometric panels toward 0
// (endpoint derivative singularity), log1p is analytic on the half line.
struct RewardMoments {
    double ln_m0;
    double ms, mf, mss, msf, mff; // tilted moments of s, f, s^2, s f, f^2
};

inline RewardMoments accumulate_reward_moments(
    const std::function<double(double)>& exponent,
    const std::function<double(double)>& fval,
    const std::function<double(double)>& jac, // extra weight (substitution)
    const std::function<double(double)>& svar, // s as a function of the variable
    const std::vector<std::pair<double, double>>& windows, int panels) {
    // single shift across all windows: collect per-window raw results and
    // combine with the global max exponent
    struct Piece {
        ShiftedMoments m;
    };
    std::vector<std::function<double(double)>> w = {
        [&](double u) { return jac(u); },
        [&](double u) { return jac(u) * svar(u); },
        [&](double u) { return jac(u) * fval(u); },
        [&](double u) { return jac(u) * svar(u) * svar(u); },
        [&](double u) { return jac(u) * svar(u) * fval(u); },
        [&](double u) { return jac(u) * fval(u) * fval(u); },
    };
    std::vector<Piece> pieces;
    double shift = -inf;
    for (auto [a, b] : windows) {
        if (!(b > a)) continue;
        pieces.push_back({shifted_moments(exponent, w, a, b, panels)});
        shift = std::max(shift, pieces.back().m.log_scale);
    }
    double acc[6] = {0, 0, 0, 0, 0, 0};
    for (const auto& p : pieces) {
        double f = std::exp(p.m.log_scale - shift);
        for (int j = 0; j < 6; ++j) acc[j] += f * p.m.vals[j];
    }
    RewardMoments out;
    out.ln_m0 = shift + std::log(acc[0]);
    out.ms = acc[1] / acc[0];
    out.mf = acc[2] / acc[0];
    out.mss = acc[3] / acc[0];
    out.msf = acc[4] / acc[0];
    out.mff = acc[5] / acc[0];
    return out;
}

inline RewardMoments reward_tilt(const PairLaw& law, double zeta, double phi) {
    double L = law.lambda - zeta; // > 0, checked by caller
    switch (law.reward) {
        case RewardFn::sqrt_wait: {
            // s = u^2, f = u, ds = 2u du
            double upeak = std::max(0.0, phi / (2.0 * L));
            double width = 12.0 / std::sqrt(2.0 * L) + 2.0;
            double lo = std::max(0.0, upeak - width), hi = upeak + width;
            return accumulate_reward_moments(
                [L, phi](double u) { return -L * u * u + phi * u; },
                [](double u) { return u; },
                [](double u) { return 2.0 * u; },
                [](double u) { return u * u; },
                {{lo, hi}}, 4);
        }
        case RewardFn::log1p_wait: {
            double speak = std::max(0.0, phi / L - 1.0);
            double send = phi > 0
                              ? (2.0 * speak + 1.0) + (120.0 + 1.4 * phi) / L
                              : 60.0 / L;
            return accumulate_reward_moments(
                [L, phi](double s) { return -L * s + phi * std::log1p(s); },
                [](double s) { return std::log1p(s); },
                [](double) { return 1.0; },
                [](double s) { return s; },
                {{0.0, send}}, 8);
        }
        case RewardFn::pow_wait: {
            double c = law.reward_c, p = law.reward_p;
            double speak = phi > 0 ? std::pow(phi * c * p / L, 1.0 / (1.0 - p)) : 0.0;
            double send = 2.0 * speak + 60.0 / (L * (1.0 - std::pow(2.0, p - 1.0))) + 1.0;
            // geometric panels toward 0 resolve the s^p endpoint
            std::vector<std::pair<double, double>> wins;
            double hi = send;
            for (int m = 0; m < 28; ++m) {
                double lo = hi / 4.0;
                wins.push_back({lo, hi});
                hi = lo;
            }
            wins.push_back({0.0, hi});
            return accumulate_reward_moments(
                [L, phi, c, p](double s) { return -L * s + phi * c * std::pow(s, p); },
                [c, p](double s) { return c * std::pow(s, p); },
                [](double) { return 1.0; },
                [](double s) { return s; },
                wins, 1);
        }
    }
    throw std::logic_error("unreachable reward kind");
}

} // namespace detail

inline CgfValue cgf_empirical(const std::vector<Sample>& samples, const DualPoint& p) {
    if (samples.size() < 100)
        throw std::invalid_argument("empirical cgf requires at least 100 samples");
    const int d = samples.front().x.dim;
    CgfValue out;
    out.dphi = zeros(d);
    double shift = -inf;
    for (const auto& r : samples) shift = std::max(shift, p.zeta * r.s + dot(p.phi, r.x));
    double W = 0, W2 = 0, wmax = 0;
    double m1[4] = {0, 0, 0, 0};
    double m2[16] = {0};
    for (const auto& r : samples) {
        double y = p.zeta * r.s + dot(p.phi, r.x);
        double w = std::exp(y - shift);
        W += w;
        W2 += w * w;
        wmax = std::max(wmax, w);
        double coord[4] = {r.s, 0, 0, 0};
        for (int j = 0; j < d; ++j) coord[1 + j] = r.x[j];
        for (int i = 0; i <= d; ++i) {
            m1[i] += w * coord[i];
            for (int j = 0; j <= d; ++j) m2[i * 4 + j] += w * coord[i] * coord[j];
        }
    }
    double n = static_cast<double>(samples.size());
    out.value = shift + std::log(W / n);
    out.finite = true;
    out.has_grad = true;
    out.dzeta = m1[0] / W;
    for (int j = 0; j < d; ++j) out.dphi[j] = m1[1 + j] / W;
    out.has_hess = true;
    for (int i = 0; i <= d; ++i)
        for (int j = 0; j <= d; ++j)
            out.hess[i * 4 + j] = m2[i * 4 + j] / W - (m1[i] / W) * (m1[j] / W);
    out.has_se = true;
    out.se = std::sqrt(std::max(0.0, W2 / (W * W) - 1.0 / n));
    out.unreliable = (wmax / W) > 0.5;
    return out;
}

inline CgfValue cgf_eval(const PairLaw& law, const DualPoint& p) {
    assert(p.phi.dim == law.dim);
    CgfValue out;
    out.dphi = zeros(law.dim);
    switch (law.family) {
        case Family::exp_unit: {
            if (p.zeta >= law.lambda) return out;
            double lz = law.lambda - p.zeta;
            out.value = p.phi[0] - std::log1p(-p.zeta / law.lambda);
            out.finite = true;
            out.has_grad = true;
            out.dzeta = 1.0 / lz;
            out.dphi[0] = 1.0;
            out.has_hess = true;
            hess_at(out, 0, 0) = 1.0 / (lz * lz);
            return out;
        }
        case Family::exp_gauss: {
            if (p.zeta >= law.lambda) return out;
            double lz = law.lambda - p.zeta;
            int d = law.dim;
            Vec sp = zeros(d); // Sigma * phi
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j) sp[i] += law.gauss_cov[i * d + j] * p.phi[j];
            out.value = dot(p.phi, law.gauss_mean) + 0.5 * dot(p.phi, sp) -
                        std::log1p(-p.zeta / law.lambda);
            out.finite = true;
            out.has_grad = true;
            out.dzeta = 1.0 / lz;
            out.dphi = law.gauss_mean + sp;
            out.has_hess = true;
            hess_at(out, 0, 0) = 1.0 / (lz * lz);
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j) hess_at(out, 1 + i, 1 + j) = law.gauss_cov[i * d + j];
            return out;
        }
        case Family::gauss_tail_cauchy: {
            out.pinned[1] = true; // Cauchy reward coordinate: finite only at 0
            if (p.phi[1] != 0.0) return out;
            auto tm = detail::gauss_tail_tilt(p.zeta + p.phi[0]);
            out.value = tm.ln_m0;
            out.finite = true;
            out.has_grad = true;
            out.dzeta = tm.mean;
            out.dphi[0] = tm.mean;
            out.has_hess = true;
            double v = tm.second - tm.mean * tm.mean;
            hess_at(out, 0, 0) = v;
            hess_at(out, 0, 1) = v;
            hess_at(out, 1, 0) = v;
            hess_at(out, 1, 1) = v;
            return out;
        }
        case Family::reward_of_wait: {
            // domain restricted to zeta < lambda (the zeta = lambda face with
            // strongly negative phi is not probed; the optimizer treats it as
            // a boundary and reports accordingly)
            if (p.zeta >= law.lambda) return out;
            auto rm = detail::reward_tilt(law, p.zeta, p.phi[0]);
            out.value = std::log(law.lambda) + rm.ln_m0;
            out.finite = true;
            out.has_grad = true;
            out.dzeta = rm.ms;
            out.dphi[0] = rm.mf;
            out.has_hess = true;
            hess_at(out, 0, 0) = rm.mss - rm.ms * rm.ms;
            hess_at(out, 0, 1) = rm.msf - rm.ms * rm.mf;
            hess_at(out, 1, 0) = hess_at(out, 0, 1);
            hess_at(out, 1, 1) = rm.mff - rm.mf * rm.mf;
            return out;
        }
        case Family::oscillating_tail: {
            // X = S, so both coordinates tilt the same wait: a joint tilt
            // theta = zeta + phi drives everything.
            double theta = p.zeta + p.phi[0];
            auto tm = law.hazard->tilted_moments(theta);
            if (!tm.finite) return out;
            out.value = tm.ln_m0;
            out.finite = true;
            out.has_grad = true;
            out.dzeta = tm.mean;
            out.dphi[0] = tm.mean;
            out.has_hess = true;
            double var = tm.second - tm.mean * tm.mean;
            hess_at(out, 0, 0) = var;
            hess_at(out, 0, 1) = var;
            hess_at(out, 1, 0) = var;
            hess_at(out, 1, 1) = var;
            return out;
        }
        case Family::empirical:
            return cgf_empirical(*law.data, p);
    }
    return out;
}

// Largest certified-finite radius of Lambda along the ray r * dir from the
// origin, by bisection on finiteness; +inf when still finite at r = 1e6.
// The domain is convex and contains 0, so finiteness is an interval in r.
inline double cgf_domain_probe(const PairLaw& law, const DualPoint& dir) {
    double scale = std::sqrt(dir.zeta * dir.zeta + norm2(dir.phi));
    if (!(scale > 0)) throw std::invalid_argument("domain probe needs a nonzero direction");
    auto at = [&](double r) {
        DualPoint p{r * dir.zeta, r * dir.phi};
        return cgf_eval(law, p).finite;
    };
    double hi = 1e6;
    if (at(hi)) return inf;
    double lo = 0.0;
    for (int it = 0; it < 200 && hi - lo > 1e-14 * (1.0 + lo); ++it) {
        double mid = 0.5 * (lo + hi);
        (at(mid) ? lo : hi) = mid;
    }
    return lo;
}

} // namespace rldp
