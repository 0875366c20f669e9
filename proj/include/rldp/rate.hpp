#pragma once

// Rate functions of the renewal-reward pair:
//
//   cramer_j(s, w)    J(s, w) = sup_{zeta, phi} { s zeta + w . phi - Lambda }
//   upsilon(beta, w)  perspective value: inf_{gamma > 0} gamma J(beta/gamma,
//                     w/gamma), extended to beta = 0 as a monitored limit and
//                     to the exact values at beta < 0 (+inf) and (0, 0) (0)
//   rate_lower /      I(w) = inf_{beta in (0, 1]} { upsilon(beta, w)
//   rate_upper        + (1 - beta) ell }, with ell the tail exponent of the
//                     bound direction; equals upsilon(1, w) when ell = +inf
//   rate_inf_over_set infimum of the chosen rate over an event set
//
// Numerical contract. The dual maximization runs over a trust box
// |coordinate| <= R (default 1e3). A sup that presses against the box is
// retested with the box doubled: growth by more than 0.1 * (1 + |value|)
// certifies divergence (+inf); agreement within 1e-9 certifies a stable
// value (kink minima of the perspective land here); anything else is
// reported as a finite lower bound with converged = false. Because the
// boxed dual value is a sup of affine functions of (s, w), it stays convex,
// so the one-dimensional gamma and beta searches below remain sound on the
// surrogate as well as on the exact function.

#include <algorithm>
#include <cassert>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "rldp/cgf.hpp"
#include "rldp/laws.hpp"
#include "rldp/optimize.hpp"
#include "rldp/sets.hpp"

namespace rldp {

struct RateOptions {
    double box_radius = 1e3;    // dual trust box R
    double gamma_xatol = 1e-12; // ln(gamma) bracket width
    double beta_xatol = 1e-10;  // ln(beta) bracket width
    double probe_delta = 1e-3;  // envelope probe ball radius
    bool envelope_probes = true; // spot-check neighbors of non-clean minima
};

struct RateValue {
    double value = inf;
    bool converged = false; // value certified (exact modulo stated tolerances)

    bool has_dual = false;
    DualPoint argmax_dual;

    bool has_gamma = false;
    double argmin_gamma = 0;

    bool has_beta = false;
    double argmin_beta = 0;

    int evals = 0; // CGF evaluations consumed

    bool divergence_certified = false; // +inf via trust-box growth or exact case
    bool envelope_suspect = false;     // nearby values markedly lower than here
    bool envelope_estimate = false;    // beta = 0 monitored limit, not certified
    MaxStatus inner_status = MaxStatus::stalled;

    // Largest-box finite surrogate kept alongside a +inf value. It lower
    // bounds the true value and grows with the trust radius, so searches
    // that need a descent direction through an infinite region can follow
    // it; it is never a certified value.
    double finite_hint = inf;
};

namespace detail {

struct BoxedDual {
    double value = 0; // sup over the box; finite unless s <= 0
    ConcaveMaxResult raw;
};

// sup of s zeta + w . phi - Lambda over the box; s > 0 required here.
// An optional start point (typically the argmax from a smaller box) primes
// the ascent so radius escalations do not redo the climb from the origin.
inline BoxedDual boxed_dual(const PairLaw& law, double s, const Vec& w, double R,
                            const DualPoint* start = nullptr) {
    ConcaveMaxOptions o;
    o.box_radius = R;
    if (start) {
        o.has_start = true;
        o.start = *start;
    }
    BoxedDual out;
    out.raw = concave_max([&law](const DualPoint& p) { return cgf_eval(law, p); }, s, w, o);
    out.value = out.raw.value;
    return out;
}

} // namespace detail

// J(s, w). Exact +inf for s <= 0: every law here has S > 0 almost surely,
// so ln E[e^{zeta S}] -> -inf as zeta -> -inf and the dual objective grows
// without bound in that direction.
inline RateValue cramer_j(const PairLaw& law, double s, const Vec& w,
                          const RateOptions& opts = {}) {
    assert(w.dim == law.dim);
    RateValue rv;
    if (s <= 0.0) {
        rv.value = inf;
        rv.converged = true;
        rv.divergence_certified = true;
        return rv;
    }
    // Escalating trust boxes R, 2R, 4R. The boxed sup is nondecreasing in
    // the radius, so saturation (successive values agreeing) certifies the
    // finite sup, while sustained growth - the increment from 2R -> 4R
    // keeping pace with the one from R -> 2R, as happens exactly when the
    // objective rides an unbounded ascent direction - certifies +inf. A
    // boundary-pinned sup that is still creeping without clear growth is
    // reported unconverged rather than guessed.
    auto b1 = detail::boxed_dual(law, s, w, opts.box_radius);
    rv.evals = b1.raw.evals;
    rv.inner_status = b1.raw.status;
    if (b1.raw.status == MaxStatus::interior) {
        rv.value = b1.value;
        rv.converged = true;
        rv.has_dual = true;
        rv.argmax_dual = b1.raw.arg;
        return rv;
    }
    auto b2 = detail::boxed_dual(law, s, w, 2.0 * opts.box_radius, &b1.raw.arg);
    rv.evals += b2.raw.evals;
    rv.inner_status = b2.raw.status;
    if (b2.raw.status == MaxStatus::interior ||
        std::fabs(b2.value - b1.value) <= 1e-8 * (1.0 + std::fabs(b2.value))) {
        rv.value = b2.value;
        rv.converged = true;
        rv.has_dual = true;
        rv.argmax_dual = b2.raw.arg;
        return rv;
    }
    auto b4 = detail::boxed_dual(law, s, w, 4.0 * opts.box_radius, &b2.raw.arg);
    rv.evals += b4.raw.evals;
    rv.inner_status = b4.raw.status;
    if (b4.raw.status == MaxStatus::interior ||
        std::fabs(b4.value - b2.value) <= 1e-8 * (1.0 + std::fabs(b4.value))) {
        rv.value = b4.value;
        rv.converged = true;
        rv.has_dual = true;
        rv.argmax_dual = b4.raw.arg;
        return rv;
    }
    double d21 = b2.value - b1.value;
    double d42 = b4.value - b2.value;
    if (d21 >= 3e-8 * (1.0 + std::fabs(b2.value)) && d42 >= 0.45 * d21) {
        rv.value = inf;
        rv.converged = true;
        rv.divergence_certified = true;
        rv.finite_hint = b4.value;
        return rv;
    }
    rv.value = b4.value;
    rv.has_dual = true;
    rv.argmax_dual = b4.raw.arg;
    rv.converged = false;
    return rv;
}

namespace detail {

// One full gamma-minimization of gamma * J_box(beta/gamma, w/gamma) at a
// fixed box radius. Returns the scalar search result plus the boxed dual at
// the winning gamma.
struct GammaMin {
    ScalarMinResult sm;
    double gamma = 1;
    BoxedDual at_min;
    int evals = 0;
};

inline GammaMin gamma_minimize(const PairLaw& law, double beta, const Vec& w, double R,
                               double xatol, int max_evals = 220) {
    assert(beta > 0);
    GammaMin out;
    // Interior argmaxes from earlier gamma evaluations prime later ones:
    // the dual argmax drifts continuously in gamma, so the previous winner
    // is a far better opening point than the origin.
    DualPoint warm;
    bool has_warm = false;
    auto g = [&](double u) {
        if (std::fabs(u) > 700.0) return inf; // exp(u) would over/underflow
        double gamma = std::exp(u);
        auto b = boxed_dual(law, beta / gamma, w / gamma, R, has_warm ? &warm : nullptr);
        out.evals += b.raw.evals;
        if (b.raw.status == MaxStatus::interior) {
            warm = b.raw.arg;
            has_warm = true;
        }
        return gamma * b.value;
    };
    ScalarMinOptions so;
    so.step0 = 0.7;
    so.xatol = xatol;
    so.max_evals = max_evals;
    out.sm = minimize_scalar(g, std::log(beta), so);
    // Kink snap: when the transform is finite only on a lower-dimensional
    // slice, the scan rides a V-shaped surrogate whose kink carries the
    // exact value, and the kink gamma is typically a reward coordinate (or
    // beta itself). A scalar search lands near the kink but never on it;
    // trying those gammas exactly removes the landing error.
    double cand[2] = {w.dim >= 1 ? w[0] : 0.0, beta};
    for (double gc : cand) {
        if (!(gc > 0.0)) continue;
        double uc = std::log(gc);
        if (std::fabs(uc) > 700.0) continue;
        double fc = g(uc);
        if (fc < out.sm.fx) {
            out.sm.fx = fc;
            out.sm.x = uc;
        }
    }
    out.gamma = std::exp(out.sm.x);
    out.at_min = boxed_dual(law, beta / out.gamma, w / out.gamma, R, has_warm ? &warm : nullptr);
    out.evals += out.at_min.raw.evals;
    return out;
}

} // namespace detail

// Perspective value at beta > 0 with full certification and an envelope
// probe: when the minimum is not interior-clean, nearby reward points
// w +- delta e_j (and beta +- delta) are spot-checked; a markedly lower
// neighbor sets envelope_suspect.
inline RateValue perspective_min(const PairLaw& law, double beta, const Vec& w,
                                 const RateOptions& opts = {}) {
    assert(beta > 0);
    RateValue rv;
    double R = opts.box_radius;
    auto g1 = detail::gamma_minimize(law, beta, w, R, opts.gamma_xatol);
    rv.evals += g1.evals;
    rv.inner_status = g1.at_min.raw.status;

    bool interior_clean = g1.at_min.raw.status == MaxStatus::interior && g1.sm.bracket_ok;
    if (interior_clean) {
        rv.value = g1.sm.fx;
        rv.converged = true;
        rv.has_dual = true;
        rv.argmax_dual = g1.at_min.raw.arg;
        rv.has_gamma = true;
        rv.argmin_gamma = g1.gamma;
        return rv;
    }

    // Escalating trust boxes, same certification rule as the plain dual:
    // the scan minimum is nondecreasing in the radius, so agreement across
    // a doubling certifies the finite value, while growth that keeps pace
    // across two doublings certifies +inf (the scan is then riding finite
    // box surrogates of an everywhere-infinite integrand).
    rv.has_gamma = true;
    auto g2 = detail::gamma_minimize(law, beta, w, 2.0 * R, opts.gamma_xatol);
    rv.evals += g2.evals;
    rv.inner_status = g2.at_min.raw.status;

    bool clean2 = g2.at_min.raw.status == MaxStatus::interior && g2.sm.bracket_ok;
    bool agree21 = std::fabs(g2.sm.fx - g1.sm.fx) <= 1e-8 * (1.0 + std::fabs(g2.sm.fx));
    if (clean2 || agree21) {
        rv.value = g2.sm.fx;
        rv.argmin_gamma = g2.gamma;
        rv.has_dual = true;
        rv.argmax_dual = g2.at_min.raw.arg;
        rv.converged = true;
    } else {
        auto g4 = detail::gamma_minimize(law, beta, w, 4.0 * R, opts.gamma_xatol);
        rv.evals += g4.evals;
        rv.inner_status = g4.at_min.raw.status;
        bool clean4 = g4.at_min.raw.status == MaxStatus::interior && g4.sm.bracket_ok;
        bool agree42 = std::fabs(g4.sm.fx - g2.sm.fx) <= 1e-8 * (1.0 + std::fabs(g4.sm.fx));
        if (clean4 || agree42) {
            rv.value = g4.sm.fx;
            rv.argmin_gamma = g4.gamma;
            rv.has_dual = true;
            rv.argmax_dual = g4.at_min.raw.arg;
            rv.converged = true;
        } else {
            double d21 = g2.sm.fx - g1.sm.fx;
            double d42 = g4.sm.fx - g2.sm.fx;
            if (d21 >= 3e-8 * (1.0 + std::fabs(g2.sm.fx)) && d42 >= 0.45 * d21) {
                rv.value = inf;
                rv.converged = true;
                rv.divergence_certified = true;
                rv.argmin_gamma = g1.gamma;
                rv.finite_hint = g4.sm.fx;
                // neighbors would be compared against finite surrogates,
                // not against +inf, so the envelope probe is meaningless
                // here; skip it.
                return rv;
            }
            rv.value = g4.sm.fx;
            rv.argmin_gamma = g4.gamma;
            rv.has_dual = true;
            rv.argmax_dual = g4.at_min.raw.arg;
            rv.converged = false;
        }
    }

    // envelope probe around (beta, w)
    if (!opts.envelope_probes) return rv;
    double delta = opts.probe_delta;
    double here = is_finite(rv.value) ? rv.value : 1e100;
    auto probe = [&](double b, const Vec& ww) {
        if (!(b > 0)) return;
        auto gp = detail::gamma_minimize(law, b, ww, R, 1e-9, 140);
        rv.evals += gp.evals;
        if (gp.sm.fx < here - 1e-3) rv.envelope_suspect = true;
    };
    for (int j = 0; j < w.dim && !rv.envelope_suspect; ++j) {
        Vec wp = w;
        wp[j] += delta;
        probe(beta, wp);
        wp[j] -= 2 * delta;
        probe(beta, wp);
    }
    if (!rv.envelope_suspect) probe(beta + delta, w);
    if (!rv.envelope_suspect) probe(beta - delta, w);
    return rv;
}

// Upsilon(beta, w) on the full closed domain.
inline RateValue upsilon(const PairLaw& law, double beta, const Vec& w,
                         const RateOptions& opts = {}) {
    RateValue rv;
    if (beta < 0) { // empty feasible region: +inf exactly
        rv.value = inf;
        rv.converged = true;
        rv.divergence_certified = true;
        return rv;
    }
    if (beta == 0) {
        bool zero = true;
        for (int j = 0; j < w.dim; ++j) zero = zero && w[j] == 0.0;
        if (zero) { // the origin of the perspective: value 0 exactly
            rv.value = 0;
            rv.converged = true;
            return rv;
        }
        // monitored limit along beta_k -> 0 with w fixed. This is an upper
        // path-limit of the lower-semicontinuous envelope; it can overshoot
        // the envelope at heavy-tail degeneracies, hence the estimate flag.
        rv.envelope_estimate = true;
        RateOptions quiet = opts;
        quiet.envelope_probes = false;
        double prev = inf;
        int stable = 0, rising = 0;
        for (int k = 1; k <= 40; ++k) {
            double b = std::pow(2.0, -k);
            auto pv = perspective_min(law, b, w, quiet);
            rv.evals += pv.evals;
            double v = pv.value;
            if (is_finite(v) && is_finite(prev) &&
                std::fabs(v - prev) <= 1e-4 * (1.0 + std::fabs(v))) {
                if (++stable >= 2) {
                    rv.value = v;
                    return rv;
                }
            } else {
                stable = 0;
            }
            if (is_finite(prev) ? (v > prev && v > 1e4) : v > 1e4) ++rising;
            else rising = 0;
            if (rising >= 3 || (!is_finite(v) && k >= 3)) {
                rv.value = inf;
                return rv;
            }
            prev = v;
            rv.value = v;
        }
        return rv;
    }
    return perspective_min(law, beta, w, opts);
}

enum class BoundSide { lower, upper };

// Tail-mixed rate: inf over beta in (0, 1] of upsilon(beta, w) +
// (1 - beta) * ell, plus the exact beta = 0 endpoint when w = 0 (upsilon
// vanishes at the origin, leaving ell itself). ell = +inf collapses to
// upsilon(1, w).
inline RateValue rate_mixed(const PairLaw& law, const Vec& w, BoundSide side,
                            const RateOptions& opts = {}) {
    assert(w.dim == law.dim);
    double ell = side == BoundSide::lower ? law.tail.ell_i : law.tail.ell_s;
    if (std::isinf(ell)) {
        RateValue rv = upsilon(law, 1.0, w, opts);
        rv.has_beta = true;
        rv.argmin_beta = 1.0;
        return rv;
    }

    RateValue best;
    best.value = inf;
    int total_evals = 0;
    auto consider = [&](double beta, const RateValue& pv, double hval) -> bool {
        if (hval < best.value || !best.has_beta) {
            best = pv;
            best.value = hval;
            best.has_beta = true;
            best.argmin_beta = beta;
            return true;
        }
        return false;
    };
    RateOptions quiet = opts;
    quiet.envelope_probes = false;

    // explicit endpoint beta = 1
    auto at1 = perspective_min(law, 1.0, w, opts);
    total_evals += at1.evals;
    consider(1.0, at1, at1.value);

    // Convexity shortcut: the objective beta -> upsilon(beta, w) +
    // (1 - beta) ell is convex on (0, 1] (perspective of a convex function
    // plus an affine term), so a nonpositive slope into the right endpoint
    // pins the minimum at beta = 1 and the interior search can be skipped.
    // The slope test resolves slopes down to tol / delta = 1e-5 in scale;
    // flatter objectives than that could hide an interior dip of at most
    // that same magnitude.
    bool skip_search = false;
    if (at1.converged && is_finite(at1.value)) {
        double delta = 1e-4;
        auto nb = perspective_min(law, 1.0 - delta, w, quiet);
        total_evals += nb.evals;
        if (nb.converged && is_finite(nb.value)) {
            double h1 = at1.value;
            double hn = nb.value + delta * ell;
            if (h1 <= hn + 1e-9 * (1.0 + std::fabs(h1))) skip_search = true;
        }
    }

    if (!skip_search) {
        // Snap candidate: laws whose reward is a deterministic image of the
        // wait keep the objective finite only on a measure-zero beta set
        // (e.g. beta equal to a reward coordinate), which a scalar search
        // cannot hit exactly. Trying the first reward coordinate itself
        // costs one evaluation and is harmless when the objective is finite
        // everywhere.
        bool snap_hit = false;
        double snap_beta = 0;
        if (w.dim >= 1 && w[0] > 0.0 && w[0] < 1.0) {
            auto ps = perspective_min(law, w[0], w, opts);
            total_evals += ps.evals;
            snap_beta = w[0];
            if (consider(snap_beta, ps, xadd(ps.value, (1.0 - snap_beta) * ell)))
                snap_hit = ps.converged && is_finite(ps.value);
        }

        // Pinch test: with the beta = 1 endpoint certified infinite and the
        // snap candidate finite, certify two straddling betas. If both are
        // infinite too, convexity confines the finite domain to the pinch
        // interval around the snap, and since the perspective part is
        // nonnegative the infimum there undershoots the snap value by at
        // most pinch * ell (here ~1e-6 in scale): the interior search can
        // be skipped.
        bool pinched = false;
        if (snap_hit && at1.divergence_certified) {
            double pinch = 1e-6 * snap_beta;
            auto lo = perspective_min(law, snap_beta - pinch, w, quiet);
            auto hi = perspective_min(law, snap_beta + pinch, w, quiet);
            total_evals += lo.evals + hi.evals;
            pinched = lo.divergence_certified && hi.divergence_certified;
        }

        if (!pinched) {
            // Interior search over u = ln beta in [-40, 0]. Certified-
            // infinite perspective values contribute their largest-box
            // finite surrogate instead of +inf so the search keeps a
            // descent signal through infinite regions; any winner found
            // that way is re-evaluated in full before being believed.
            auto h = [&](double u) {
                if (u > 0.0 || u < -40.0) return inf;
                double beta = std::exp(u);
                auto pv = perspective_min(law, beta, w, quiet);
                total_evals += pv.evals;
                double base = is_finite(pv.value) ? pv.value : pv.finite_hint;
                return xadd(base, (1.0 - beta) * ell);
            };
            ScalarMinOptions so;
            so.step0 = 0.5;
            so.xatol = opts.beta_xatol;
            so.max_evals = 120;
            auto sm = minimize_scalar(h, -0.5, so);
            if (sm.fx < best.value) {
                double beta = std::exp(sm.x);
                auto pv = perspective_min(law, beta, w, opts);
                total_evals += pv.evals;
                if (consider(beta, pv, xadd(pv.value, (1.0 - beta) * ell)))
                    best.converged = best.converged && sm.bracket_ok;
            }
        }
    }

    // beta = 0 endpoint: upsilon(0, 0) = 0 exactly, so h(0) = ell when w = 0
    bool wzero = true;
    for (int j = 0; j < w.dim; ++j) wzero = wzero && w[j] == 0.0;
    if (wzero && ell < best.value) {
        RateValue endpoint;
        endpoint.value = ell;
        endpoint.converged = true;
        endpoint.has_beta = true;
        endpoint.argmin_beta = 0.0;
        best = endpoint;
    }
    best.evals = total_evals;
    return best;
}

inline RateValue rate_lower(const PairLaw& law, const Vec& w, const RateOptions& opts = {}) {
    return rate_mixed(law, w, BoundSide::lower, opts);
}
inline RateValue rate_upper(const PairLaw& law, const Vec& w, const RateOptions& opts = {}) {
    return rate_mixed(law, w, BoundSide::upper, opts);
}

// ---------- infimum over an event set ----------

struct SetInfResult {
    double value = inf;
    Vec argmin;
    bool certified = false;     // stabilized under refinement and certified at argmin
    bool unbounded_hint = false; // minimizer pressed against the search bound
    int evals = 0;
};

namespace detail {

struct SetObjective {
    const PairLaw& law;
    BoundSide side;
    RateOptions quiet; // probe-free during the search; the final point is
                       // re-evaluated with the caller's options
    mutable int evals = 0;
    SetObjective(const PairLaw& l, BoundSide sd, const RateOptions& o)
        : law(l), side(sd), quiet(o) {
        quiet.envelope_probes = false;
    }
    double operator()(const Vec& w) const {
        auto rv = rate_mixed(law, w, side, quiet);
        evals += rv.evals;
        return rv.value;
    }
};

// coordinate refinement at shrinking steps; returns total improvement at the
// last level
inline double coordinate_refine(const std::function<double(const Vec&)>& f,
                                const std::function<Vec(const Vec&)>& prj, Vec& x, double& fx,
                                const std::vector<double>& steps) {
    double last_level_gain = 0;
    for (double h : steps) {
        double gain = 0;
        for (int round = 0; round < 12; ++round) {
            bool improved = false;
            for (int j = 0; j < x.dim; ++j) {
                for (double sgn : {1.0, -1.0}) {
                    Vec t = x;
                    t[j] += sgn * h;
                    t = prj(t);
                    double ft = f(t);
                    if (ft < fx - 1e-15) {
                        gain += fx - ft;
                        x = t;
                        fx = ft;
                        improved = true;
                    }
                }
            }
            if (!improved) break;
        }
        last_level_gain = gain;
    }
    return last_level_gain;
}

inline SetInfResult inf_over_closed_ball(const PairLaw& law, const SetDescriptor& set,
                                         BoundSide side, const RateOptions& opts) {
    SetObjective obj{law, side, opts};
    auto f = [&](const Vec& w) { return obj(w); };
    auto prj = [&](const Vec& w) {
        Vec d = w - set.center;
        double n = norm(d);
        if (n <= set.radius) return w;
        return set.center + (set.radius / n) * d;
    };
    std::vector<Vec> seeds;
    seeds.push_back(set.center);
    for (int j = 0; j < set.dim; ++j) {
        Vec u = set.center;
        u[j] += 0.7 * set.radius;
        seeds.push_back(u);
        u[j] -= 1.4 * set.radius;
        seeds.push_back(u);
    }
    SetInfResult out;
    out.argmin = set.center;
    double best = inf;
    Vec bx = set.center;
    int runs = 0;
    for (const auto& s : seeds) {
        NelderMeadOptions no;
        no.init_scale = 0.3 * set.radius;
        auto r = nelder_mead(f, s, prj, no);
        ++runs;
        if (r.fx < best - 1e-12) {
            best = r.fx;
            bx = r.x;
        } else if (runs >= 2 && is_finite(best)) {
            break; // restarts agree; the mixed rate is convex, stop early
        }
    }
    double gain = coordinate_refine(
        f, prj, bx, best, {set.radius / 8.0, set.radius / 64.0, set.radius / 512.0});
    auto fin = rate_mixed(law, bx, side, opts);
    obj.evals += fin.evals;
    out.value = fin.value;
    out.argmin = bx;
    out.certified = (gain <= 1e-4 * (1.0 + (is_finite(best) ? std::fabs(best) : 0.0))) &&
                    (is_finite(fin.value) ? fin.converged
                                          : fin.divergence_certified);
    out.evals = obj.evals;
    return out;
}

inline SetInfResult inf_over_open_ball(const PairLaw& law, const SetDescriptor& set,
                                       BoundSide side, const RateOptions& opts) {
    // eta-shrink: certified values on closed balls of radius r (1 - eta)
    SetInfResult out;
    double vals[3];
    SetInfResult subs[3];
    const double etas[3] = {1e-2, 1e-3, 1e-4};
    for (int i = 0; i < 3; ++i) {
        SetDescriptor inner = set;
        inner.kind = SetKind::closed_ball;
        inner.radius = set.radius * (1.0 - etas[i]);
        subs[i] = inf_over_closed_ball(law, inner, side, opts);
        vals[i] = subs[i].value;
        out.evals += subs[i].evals;
    }
    out.argmin = subs[2].argmin;
    out.value = vals[2];
    if (!is_finite(vals[0]) && !is_finite(vals[1]) && !is_finite(vals[2])) {
        out.certified = subs[2].certified;
        return out;
    }
    if (is_finite(vals[1]) && is_finite(vals[2]) &&
        std::fabs(vals[1] - vals[2]) <= 1e-4 * (1.0 + std::fabs(vals[2]))) {
        out.certified = subs[2].certified;
        return out;
    }
    out.certified = false; // boundary-sensitive open set
    return out;
}

// orthonormal basis of the complement of n (d - 1 columns)
inline int complement_basis(const Vec& n, Vec* basis) {
    int d = n.dim;
    Vec un = (1.0 / norm(n)) * n;
    int k = 0;
    for (int j = 0; j < d && k < d - 1; ++j) {
        Vec e = unit(d, j);
        Vec v = e - dot(e, un) * un;
        for (int i = 0; i < k; ++i) v = v - dot(v, basis[i]) * basis[i];
        double nv = norm(v);
        if (nv > 1e-8) basis[k++] = (1.0 / nv) * v;
    }
    return k;
}

inline SetInfResult inf_over_half_space(const PairLaw& law, const SetDescriptor& set,
                                        BoundSide side, const RateOptions& opts) {
    SetObjective obj{law, side, opts};
    auto f = [&](const Vec& w) { return obj(w); };
    const double nn = norm(set.normal);
    const double scale = 1.0 + std::fabs(set.offset) / nn;

    // step 1: unconstrained minimum (the mixed rate is convex: a strictly
    // interior minimum is the answer)
    Vec seed = zeros(set.dim);
    auto lm = law_mean(law);
    if (lm.x_defined) seed = lm.mean_x;
    NelderMeadOptions no;
    no.init_scale = 0.5 * scale;
    auto un = nelder_mead(f, seed, nullptr, no);
    SetInfResult out;
    double margin = set.offset - dot(set.normal, un.x);
    if (is_finite(un.fx) && (set.open ? margin > 1e-9 * nn * scale : margin >= 0)) {
        Vec bx = un.x;
        double bf = un.fx;
        double gain = coordinate_refine(f, [&](const Vec& w) { return w; }, bx, bf,
                                        {scale / 16.0, scale / 256.0});
        if (set.open ? dot(set.normal, bx) < set.offset : dot(set.normal, bx) <= set.offset) {
            auto fin = rate_mixed(law, bx, side, opts);
            obj.evals += fin.evals;
            out.value = fin.value;
            out.argmin = bx;
            out.certified = gain <= 1e-4 * (1.0 + std::fabs(bf)) && fin.converged;
            out.evals = obj.evals;
            return out;
        }
    }

    // step 2: restrict to the hyperplane normal . w = offset - eta (eta = 0
    // for the closed case; a shrinking ladder for the open case)
    Vec basis[max_dim];
    int nb = complement_basis(set.normal, basis);
    const double ybound = 1e3 * scale;
    auto solve_on_plane = [&](double off) {
        Vec w0 = (off / (nn * nn)) * set.normal;
        auto fy = [&](const Vec& y) {
            Vec w = w0;
            for (int i = 0; i < nb; ++i) w += y[i] * basis[i];
            return f(w);
        };
        Vec y0 = zeros(std::max(nb, 1));
        Vec by = y0;
        double bf;
        if (nb == 0) {
            bf = f(w0);
        } else {
            auto prjy = [&](const Vec& y) {
                Vec t = y;
                for (int i = 0; i < nb; ++i) t[i] = std::min(ybound, std::max(-ybound, t[i]));
                return t;
            };
            NelderMeadOptions n2;
            n2.init_scale = 0.5 * scale;
            auto r = nelder_mead(fy, y0, prjy, n2);
            by = r.x;
            bf = r.fx;
            coordinate_refine(fy, prjy, by, bf, {scale / 16.0, scale / 256.0, scale / 4096.0});
        }
        Vec w = w0;
        for (int i = 0; i < nb; ++i) w += by[i] * basis[i];
        return std::pair<Vec, double>(w, bf);
    };

    if (!set.open) {
        auto [w, v] = solve_on_plane(set.offset);
        auto fin = rate_mixed(law, w, side, opts);
        obj.evals += fin.evals;
        out.value = fin.value;
        out.argmin = w;
        out.certified = is_finite(fin.value) ? fin.converged : fin.divergence_certified;
        for (int i = 0; i < nb; ++i)
            if (std::fabs(dot(w - (set.offset / (nn * nn)) * set.normal, basis[i])) >=
                ybound * (1 - 1e-9))
                out.unbounded_hint = true;
        out.evals = obj.evals;
        (void)v;
        return out;
    }

    const double etas[3] = {1e-2, 1e-3, 1e-4};
    double vals[3];
    Vec args[3];
    bool cert[3];
    for (int i = 0; i < 3; ++i) {
        auto [w, v] = solve_on_plane(set.offset - etas[i] * nn * scale);
        (void)v;
        auto fin = rate_mixed(law, w, side, opts);
        obj.evals += fin.evals;
        vals[i] = fin.value;
        args[i] = w;
        cert[i] = is_finite(fin.value) ? fin.converged : fin.divergence_certified;
    }
    out.argmin = args[2];
    out.value = vals[2];
    out.evals = obj.evals;
    if (!is_finite(vals[0]) && !is_finite(vals[1]) && !is_finite(vals[2])) {
        out.certified = cert[0] && cert[1] && cert[2];
        return out;
    }
    if (is_finite(vals[1]) && is_finite(vals[2]) &&
        std::fabs(vals[1] - vals[2]) <= 1e-4 * (1.0 + std::fabs(vals[2]))) {
        out.certified = cert[2];
        return out;
    }
    out.certified = false;
    return out;
}

inline SetInfResult inf_over_wedge(const PairLaw& law, const SetDescriptor& set, BoundSide side,
                                   const RateOptions& opts) {
    // parametrize w1 = cap - e^a, w2 = (level / e^a) * e^t with t >= 0
    SetObjective obj{law, side, opts};
    auto point = [&](double a, double t) {
        return Vec{set.cap - std::exp(a), (set.level / std::exp(a)) * std::exp(t)};
    };
    auto f2 = [&](const Vec& at) { return obj(point(at[0], std::max(0.0, at[1]))); };
    double besta = 0, bestt = 0, bestv = inf;
    for (int i = 0; i <= 24; ++i) {
        double a = -14.0 + 18.0 * i / 24.0;
        for (double t : {0.0, 0.7, 1.6}) {
            double v = f2(Vec{a, t});
            if (v < bestv) {
                bestv = v;
                besta = a;
                bestt = t;
            }
        }
    }
    Vec x{besta, bestt};
    double fx = bestv;
    if (is_finite(bestv)) {
        auto prj = [](const Vec& v) { return Vec{v[0], std::max(0.0, v[1])}; };
        auto r = nelder_mead(f2, x, prj);
        if (r.fx < fx) {
            fx = r.fx;
            x = r.x;
        }
        coordinate_refine(f2, prj, x, fx, {0.25, 1.0 / 64.0, 1.0 / 1024.0});
    }
    SetInfResult out;
    Vec w = point(x[0], std::max(0.0, x[1]));
    auto fin = rate_mixed(law, w, side, opts);
    obj.evals += fin.evals;
    out.value = fin.value;
    out.argmin = w;
    out.certified = is_finite(fin.value) ? fin.converged : fin.divergence_certified;
    if (std::fabs(x[0] + 14.0) < 1e-9 || std::fabs(x[0] - 4.0) < 1e-9) out.unbounded_hint = true;
    out.evals = obj.evals;
    return out;
}

} // namespace detail

inline SetInfResult rate_inf_over_set(const PairLaw& law, const SetDescriptor& set,
                                      BoundSide side, const RateOptions& opts = {}) {
    if (set.dim != law.dim)
        throw std::invalid_argument("set dimension does not match the law");
    switch (set.kind) {
        case SetKind::closed_ball: return detail::inf_over_closed_ball(law, set, side, opts);
        case SetKind::open_ball: return detail::inf_over_open_ball(law, set, side, opts);
        case SetKind::half_space: return detail::inf_over_half_space(law, set, side, opts);
        case SetKind::hyperbola_wedge: return detail::inf_over_wedge(law, set, side, opts);
        case SetKind::box_product:
            throw std::invalid_argument("box_product describes pair means, not W_t / t events");
    }
    throw std::logic_error("unreachable set kind");
}

} // namespace rldp
