#pragma once

// Monte Carlo estimation of renewal-reward event probabilities.
//
// Determinism contract: run j of a batch draws from its own stream
// Stream(substream_seed(batch_seed, j)). Worker threads split the run index
// range into contiguous chunks and only add up per-chunk hit counts, so the
// result is a pure function of (seed, n_runs) — byte-identical for any
// worker count. Multi-t curves derive one batch seed per grid index:
// substream_seed(master_seed, t_index).

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <thread>
#include <vector>

#include "rldp/laws.hpp"
#include "rldp/rng.hpp"
#include "rldp/sets.hpp"
#include "rldp/stats.hpp"
#include "rldp/vec.hpp"

namespace rldp {

struct Trajectory {
    double t = 0;       // horizon
    std::uint64_t n = 0; // renewals completed by t
    Vec w;              // accumulated reward at t (unscaled)
    double t_last = 0;  // arrival time of the last renewal <= t (0 if none)
    double t_next = 0;  // arrival time of the first renewal > t
};

// One path of the renewal-reward process up to time t. `guard` bounds the
// number of steps (a wait distribution mis-specified near 0 would otherwise
// hang the sampler).
inline Trajectory simulate_trajectory(const PairLaw& law, double t, Stream& stream,
                                      std::uint64_t guard = 1000000000ull) {
    if (!(t > 0) || !std::isfinite(t)) throw std::invalid_argument("horizon t must be finite and > 0");
    Trajectory tr;
    tr.t = t;
    tr.w = zeros(law.dim);
    double clock = 0;
    while (true) {
        Sample s = sample_pair(law, stream);
        clock += s.s;
        if (clock > t) {
            tr.t_next = clock;
            return tr;
        }
        tr.w += s.x;
        tr.t_last = clock;
        if (++tr.n >= guard) throw std::runtime_error("simulate_trajectory: step guard exceeded");
    }
}

struct ProbEstimate {
    double p_hat = 0;
    double ci_lo = 0; // two-sided 99% Clopper-Pearson
    double ci_hi = 1;
    std::uint64_t hits = 0;
    std::uint64_t n_runs = 0;
};

namespace detail {

// Split [0, n) into per-worker chunks, sum a per-run 0/1 outcome.
template <class RunFn>
inline std::uint64_t count_hits(std::uint64_t n_runs, int workers, const RunFn& run) {
    if (workers < 1) throw std::invalid_argument("workers must be >= 1");
    if (workers == 1) {
        std::uint64_t h = 0;
        for (std::uint64_t j = 0; j < n_runs; ++j) h += run(j) ? 1 : 0;
        return h;
    }
    std::vector<std::uint64_t> part(static_cast<std::size_t>(workers), 0);
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int k = 0; k < workers; ++k) {
        std::uint64_t lo = n_runs * static_cast<std::uint64_t>(k) / static_cast<std::uint64_t>(workers);
        std::uint64_t hi =
            n_runs * static_cast<std::uint64_t>(k + 1) / static_cast<std::uint64_t>(workers);
        pool.emplace_back([&, k, lo, hi]() {
            std::uint64_t h = 0;
            for (std::uint64_t j = lo; j < hi; ++j) h += run(j) ? 1 : 0;
            part[static_cast<std::size_t>(k)] = h;
        });
    }
    for (auto& th : pool) th.join();
    std::uint64_t total = 0;
    for (int k = 0; k < workers; ++k) total += part[static_cast<std::size_t>(k)];
    return total;
}

inline ProbEstimate finish_estimate(std::uint64_t hits, std::uint64_t n_runs) {
    ProbEstimate e;
    e.hits = hits;
    e.n_runs = n_runs;
    e.p_hat = static_cast<double>(hits) / static_cast<double>(n_runs);
    auto ci = clopper_pearson(hits, n_runs);
    e.ci_lo = ci.lo;
    e.ci_hi = ci.hi;
    return e;
}

} // namespace detail

// P[W_t / t in set], with a 99% Clopper-Pearson interval.
inline ProbEstimate estimate_prob(const PairLaw& law, double t, const SetDescriptor& set,
                                  std::uint64_t n_runs, std::uint64_t seed, int workers = 1,
                                  std::uint64_t guard = 1000000000ull) {
    if (n_runs < 100) throw std::invalid_argument("estimate_prob: n_runs must be >= 100");
    if (set.kind == SetKind::box_product)
        throw std::invalid_argument("estimate_prob: box_product sets describe pair means");
    std::uint64_t hits = detail::count_hits(n_runs, workers, [&](std::uint64_t j) {
        Stream st(substream_seed(seed, j));
        Trajectory tr = simulate_trajectory(law, t, st, guard);
        return set_contains(set, tr.w / t);
    });
    return detail::finish_estimate(hits, n_runs);
}

// P[(T_n / n, W_n / n) in box] over exactly n renewal steps.
inline ProbEstimate estimate_pair_mean_prob(const PairLaw& law, std::uint64_t n_steps,
                                            const SetDescriptor& box, std::uint64_t n_runs,
                                            std::uint64_t seed, int workers = 1) {
    if (n_runs < 100) throw std::invalid_argument("estimate_pair_mean_prob: n_runs must be >= 100");
    if (box.kind != SetKind::box_product)
        throw std::invalid_argument("estimate_pair_mean_prob: set must be a box_product");
    if (n_steps == 0) throw std::invalid_argument("estimate_pair_mean_prob: n_steps must be >= 1");
    std::uint64_t hits = detail::count_hits(n_runs, workers, [&](std::uint64_t j) {
        Stream st(substream_seed(seed, j));
        double ts = 0;
        Vec xs = zeros(law.dim);
        for (std::uint64_t i = 0; i < n_steps; ++i) {
            Sample s = sample_pair(law, st);
            ts += s.s;
            xs += s.x;
        }
        double dn = static_cast<double>(n_steps);
        return pair_contains(box, ts / dn, xs / dn);
    });
    return detail::finish_estimate(hits, n_runs);
}

struct RatePoint {
    double t = 0;
    ProbEstimate est;
    double rate = 0;    // -ln(p_hat) / t, defined only when hits > 0
    bool has_rate = false;
    double rate_lo = 0; // -ln(ci_hi) / t, always defined (ci_hi > 0)
    double rate_hi = 0; // -ln(ci_lo) / t, defined only when ci_lo > 0
    bool has_rate_hi = false;
};

// Empirical decay-rate curve over a horizon grid. Batch seed for grid index
// i is substream_seed(seed, i); see the determinism contract above.
inline std::vector<RatePoint> empirical_rate_curve(const PairLaw& law, const SetDescriptor& set,
                                                   const std::vector<double>& t_grid,
                                                   std::uint64_t n_runs, std::uint64_t seed,
                                                   int workers = 1,
                                                   std::uint64_t guard = 1000000000ull) {
    std::vector<RatePoint> out;
    out.reserve(t_grid.size());
    for (std::size_t i = 0; i < t_grid.size(); ++i) {
        RatePoint rp;
        rp.t = t_grid[i];
        rp.est = estimate_prob(law, t_grid[i], set, n_runs, substream_seed(seed, i), workers, guard);
        if (rp.est.hits > 0) {
            rp.rate = -std::log(rp.est.p_hat) / rp.t;
            rp.has_rate = true;
        }
        rp.rate_lo = -std::log(rp.est.ci_hi) / rp.t;
        if (rp.est.ci_lo > 0) {
            rp.rate_hi = -std::log(rp.est.ci_lo) / rp.t;
            rp.has_rate_hi = true;
        }
        out.push_back(rp);
    }
    return out;
}

} // namespace rldp
