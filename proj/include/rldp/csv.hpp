#pragma once

// CSV emission for rate-function grids and empirical decay curves.
// All reals are written with 17 significant digits so a reread reproduces
// the exact doubles; infinities appear as "+inf"/"-inf".

#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "rldp/extended.hpp"
#include "rldp/laws.hpp"
#include "rldp/mc.hpp"
#include "rldp/rate.hpp"
#include "rldp/vec.hpp"

namespace rldp {

struct RateGridRow {
    Vec w;
    double beta_star = 1;
    bool has_beta = false;
    double gamma_star = 0;
    bool has_gamma = false;
    double j_at_one = inf;       // level-1 transform J(1, w)
    double upsilon_one = inf;    // perspective value at beta = 1
    double rate_lo_val = inf;    // mixed rate entering the lower bound
    double rate_hi_val = inf;    // mixed rate entering the upper bound
    bool converged = true;
};

// Evaluates the full column set at one reward point. When the two tail
// exponents coincide the mixed rate is computed once and reused.
inline RateGridRow evaluate_rate_row(const PairLaw& law, const Vec& w, const RateOptions& opts) {
    RateGridRow row;
    row.w = w;
    auto j = cramer_j(law, 1.0, w, opts);
    row.j_at_one = j.value;
    auto up = upsilon(law, 1.0, w, opts);
    row.upsilon_one = up.value;
    if (up.has_gamma) {
        row.gamma_star = up.argmin_gamma;
        row.has_gamma = true;
    }
    auto lo = rate_lower(law, w, opts);
    row.rate_lo_val = lo.value;
    if (lo.has_beta) {
        row.beta_star = lo.argmin_beta;
        row.has_beta = true;
    }
    if (law.tail.ell_i == law.tail.ell_s) {
        row.rate_hi_val = lo.value;
    } else {
        auto hi = rate_upper(law, w, opts);
        row.rate_hi_val = hi.value;
    }
    row.converged = j.converged && up.converged && lo.converged;
    return row;
}

inline void write_rate_grid_csv(const std::string& path, int dim,
                                const std::vector<RateGridRow>& rows) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    for (int j = 0; j < dim; ++j) out << "w" << (j + 1) << ",";
    out << "beta_star,gamma_star,J,Upsilon1,I_lower,I_upper,converged\n";
    for (const auto& r : rows) {
        for (int j = 0; j < dim; ++j) out << format_real(r.w[j]) << ",";
        out << (r.has_beta ? format_real(r.beta_star) : std::string()) << ","
            << (r.has_gamma ? format_real(r.gamma_star) : std::string()) << ","
            << format_real(r.j_at_one) << "," << format_real(r.upsilon_one) << ","
            << format_real(r.rate_lo_val) << "," << format_real(r.rate_hi_val) << ","
            << (r.converged ? 1 : 0) << "\n";
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

// Decay-curve schema. Zero-hit rows leave rate and rate_hi empty; the
// CI-floor column rate_lo is always populated.
inline void write_rate_curve_csv(const std::string& path, const std::vector<RatePoint>& curve) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << "t,p_hat,ci_lo,ci_hi,rate,rate_lo,rate_hi,hits,n_runs\n";
    for (const auto& p : curve) {
        out << format_real(p.t) << "," << format_real(p.est.p_hat) << ","
            << format_real(p.est.ci_lo) << "," << format_real(p.est.ci_hi) << ","
            << (p.has_rate ? format_real(p.rate) : std::string()) << ","
            << format_real(p.rate_lo) << ","
            << (p.has_rate_hi ? format_real(p.rate_hi) : std::string()) << "," << p.est.hits
            << "," << p.est.n_runs << "\n";
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

} // namespace rldp
