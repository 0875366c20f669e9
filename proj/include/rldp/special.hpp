#pragma once

// Piecewise-linear cumulative hazard H with prescribed oscillation of the
// ratio a(s) = H(s)/s between two exponents 0 < ell_lo <= ell_hi, plus exact
// block integrals of s^k * exp(zeta*s - H(s)).
//
// Why a hazard construction: a survival function written directly as
// exp(-a(s)*s) with a piecewise-constant alternating a(s) would *increase*
// at every down-jump of a, which no distribution can do. Instead H is
// continuous piecewise linear and the ratio a(s) touches ell_hi and ell_lo
// at alternating dyadic breakpoints:
//   climb block  [2^k, 2^{k+1}]: slope 2*ell_hi - a(2^k), lands at ell_hi;
//   descend:     slope max(0, 2*ell_lo - a(2^k)), ratio halves while the
//                slope would be negative, then lands exactly at ell_lo.
// Hence limsup a = ell_hi, liminf a = ell_lo, both attained at breakpoints.

#include <cassert>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "rldp/extended.hpp"

namespace rldp {

// phi1(z) = (e^z - 1)/z, phi2(z) = (e^z (z-1) + 1)/z^2,
// phi3(z) = (e^z (z^2 - 2z + 2) - 2)/z^3; all analytic, series near 0.
inline double phi1(double z) {
    if (std::fabs(z) < 1e-4)
        return 1.0 + z * (0.5 + z * (1.0 / 6.0 + z / 24.0));
    return std::expm1(z) / z;
}
inline double phi2(double z) {
    if (std::fabs(z) < 1e-4)
        return 0.5 + z * (1.0 / 3.0 + z * (0.125 + z / 30.0));
    return (std::exp(z) * (z - 1.0) + 1.0) / (z * z);
}
inline double phi3(double z) {
    if (std::fabs(z) < 1e-4)
        return 1.0 / 3.0 + z * (0.25 + z * (0.1 + z / 36.0));
    return (std::exp(z) * (z * z - 2.0 * z + 2.0) - 2.0) / (z * z * z);
}

// integral of s^k e^{a (s - anchor)} over [x0, x1], anchor in {x0, x1},
// a*(s-anchor) <= 0 on the block so no overflow. k in {0, 1, 2}.
inline double anchored_poly_exp(int k, double a, double x0, double x1, bool anchor_left) {
    double d = x1 - x0;
    assert(d >= 0);
    if (d == 0) return 0.0;
    if (anchor_left) {
        double z = a * d;
        double j0 = d * phi1(z);
        if (k == 0) return j0;
        double j1u = d * d * phi2(z); // integral of u e^{a u}, u = s - x0
        if (k == 1) return x0 * j0 + j1u;
        double j2u = d * d * d * phi3(z);
        return x0 * x0 * j0 + 2.0 * x0 * j1u + j2u;
    }
    // anchor right: integral of s^k e^{a (s - x1)}; v = x1 - s, b = -a
    double z = -a * d;
    double j0 = d * phi1(z);
    if (k == 0) return j0;
    double j1v = d * d * phi2(z);
    if (k == 1) return x1 * j0 - j1v;
    double j2v = d * d * d * phi3(z);
    return x1 * x1 * j0 - 2.0 * x1 * j1v + j2v;
}

struct HazardBlock {
    double s0, s1; // [s0, s1]
    double h0;     // H(s0)
    double c;      // slope on the block, >= 0
};

class PiecewiseHazard {
  public:
    PiecewiseHazard(double ell_lo, double ell_hi) : lo_(ell_lo), hi_(ell_hi) {
        if (!(ell_lo > 0) || !(ell_hi >= ell_lo) || !std::isfinite(ell_hi))
            throw std::invalid_argument("oscillating tail requires 0 < ell_s <= ell_i < +inf");
        // [0, 1]: constant slope ell_lo, so a(1) = ell_lo starts a climb.
        blocks_.push_back({0.0, 1.0, 0.0, lo_});
        bool climbing = true;
        while (blocks_.back().s1 < 1e18 && hval(blocks_.back()) < 1e18) {
            const HazardBlock& b = blocks_.back();
            double s0 = b.s1, s1 = 2.0 * s0;
            double h0 = hval(b);
            double ratio = h0 / s0;
            double slope;
            if (climbing) {
                slope = 2.0 * hi_ - ratio; // lands at ratio ell_hi
                climbing = false;
            } else if (ratio > 2.0 * lo_ + 1e-15) {
                slope = 0.0; // ratio halves; still descending
            } else {
                slope = 2.0 * lo_ - ratio; // lands exactly at ell_lo
                climbing = true;
            }
            assert(slope >= -1e-12);
            blocks_.push_back({s0, s1, h0, std::max(0.0, slope)});
            if (blocks_.size() > 400) break;
        }
    }

    double ell_lo() const { return lo_; }
    double ell_hi() const { return hi_; }

    double value(double s) const { // H(s)
        assert(s >= 0);
        const HazardBlock& b = block_at(s);
        return b.h0 + b.c * (s - b.s0);
    }

    double survival(double s) const { return std::exp(-value(s)); }

    // inverse of H for sampling: smallest s with H(s) >= h.
    double inverse(double h) const {
        assert(h >= 0);
        for (const auto& b : blocks_) {
            double h1 = b.h0 + b.c * (b.s1 - b.s0);
            if (h <= h1) {
                if (b.c == 0.0) return b.s0;
                return b.s0 + (h - b.h0) / b.c;
            }
        }
        // beyond the table (probability ~ e^-80): extend at slope ell_lo
        const HazardBlock& b = blocks_.back();
        double hend = b.h0 + b.c * (b.s1 - b.s0);
        return b.s1 + (h - hend) / lo_;
    }

    // moments of s^k e^{zeta s} against the density, k = 0,1,2, as
    // (finite?, ln m0, m1/m0, m2/m0). Finite iff zeta < ell_lo.
    struct TiltedMoments {
        bool finite = false;
        double ln_m0 = 0, mean = 0, second = 0;
    };

    TiltedMoments tilted_moments(double zeta) const {
        TiltedMoments out;
        if (zeta >= lo_) return out; // diverges at and beyond ell_s
        // pass 1: per-block peak exponent of g(s) = zeta s - H(s)
        double shift = -inf;
        for (const auto& b : blocks_) {
            if (b.c == 0.0) continue; // no mass
            double g0 = zeta * b.s0 - b.h0;
            double g1 = zeta * b.s1 - (b.h0 + b.c * (b.s1 - b.s0));
            shift = std::max(shift, std::max(g0, g1));
        }
        double m0 = 0, m1 = 0, m2 = 0;
        for (const auto& b : blocks_) {
            if (b.c == 0.0) continue;
            double a = zeta - b.c;
            double g0 = zeta * b.s0 - b.h0;
            double g1 = g0 + a * (b.s1 - b.s0);
            bool left = g0 >= g1;
            double amp = std::exp((left ? g0 : g1) - shift);
            if (amp < 1e-40 && b.s0 > 8.0 / std::max(1e-12, lo_ - zeta) && b.s0 > 64) break;
            m0 += b.c * amp * anchored_poly_exp(0, a, b.s0, b.s1, left);
            m1 += b.c * amp * anchored_poly_exp(1, a, b.s0, b.s1, left);
            m2 += b.c * amp * anchored_poly_exp(2, a, b.s0, b.s1, left);
        }
        assert(m0 > 0);
        out.finite = true;
        out.ln_m0 = shift + std::log(m0);
        out.mean = m1 / m0;
        out.second = m2 / m0;
        return out;
    }

    double mean_wait() const { return tilted_moments(0.0).mean; }

  private:
    double hval(const HazardBlock& b) const { return b.h0 + b.c * (b.s1 - b.s0); }

    const HazardBlock& block_at(double s) const {
        // blocks are dyadic after the first; scan is fine (few dozen blocks)
        for (const auto& b : blocks_)
            if (s <= b.s1) return b;
        return blocks_.back();
    }

    double lo_, hi_;
    std::vector<HazardBlock> blocks_;
};

} // namespace rldp
