#pragma once

// Event-set descriptors for the scaled reward W_t / t (dimension d <= 3),
// plus one pair-space box used for mean-of-n-steps events.
//
//   open_ball / closed_ball   {w : |w - center| < r}  /  <= r
//   half_space                {w : normal . w <= offset}, strict when open
//   hyperbola_wedge           {w : w1 < cap, (cap - w1) * w2 >= level}
//                             (closed in R^2: its closure adds no points)
//   box_product               {(s, x) : s in [s_lo, s_hi], x_j in [lo_j, hi_j]}
//                             over pair means, not over W_t / t

#include <cmath>
#include <stdexcept>
#include <string>

#include "rldp/extended.hpp"
#include "rldp/vec.hpp"

namespace rldp {

enum class SetKind { open_ball, closed_ball, half_space, hyperbola_wedge, box_product };

struct SetDescriptor {
    SetKind kind = SetKind::closed_ball;
    int dim = 0;

    Vec center;        // balls
    double radius = 0; // balls

    Vec normal;          // half_space
    double offset = 0;   // half_space
    bool open = false;   // half_space: strict inequality

    double cap = 0, level = 0; // hyperbola_wedge

    double s_lo = -inf, s_hi = inf; // box_product wait interval
    Vec x_lo, x_hi;                 // box_product reward box
};

inline SetDescriptor make_open_ball(const Vec& center, double radius) {
    if (!(radius > 0) || !std::isfinite(radius))
        throw std::invalid_argument("ball radius must be finite and > 0");
    SetDescriptor s;
    s.kind = SetKind::open_ball;
    s.dim = center.dim;
    s.center = center;
    s.radius = radius;
    return s;
}

inline SetDescriptor make_closed_ball(const Vec& center, double radius) {
    SetDescriptor s = make_open_ball(center, radius);
    s.kind = SetKind::closed_ball;
    return s;
}

inline SetDescriptor make_half_space(const Vec& normal, double offset, bool open) {
    if (!(norm2(normal) > 0)) throw std::invalid_argument("half-space normal must be nonzero");
    if (!std::isfinite(offset)) throw std::invalid_argument("half-space offset must be finite");
    SetDescriptor s;
    s.kind = SetKind::half_space;
    s.dim = normal.dim;
    s.normal = normal;
    s.offset = offset;
    s.open = open;
    return s;
}

inline SetDescriptor make_hyperbola_wedge(double cap, double level) {
    if (!(level > 0) || !std::isfinite(level) || !std::isfinite(cap))
        throw std::invalid_argument("hyperbola wedge needs finite cap and level > 0");
    SetDescriptor s;
    s.kind = SetKind::hyperbola_wedge;
    s.dim = 2;
    s.cap = cap;
    s.level = level;
    return s;
}

inline SetDescriptor make_box_product(double s_lo, double s_hi, const Vec& x_lo, const Vec& x_hi) {
    if (!(s_lo <= s_hi)) throw std::invalid_argument("box: need s_lo <= s_hi");
    if (x_lo.dim != x_hi.dim) throw std::invalid_argument("box: bound dimensions differ");
    for (int j = 0; j < x_lo.dim; ++j)
        if (!(x_lo[j] <= x_hi[j])) throw std::invalid_argument("box: need x_lo <= x_hi");
    SetDescriptor s;
    s.kind = SetKind::box_product;
    s.dim = x_lo.dim;
    s.s_lo = s_lo;
    s.s_hi = s_hi;
    s.x_lo = x_lo;
    s.x_hi = x_hi;
    return s;
}

// membership of a point of W_t / t space
inline bool set_contains(const SetDescriptor& s, const Vec& w) {
    switch (s.kind) {
        case SetKind::open_ball: return norm(w - s.center) < s.radius;
        case SetKind::closed_ball: return norm(w - s.center) <= s.radius;
        case SetKind::half_space: {
            double v = dot(s.normal, w);
            return s.open ? v < s.offset : v <= s.offset;
        }
        case SetKind::hyperbola_wedge:
            return w[0] < s.cap && (s.cap - w[0]) * w[1] >= s.level;
        case SetKind::box_product:
            throw std::logic_error("box_product is a pair-space set; use pair_contains");
    }
    return false;
}

// membership of a (mean wait, mean reward) pair
inline bool pair_contains(const SetDescriptor& s, double mean_s, const Vec& mean_x) {
    if (s.kind != SetKind::box_product)
        throw std::logic_error("pair_contains requires a box_product set");
    if (mean_s < s.s_lo || mean_s > s.s_hi) return false;
    for (int j = 0; j < s.dim; ++j)
        if (mean_x[j] < s.x_lo[j] || mean_x[j] > s.x_hi[j]) return false;
    return true;
}

inline bool set_is_open(const SetDescriptor& s) {
    return s.kind == SetKind::open_ball || (s.kind == SetKind::half_space && s.open);
}

inline std::string vec_to_string(const Vec& v) {
    std::string out = "(";
    for (int j = 0; j < v.dim; ++j) out += (j ? "," : "") + format_real(v[j]);
    return out + ")";
}

inline std::string describe(const SetDescriptor& s) {
    switch (s.kind) {
        case SetKind::open_ball:
            return "open_ball(center=" + vec_to_string(s.center) + ",r=" + format_real(s.radius) + ")";
        case SetKind::closed_ball:
            return "closed_ball(center=" + vec_to_string(s.center) + ",r=" + format_real(s.radius) + ")";
        case SetKind::half_space:
            return std::string(s.open ? "open" : "closed") + "_half_space(normal=" +
                   vec_to_string(s.normal) + ",offset=" + format_real(s.offset) + ")";
        case SetKind::hyperbola_wedge:
            return "hyperbola_wedge(cap=" + format_real(s.cap) + ",level=" + format_real(s.level) + ")";
        case SetKind::box_product:
            return "box_product(s=[" + format_real(s.s_lo) + "," + format_real(s.s_hi) + "],x_lo=" +
                   vec_to_string(s.x_lo) + ",x_hi=" + vec_to_string(s.x_hi) + ")";
    }
    return "?";
}

} // namespace rldp
