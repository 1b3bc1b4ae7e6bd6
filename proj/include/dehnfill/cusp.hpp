#pragma once

#include "dehnfill/numeric.hpp"

#include <vector>

namespace dehnfill {

struct PreconditionViolation : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct EmptyList : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Euclidean cusp cross-section data as rational brackets: lengths of the two
// basis slopes, the angle between them, and the area. All quantities come
// from outside (geometric software export); nothing here computes hyperbolic
// structures.
struct CuspShape {
    RatInterval l1, l2;
    RatInterval cos_theta, sin_theta;
    RatInterval area;

    static CuspShape from_lengths(const RatInterval& l1, const RatInterval& l2,
                                  const RatInterval& cos_theta, const RatInterval& sin_theta) {
        CuspShape s;
        s.l1 = l1;
        s.l2 = l2;
        s.cos_theta = cos_theta;
        s.sin_theta = sin_theta;
        if (!(s.sin_theta.lo > 0)) throw PreconditionViolation("CuspShape: sin(theta) must be positive");
        s.area = l1 * l2 * sin_theta;
        return s;
    }
    static CuspShape square() {
        return from_lengths(RatInterval(Rat(1)), RatInterval(Rat(1)), RatInterval(Rat(0)),
                            RatInterval(Rat(1)));
    }
};

// Primitive slope a*s1 + b*s2.
struct Slope {
    Int a, b;

    Slope(Int a_, Int b_) : a(std::move(a_)), b(std::move(b_)) {
        if (a == 0 && b == 0) throw std::invalid_argument("Slope: (0,0)");
    }
    bool primitive() const { return gcd_int(a, b) == 1; }
    // canonical representative of {s, -s}: b > 0, or b = 0 and a > 0
    Slope canonical() const {
        if (b > 0 || (b == 0 && a > 0)) return *this;
        return Slope(-a, -b);
    }
    bool operator==(const Slope& o) const { return a == o.a && b == o.b; }
    bool operator<(const Slope& o) const { return std::tie(a, b) < std::tie(o.a, o.b); }
    std::string str() const { return "(" + a.str() + "," + b.str() + ")"; }
};

// Interval certified to contain the square of the normalised length
// L(a s1 + b s2)^2 / Area.
inline RatInterval normalized_length_sq(const CuspShape& shape, const Slope& s) {
    RatInterval a(Rat(s.a)), b(Rat(s.b));
    RatInterval horiz = b * shape.l2 * shape.cos_theta + a * shape.l1;
    RatInterval vert = b * shape.l2 * shape.sin_theta;
    RatInterval len_sq = horiz.square() + vert.square();
    return len_sq / shape.area;
}

// Every primitive slope whose certified normalised length can be <= c is
// included (superset semantics: a slope is listed unless its lower bound
// already exceeds the cutoff). Deduplicated up to sign.
inline std::vector<Slope> enumerate_short_slopes(const CuspShape& shape, const Rat& c) {
    if (!(c > 0)) throw PreconditionViolation("enumerate_short_slopes: cutoff must be positive");
    Rat c2 = c * c;
    // L^2 >= (b l2 sin)^2 / area  =>  b^2 <= c^2 area / (l2 sin)^2
    Rat denom = (shape.l2 * shape.sin_theta).square().lo;
    if (!(denom > 0)) throw PreconditionViolation("degenerate shape");
    Rat bbound_sq = c2 * shape.area.hi / denom;
    Int bmax = boost::multiprecision::sqrt(bbound_sq.numerator() / bbound_sq.denominator()) + 1;
    std::vector<Slope> out;
    for (Int b = 0; b <= bmax; ++b) {
        // (b l2 cos + a l1)^2 <= c^2 area  =>  a in a bracket around -b l2 cos / l1
        RatInterval centre = (RatInterval(Rat(-1)) * RatInterval(Rat(b)) * shape.l2 * shape.cos_theta) /
                             shape.l1;
        Rat half_sq = c2 * shape.area.hi / shape.l1.square().lo;
        Int half = boost::multiprecision::sqrt(half_sq.numerator() / half_sq.denominator()) + 1;
        Int alo = floor_rat(centre.lo) - half - 1;
        Int ahi = ceil_rat(centre.hi) + half + 1;
        for (Int a = alo; a <= ahi; ++a) {
            if (a == 0 && b == 0) continue;
            if (b == 0 && a <= 0) continue;  // canonical representative
            if (gcd_int(a, b) != 1) continue;
            Slope s(a, b);
            if (normalized_length_sq(shape, s).lo <= c2) out.push_back(s.canonical());
        }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

// Threshold max{7.823, sqrt(2 pi / delta + 28.78)} * sqrt(b): fillings with
// every slope longer than this are hyperbolic with short core geodesics.
inline RatInterval hk_threshold(const Rat& delta, const Int& b, const Rat& tol = Rat(1, 1000000000)) {
    if (!(delta > 0) || b < 1) throw PreconditionViolation("hk_threshold");
    RatInterval two_pi = Rat(2) * pi_interval();
    RatInterval inner = two_pi / RatInterval(delta) + RatInterval(Rat(2878, 100));
    RatInterval root = sqrt_interval(inner, tol);
    Rat hk(7823, 1000);
    RatInterval mx(std::max(hk, root.lo), std::max(hk, root.hi));
    return mx * sqrt_interval(Rat(b), tol);
}

struct FillingVolumeBounds {
    RatInterval fkp_lower;  // (1 - (2 pi / l_min)^2)^{3/2} * vol(N)
    Rat adams_lower;        // 1.01 * b
};

inline FillingVolumeBounds filling_volume_bounds(const RatInterval& vol_N, const RatInterval& l_min,
                                                 const Int& cusp_count_b,
                                                 const Rat& tol = Rat(1, Int("1000000000000"))) {
    RatInterval two_pi = Rat(2) * pi_interval();
    if (!(l_min.lo > two_pi.hi))
        throw PreconditionViolation("filling_volume_bounds: requires l_min > 2 pi");
    RatInterval ratio = two_pi / l_min;
    RatInterval factor = RatInterval(Rat(1)) - ratio.square();
    // x^{3/2} = sqrt(x^3)
    RatInterval cube = factor * factor * factor;
    FillingVolumeBounds out;
    out.fkp_lower = sqrt_interval(cube, tol) * vol_N;
    out.adams_lower = Rat(101, 100) * Rat(cusp_count_b);
    return out;
}

// sys(M) >= min{0.056, 0.6034 sys(X)}
inline Rat systole_lower(const Rat& sys_X) { return std::min(Rat(56, 1000), Rat(6034, 10000) * sys_X); }

// Total normalised length: 1 / L^2 = sum 1 / L_i^2.
inline RatInterval total_normalized_length(const std::vector<Rat>& lengths,
                                           const Rat& tol = Rat(1, 1000000000)) {
    if (lengths.empty()) throw EmptyList("total_normalized_length: empty input");
    Rat inv_sq(0);
    for (auto& l : lengths) {
        if (!(l > 0)) throw PreconditionViolation("total_normalized_length: lengths must be positive");
        inv_sq += Rat(1) / (l * l);
    }
    RatInterval denom = sqrt_interval(inv_sq, tol);
    return RatInterval(Rat(1)) / denom;
}

}  // namespace dehnfill
