#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <tuple>

namespace dehnfill {

using Int = boost::multiprecision::number<boost::multiprecision::cpp_int_backend<>,
                                           boost::multiprecision::et_off>;

inline Int abs_int(const Int& a) { return a < 0 ? Int(-a) : a; }

inline Int gcd_int(Int a, Int b) {
    a = abs_int(a);
    b = abs_int(b);
    while (b != 0) {
        Int t = a % b;
        a = b;
        b = t;
    }
    return a;
}

// g = a*x + b*y with g = gcd(a,b) >= 0.
inline std::tuple<Int, Int, Int> gcd_ext(Int a, Int b) {
    Int x0 = 1, y0 = 0, x1 = 0, y1 = 1;
    while (b != 0) {
        Int q = a / b;
        Int r = a - q * b;
        a = b;
        b = r;
        Int nx = x0 - q * x1, ny = y0 - q * y1;
        x0 = x1;
        y0 = y1;
        x1 = nx;
        y1 = ny;
    }
    if (a < 0) {
        a = -a;
        x0 = -x0;
        y0 = -y0;
    }
    return {a, x0, y0};
}

// Least nonnegative residue, valid for negative a and m > 0.
inline Int mod_floor(const Int& a, const Int& m) {
    Int r = a % m;
    if (r < 0) r += abs_int(m);
    return r;
}

// Floor/ceil of a/b for b != 0.
inline Int div_floor(const Int& a, const Int& b) {
    Int q = a / b, r = a % b;
    if (r != 0 && ((r < 0) != (b < 0))) --q;
    return q;
}
inline Int div_ceil(const Int& a, const Int& b) { return -div_floor(-a, b); }

// Inverse of a mod m (m >= 1); throws if not coprime.
inline Int inverse_mod(const Int& a, const Int& m) {
    if (m == 1) return 0;
    auto [g, x, y] = gcd_ext(mod_floor(a, m), m);
    (void)y;
    if (g != 1) throw std::domain_error("inverse_mod: not coprime");
    return mod_floor(x, m);
}

inline bool is_perfect_square(const Int& n, Int& root) {
    if (n < 0) return false;
    root = boost::multiprecision::sqrt(n);
    return root * root == n;
}

// Exact rational with reduced representation, denominator > 0.
class Rat {
  public:
    Rat() : num_(0), den_(1) {}
    Rat(Int n) : num_(std::move(n)), den_(1) {}
    Rat(int n) : num_(n), den_(1) {}
    Rat(long long n) : num_(n), den_(1) {}
    Rat(Int n, Int d) : num_(std::move(n)), den_(std::move(d)) { normalize(); }

    const Int& numerator() const { return num_; }
    const Int& denominator() const { return den_; }

    Rat operator-() const { return Rat(-num_, den_, 0); }
    Rat operator+(const Rat& o) const { return Rat(num_ * o.den_ + o.num_ * den_, den_ * o.den_); }
    Rat operator-(const Rat& o) const { return Rat(num_ * o.den_ - o.num_ * den_, den_ * o.den_); }
    Rat operator*(const Rat& o) const { return Rat(num_ * o.num_, den_ * o.den_); }
    Rat operator/(const Rat& o) const {
        if (o.num_ == 0) throw std::domain_error("Rat: division by zero");
        return Rat(num_ * o.den_, den_ * o.num_);
    }
    Rat& operator+=(const Rat& o) { return *this = *this + o; }
    Rat& operator-=(const Rat& o) { return *this = *this - o; }
    Rat& operator*=(const Rat& o) { return *this = *this * o; }
    Rat& operator/=(const Rat& o) { return *this = *this / o; }

    bool operator==(const Rat& o) const { return num_ == o.num_ && den_ == o.den_; }
    bool operator!=(const Rat& o) const { return !(*this == o); }
    bool operator<(const Rat& o) const { return num_ * o.den_ < o.num_ * den_; }
    bool operator>(const Rat& o) const { return o < *this; }
    bool operator<=(const Rat& o) const { return !(o < *this); }
    bool operator>=(const Rat& o) const { return !(*this < o); }

  private:
    Rat(Int n, Int d, int) : num_(std::move(n)), den_(std::move(d)) {}  // pre-normalized
    void normalize() {
        if (den_ == 0) throw std::domain_error("Rat: zero denominator");
        if (den_ < 0) {
            num_ = -num_;
            den_ = -den_;
        }
        Int g = gcd_int(num_, den_);
        if (g > 1) {
            num_ /= g;
            den_ /= g;
        }
        if (num_ == 0) den_ = 1;
    }
    Int num_, den_;
};

inline Rat operator*(const Int& a, const Rat& b) { return Rat(a) * b; }
inline Rat operator*(int a, const Rat& b) { return Rat(a) * b; }
inline Rat operator+(int a, const Rat& b) { return Rat(a) + b; }
inline Rat operator-(int a, const Rat& b) { return Rat(a) - b; }

inline Int floor_rat(const Rat& r) { return div_floor(r.numerator(), r.denominator()); }
inline Int ceil_rat(const Rat& r) { return div_ceil(r.numerator(), r.denominator()); }

inline std::string to_string(const Int& n) { return n.str(); }
inline std::string to_string(const Rat& r) {
    if (r.denominator() == 1) return r.numerator().str();
    return r.numerator().str() + "/" + r.denominator().str();
}

// ---------------------------------------------------------------------------
// Rational interval arithmetic. Intervals are closed, endpoints exact.
// ---------------------------------------------------------------------------

struct RatInterval {
    Rat lo, hi;

    RatInterval() : lo(0), hi(0) {}
    RatInterval(const Rat& v) : lo(v), hi(v) {}
    RatInterval(const Rat& l, const Rat& h) : lo(l), hi(h) {
        if (lo > hi) throw std::invalid_argument("RatInterval: lo > hi");
    }
    static RatInterval point(const Rat& v) { return RatInterval(v); }

    Rat width() const { return hi - lo; }
    bool contains(const Rat& v) const { return lo <= v && v <= hi; }

    RatInterval operator+(const RatInterval& o) const { return {lo + o.lo, hi + o.hi}; }
    RatInterval operator-(const RatInterval& o) const { return {lo - o.hi, hi - o.lo}; }
    RatInterval operator*(const RatInterval& o) const {
        Rat a = lo * o.lo, b = lo * o.hi, c = hi * o.lo, d = hi * o.hi;
        Rat mn = a, mx = a;
        for (const Rat& v : {b, c, d}) {
            if (v < mn) mn = v;
            if (v > mx) mx = v;
        }
        return {mn, mx};
    }
    RatInterval operator/(const RatInterval& o) const {
        if (o.lo <= 0 && o.hi >= 0) throw std::domain_error("RatInterval: division by interval containing 0");
        return *this * RatInterval(Rat(1) / o.hi, Rat(1) / o.lo);
    }
    RatInterval square() const {
        RatInterval p = *this * *this;
        if (lo <= 0 && hi >= 0) p.lo = 0;
        return p;
    }
};

inline RatInterval operator*(const Rat& s, const RatInterval& iv) { return RatInterval(s) * iv; }

// sqrt of a nonnegative rational, to within `tol`; exact on perfect squares.
inline RatInterval sqrt_interval(const Rat& v, const Rat& tol) {
    if (v < 0) throw std::domain_error("sqrt_interval: negative");
    if (v == 0) return RatInterval(Rat(0));
    Int rn, rd;
    if (is_perfect_square(v.numerator(), rn) && is_perfect_square(v.denominator(), rd))
        return RatInterval(Rat(rn, rd));
    // Bisection from an integer bracket.
    Rat lo(0), hi = v < 1 ? Rat(1) : v;
    while (hi - lo > tol) {
        Rat mid = (lo + hi) / 2;
        if (mid * mid <= v)
            lo = mid;
        else
            hi = mid;
    }
    return {lo, hi};
}

inline RatInterval sqrt_interval(const RatInterval& v, const Rat& tol) {
    Rat lo = v.lo < 0 ? Rat(0) : v.lo;
    return {sqrt_interval(lo, tol).lo, sqrt_interval(v.hi, tol).hi};
}

// pi to ~50 significant digits, as a rational bracket (49 decimal places).
inline RatInterval pi_interval() {
    static const Int scale = [] {
        Int s = 1;
        for (int i = 0; i < 49; ++i) s *= 10;
        return s;
    }();
    static const Int pi_lo("31415926535897932384626433832795028841971693993751");
    return {Rat(pi_lo, scale), Rat(pi_lo + 1, scale)};
}

}  // namespace dehnfill
