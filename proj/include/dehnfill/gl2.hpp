#pragma once

#include "dehnfill/numeric.hpp"

#include <sstream>

namespace dehnfill {

// 2x2 integer matrix with determinant +-1.
struct GL2Matrix {
    Int a{1}, b{0}, c{0}, d{1};  // [[a, b], [c, d]]

    GL2Matrix() = default;
    GL2Matrix(Int a_, Int b_, Int c_, Int d_)
        : a(std::move(a_)), b(std::move(b_)), c(std::move(c_)), d(std::move(d_)) {}

    static GL2Matrix identity() { return {1, 0, 0, 1}; }
    static GL2Matrix twist(const Int& n) { return {1, n, 0, 1}; }       // (1 n; 0 1)
    static GL2Matrix reflection() { return {1, 0, 0, -1}; }             // J

    Int det() const { return a * d - b * c; }
    Int trace() const { return a + d; }
    bool is_unimodular() const {
        Int dt = det();
        return dt == 1 || dt == -1;
    }

    GL2Matrix operator*(const GL2Matrix& o) const {
        return {a * o.a + b * o.c, a * o.b + b * o.d, c * o.a + d * o.c, c * o.b + d * o.d};
    }
    GL2Matrix operator-() const { return {-a, -b, -c, -d}; }

    GL2Matrix inverse() const {
        Int dt = det();
        if (dt == 1) return {d, -b, -c, a};
        if (dt == -1) return {-d, b, c, -a};
        throw std::domain_error("GL2Matrix: not invertible over Z");
    }

    std::pair<Int, Int> apply(const Int& x, const Int& y) const { return {a * x + b * y, c * x + d * y}; }

    bool operator==(const GL2Matrix& o) const { return a == o.a && b == o.b && c == o.c && d == o.d; }
    bool operator!=(const GL2Matrix& o) const { return !(*this == o); }
    bool operator<(const GL2Matrix& o) const {
        if (a != o.a) return a < o.a;
        if (b != o.b) return b < o.b;
        if (c != o.c) return c < o.c;
        return d < o.d;
    }

    bool is_upper_unitriangular_like() const {  // (e1 n; 0 e2), e_i = +-1
        return c == 0 && (a == 1 || a == -1) && (d == 1 || d == -1);
    }

    std::string str() const {
        std::ostringstream os;
        os << "[[" << a << "," << b << "],[" << c << "," << d << "]]";
        return os.str();
    }
};

inline GL2Matrix parse_gl2(const std::string& s) {
    // expects [[a,b],[c,d]]
    std::vector<Int> vals;
    std::string cur;
    for (char ch : s) {
        if ((ch >= '0' && ch <= '9') || ch == '-') {
            cur += ch;
        } else if (!cur.empty()) {
            vals.push_back(Int(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) vals.push_back(Int(cur));
    if (vals.size() != 4) throw std::invalid_argument("parse_gl2: expected 4 entries");
    return {vals[0], vals[1], vals[2], vals[3]};
}

}  // namespace dehnfill
