#pragma once

#include "dehnfill/numeric.hpp"

#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace dehnfill {

// Variable identifier. Ordered by name for canonical printing.
struct VarId {
    std::string name;

    VarId() = default;
    explicit VarId(std::string n) : name(std::move(n)) {}
    bool operator==(const VarId& o) const { return name == o.name; }
    bool operator!=(const VarId& o) const { return name != o.name; }
    bool operator<(const VarId& o) const { return name < o.name; }
};

using Valuation = std::map<VarId, Int>;

inline Int value_of(const Valuation& v, const VarId& x) {
    auto it = v.find(x);
    if (it == v.end()) throw std::out_of_range("valuation missing variable " + x.name);
    return it->second;
}

// Integral-affine function: sum of coeff*var plus a constant. Coefficients
// are never stored as zero.
class AffineForm {
  public:
    AffineForm() : constant_(0) {}
    AffineForm(Int c) : constant_(std::move(c)) {}
    static AffineForm variable(const VarId& v) {
        AffineForm f;
        f.coeffs_[v] = 1;
        return f;
    }

    const std::map<VarId, Int>& coeffs() const { return coeffs_; }
    const Int& constant() const { return constant_; }
    Int& constant() { return constant_; }

    Int coeff(const VarId& v) const {
        auto it = coeffs_.find(v);
        return it == coeffs_.end() ? Int(0) : it->second;
    }
    void set_coeff(const VarId& v, Int c) {
        if (c == 0)
            coeffs_.erase(v);
        else
            coeffs_[v] = std::move(c);
    }
    void add_term(const VarId& v, const Int& c) { set_coeff(v, coeff(v) + c); }

    bool is_constant() const { return coeffs_.empty(); }
    bool is_zero() const { return coeffs_.empty() && constant_ == 0; }

    AffineForm& operator+=(const AffineForm& o) {
        for (auto& [v, c] : o.coeffs_) add_term(v, c);
        constant_ += o.constant_;
        return *this;
    }
    AffineForm& operator-=(const AffineForm& o) {
        for (auto& [v, c] : o.coeffs_) add_term(v, -c);
        constant_ -= o.constant_;
        return *this;
    }
    AffineForm operator+(const AffineForm& o) const {
        AffineForm r = *this;
        r += o;
        return r;
    }
    AffineForm operator-(const AffineForm& o) const {
        AffineForm r = *this;
        r -= o;
        return r;
    }
    AffineForm operator-() const { return *this * Int(-1); }
    AffineForm operator*(const Int& s) const {
        AffineForm r;
        if (s == 0) return r;
        for (auto& [v, c] : coeffs_) r.coeffs_[v] = c * s;
        r.constant_ = constant_ * s;
        return r;
    }

    Int evaluate(const Valuation& vals) const {
        Int r = constant_;
        for (auto& [v, c] : coeffs_) r += c * value_of(vals, v);
        return r;
    }

    // Substitute var := replacement.
    AffineForm substituted(const VarId& var, const AffineForm& replacement) const {
        AffineForm r = *this;
        Int c = r.coeff(var);
        if (c == 0) return r;
        r.set_coeff(var, 0);
        r += replacement * c;
        return r;
    }

    void collect_vars(std::set<VarId>& out) const {
        for (auto& [v, c] : coeffs_) out.insert(v);
    }

    Int content() const {  // gcd of all coefficients (not the constant)
        Int g = 0;
        for (auto& [v, c] : coeffs_) g = gcd_int(g, c);
        return g;
    }

    bool operator==(const AffineForm& o) const { return coeffs_ == o.coeffs_ && constant_ == o.constant_; }
    bool operator<(const AffineForm& o) const {
        if (coeffs_ != o.coeffs_) return coeffs_ < o.coeffs_;
        return constant_ < o.constant_;
    }

  private:
    std::map<VarId, Int> coeffs_;
    Int constant_;
};

inline AffineForm operator*(const Int& s, const AffineForm& f) { return f * s; }

// Total degree <= 2 polynomial: symmetric quadratic part plus affine part.
class QuadraticForm {
  public:
    using Key = std::pair<VarId, VarId>;  // key.first <= key.second

    QuadraticForm() = default;
    explicit QuadraticForm(AffineForm lin) : linear_(std::move(lin)) {}

    static Key make_key(const VarId& a, const VarId& b) { return a < b ? Key{a, b} : Key{b, a}; }

    const std::map<Key, Int>& quad() const { return quad_; }
    const AffineForm& linear() const { return linear_; }
    AffineForm& linear() { return linear_; }

    void add_quad_term(const VarId& a, const VarId& b, const Int& c) {
        Key k = make_key(a, b);
        Int nc = quad_coeff(a, b) + c;
        if (nc == 0)
            quad_.erase(k);
        else
            quad_[k] = nc;
    }
    Int quad_coeff(const VarId& a, const VarId& b) const {
        auto it = quad_.find(make_key(a, b));
        return it == quad_.end() ? Int(0) : it->second;
    }
    bool is_affine() const { return quad_.empty(); }

    QuadraticForm& operator+=(const QuadraticForm& o) {
        for (auto& [k, c] : o.quad_) add_quad_term(k.first, k.second, c);
        linear_ += o.linear_;
        return *this;
    }
    QuadraticForm operator+(const QuadraticForm& o) const {
        QuadraticForm r = *this;
        r += o;
        return r;
    }
    QuadraticForm operator*(const Int& s) const {
        QuadraticForm r;
        if (s == 0) return r;
        for (auto& [k, c] : quad_) r.quad_[k] = c * s;
        r.linear_ = linear_ * s;
        return r;
    }

    // Product of two affine forms (the only way quadratics are built here).
    static QuadraticForm product(const AffineForm& f, const AffineForm& g) {
        QuadraticForm r;
        for (auto& [v, c] : f.coeffs())
            for (auto& [w, d] : g.coeffs()) r.add_quad_term(v, w, c * d);
        r.linear_ += g * f.constant();
        r.linear_ += f * g.constant();
        r.linear_.constant() -= f.constant() * g.constant();
        // constant was added twice (once in each scaled copy)
        return r;
    }

    Int evaluate(const Valuation& vals) const {
        Int r = linear_.evaluate(vals);
        for (auto& [k, c] : quad_) r += c * value_of(vals, k.first) * value_of(vals, k.second);
        return r;
    }

    QuadraticForm substituted(const VarId& var, const AffineForm& replacement) const {
        QuadraticForm r;
        r.linear_ = linear_.substituted(var, replacement);
        for (auto& [k, c] : quad_) {
            AffineForm a = k.first == var ? replacement : AffineForm::variable(k.first);
            AffineForm b = k.second == var ? replacement : AffineForm::variable(k.second);
            if (k.first != var && k.second != var) {
                r.add_quad_term(k.first, k.second, c);
            } else {
                QuadraticForm p = product(a, b) * c;
                r += p;
            }
        }
        return r;
    }

    void collect_vars(std::set<VarId>& out) const {
        linear_.collect_vars(out);
        for (auto& [k, c] : quad_) {
            out.insert(k.first);
            out.insert(k.second);
        }
    }

    bool operator==(const QuadraticForm& o) const { return quad_ == o.quad_ && linear_ == o.linear_; }
    bool operator<(const QuadraticForm& o) const {
        if (quad_ != o.quad_) return quad_ < o.quad_;
        return linear_ < o.linear_;
    }

  private:
    std::map<Key, Int> quad_;
    AffineForm linear_;
};

}  // namespace dehnfill
