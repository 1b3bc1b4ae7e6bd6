#pragma once

#include "dehnfill/constraint.hpp"

#include <memory>

namespace dehnfill {

// Boolean combination of linear constraints, the input shape accepted by
// normalize_expression.
struct BoolExpr;
using BoolExprPtr = std::shared_ptr<const BoolExpr>;

struct BoolExpr {
    enum class Kind { Leaf, And, Or, Not } kind;
    Constraint leaf;            // Kind::Leaf
    std::vector<BoolExprPtr> children;

    static BoolExprPtr make_leaf(Constraint c) {
        if (c.is_quadratic()) throw std::invalid_argument("normalize_expression: quadratic leaf");
        auto e = std::make_shared<BoolExpr>();
        e->kind = Kind::Leaf;
        e->leaf = std::move(c);
        return e;
    }
    static BoolExprPtr make_and(std::vector<BoolExprPtr> cs) {
        auto e = std::make_shared<BoolExpr>();
        e->kind = Kind::And;
        e->children = std::move(cs);
        return e;
    }
    static BoolExprPtr make_or(std::vector<BoolExprPtr> cs) {
        auto e = std::make_shared<BoolExpr>();
        e->kind = Kind::Or;
        e->children = std::move(cs);
        return e;
    }
    static BoolExprPtr make_not(BoolExprPtr c) {
        auto e = std::make_shared<BoolExpr>();
        e->kind = Kind::Not;
        e->children = {std::move(c)};
        return e;
    }

    bool evaluate(const Valuation& v) const {
        switch (kind) {
            case Kind::Leaf: return leaf.satisfied(v);
            case Kind::And:
                for (auto& c : children)
                    if (!c->evaluate(v)) return false;
                return true;
            case Kind::Or:
                for (auto& c : children)
                    if (c->evaluate(v)) return true;
                return false;
            case Kind::Not: return !children[0]->evaluate(v);
        }
        return false;
    }

    void collect_vars(std::set<VarId>& out) const {
        if (kind == Kind::Leaf)
            leaf.collect_vars(out);
        else
            for (auto& c : children) c->collect_vars(out);
    }
};

// Produces variable names fresh relative to a used-name set.
class FreshVars {
  public:
    explicit FreshVars(std::set<VarId> used, std::string prefix = "beta")
        : used_(std::move(used)), prefix_(std::move(prefix)) {}

    VarId next() {
        while (true) {
            VarId v(prefix_ + "_" + std::to_string(counter_++));
            if (!used_.count(v)) {
                used_.insert(v);
                return v;
            }
        }
    }
    void reserve(const VarId& v) { used_.insert(v); }

  private:
    std::set<VarId> used_;
    std::string prefix_;
    size_t counter_ = 1;
};

namespace detail {

// Negation of a single linear constraint, as a disjunction of constraints.
// Over the integers:  not(p = 0)  <=>  p <= -1  or  -p <= -1
//                     not(p <= 0) <=>  -p + 1 <= 0
//                     not(p < 0)  <=>  -p <= 0
//                     not(p = r mod m) <=> p = r' mod m for r' != r
inline std::vector<Constraint> negate_linear(const Constraint& c) {
    const AffineForm& p = c.affine();
    switch (c.rel) {
        case Relation::Eq: {
            AffineForm a = p;
            a.constant() += 1;
            AffineForm b = -p;
            b.constant() += 1;
            return {Constraint::le(a), Constraint::le(b)};
        }
        case Relation::Le: {
            AffineForm a = -p;
            a.constant() += 1;
            return {Constraint::le(a)};
        }
        case Relation::Lt: return {Constraint::le(-p)};
        case Relation::ModEq: {
            std::vector<Constraint> out;
            Int r0 = mod_floor(c.residue, c.modulus);
            for (Int r = 0; r < c.modulus; ++r)
                if (r != r0) out.push_back(Constraint::mod_eq(p, c.modulus, r));
            return out;
        }
    }
    return {};
}

inline ConstraintSystem to_dnf(const BoolExprPtr& e, bool negated) {
    switch (e->kind) {
        case BoolExpr::Kind::Leaf: {
            if (!negated) return system_of_constraint(e->leaf);
            ConstraintSystem s;
            for (auto& c : negate_linear(e->leaf)) s.clauses.push_back(Clause{c});
            return s;
        }
        case BoolExpr::Kind::Not: return to_dnf(e->children[0], !negated);
        case BoolExpr::Kind::And:
        case BoolExpr::Kind::Or: {
            bool conj = (e->kind == BoolExpr::Kind::And) != negated;
            ConstraintSystem acc = conj ? ConstraintSystem::top() : ConstraintSystem::bottom();
            for (auto& c : e->children) {
                ConstraintSystem s = to_dnf(c, negated);
                acc = conj ? (acc & s) : (acc | s);
            }
            return acc;
        }
    }
    return ConstraintSystem::bottom();
}

}  // namespace detail

// Lemma-style normalization: boolean expression over linear constraints (with
// congruences) into a purely linear DNF system. Each congruence p = r (mod m)
// becomes p - r - m*b = 0 for a fresh variable b; projecting the solution set
// back to the original variables is faithful since b is determined.
struct NormalizedExpression {
    ConstraintSystem system;
    std::vector<VarId> auxiliaries;
};

inline NormalizedExpression normalize_expression(const BoolExprPtr& expr) {
    ConstraintSystem dnf = detail::to_dnf(expr, false);
    std::set<VarId> used;
    expr->collect_vars(used);
    FreshVars fresh(used);
    NormalizedExpression out;
    for (auto& cl : dnf.clauses) {
        Clause ncl;
        for (auto& c : cl.constraints) {
            if (c.rel == Relation::ModEq) {
                VarId b = fresh.next();
                out.auxiliaries.push_back(b);
                AffineForm f = c.affine();
                f.constant() -= c.residue;
                f.add_term(b, -c.modulus);
                ncl.add(Constraint::eq(f));
            } else {
                ncl.add(c);
            }
        }
        out.system.clauses.push_back(std::move(ncl));
    }
    return out;
}

// Replaces congruences in-place by fresh-variable equalities (used by the
// linear solver before classification).
inline Clause expand_congruences(const Clause& cl, FreshVars& fresh, std::vector<VarId>* added = nullptr) {
    Clause out;
    for (auto& c : cl.constraints) {
        if (!c.is_quadratic() && c.rel == Relation::ModEq) {
            VarId b = fresh.next();
            if (added) added->push_back(b);
            AffineForm f = c.affine();
            f.constant() -= c.residue;
            f.add_term(b, -c.modulus);
            out.add(Constraint::eq(f));
        } else {
            out.add(c);
        }
    }
    return out;
}

}  // namespace dehnfill
