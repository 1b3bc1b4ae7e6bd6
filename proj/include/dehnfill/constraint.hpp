#pragma once

#include "dehnfill/forms.hpp"

#include <algorithm>
#include <optional>
#include <sstream>
#include <variant>
#include <vector>

namespace dehnfill {

enum class Relation { Eq, Le, Lt, ModEq };

// One (in)equality `lhs <rel> 0`, or `lhs = r (mod m)` for ModEq.
// Quadratic lhs is only legal with Relation::Eq.
struct Constraint {
    std::variant<AffineForm, QuadraticForm> lhs;
    Relation rel = Relation::Eq;
    Int modulus = 0;  // ModEq only, >= 2
    Int residue = 0;  // ModEq only

    Constraint() = default;
    Constraint(AffineForm f, Relation r) : lhs(std::move(f)), rel(r) {
        if (r == Relation::ModEq) throw std::invalid_argument("use mod_eq()");
    }
    Constraint(QuadraticForm q, Relation r) : lhs(std::move(q)), rel(r) {
        if (r != Relation::Eq) throw std::invalid_argument("quadratic constraints must be equalities");
    }

    static Constraint eq(AffineForm f) { return Constraint(std::move(f), Relation::Eq); }
    static Constraint le(AffineForm f) { return Constraint(std::move(f), Relation::Le); }
    static Constraint lt(AffineForm f) { return Constraint(std::move(f), Relation::Lt); }
    static Constraint eq(QuadraticForm q) { return Constraint(std::move(q), Relation::Eq); }
    static Constraint mod_eq(AffineForm f, Int m, Int r) {
        if (m < 2) throw std::invalid_argument("modulus must be >= 2");
        Constraint c;
        c.lhs = std::move(f);
        c.rel = Relation::ModEq;
        c.modulus = std::move(m);
        c.residue = std::move(r);
        return c;
    }

    bool is_quadratic() const { return std::holds_alternative<QuadraticForm>(lhs); }
    const AffineForm& affine() const { return std::get<AffineForm>(lhs); }
    const QuadraticForm& quadratic() const { return std::get<QuadraticForm>(lhs); }

    bool satisfied(const Valuation& v) const {
        Int val = is_quadratic() ? quadratic().evaluate(v) : affine().evaluate(v);
        switch (rel) {
            case Relation::Eq: return val == 0;
            case Relation::Le: return val <= 0;
            case Relation::Lt: return val < 0;
            case Relation::ModEq: return mod_floor(val - residue, modulus) == 0;
        }
        return false;
    }

    void collect_vars(std::set<VarId>& out) const {
        if (is_quadratic())
            quadratic().collect_vars(out);
        else
            affine().collect_vars(out);
    }

    Constraint substituted(const VarId& var, const AffineForm& rep) const {
        Constraint c = *this;
        if (is_quadratic()) {
            QuadraticForm q = quadratic().substituted(var, rep);
            if (q.is_affine())
                c.lhs = q.linear();
            else
                c.lhs = q;
        } else {
            c.lhs = affine().substituted(var, rep);
        }
        return c;
    }

    bool operator==(const Constraint& o) const {
        return lhs == o.lhs && rel == o.rel && modulus == o.modulus && residue == o.residue;
    }
    bool operator<(const Constraint& o) const {
        if (rel != o.rel) return rel < o.rel;
        if (modulus != o.modulus) return modulus < o.modulus;
        if (residue != o.residue) return residue < o.residue;
        return lhs < o.lhs;
    }
};

// Conjunction of constraints.
struct Clause {
    std::vector<Constraint> constraints;

    Clause() = default;
    Clause(std::initializer_list<Constraint> cs) : constraints(cs) {}

    void add(Constraint c) { constraints.push_back(std::move(c)); }

    bool satisfied(const Valuation& v) const {
        for (auto& c : constraints)
            if (!c.satisfied(v)) return false;
        return true;
    }
    void collect_vars(std::set<VarId>& out) const {
        for (auto& c : constraints) c.collect_vars(out);
    }
    std::set<VarId> vars() const {
        std::set<VarId> s;
        collect_vars(s);
        return s;
    }
    size_t quadratic_count() const {
        size_t n = 0;
        for (auto& c : constraints) n += c.is_quadratic();
        return n;
    }
    Clause substituted(const VarId& var, const AffineForm& rep) const {
        Clause r;
        for (auto& c : constraints) r.add(c.substituted(var, rep));
        return r;
    }
    void canonicalize() {
        std::sort(constraints.begin(), constraints.end());
        constraints.erase(std::unique(constraints.begin(), constraints.end()), constraints.end());
    }
    bool operator==(const Clause& o) const { return constraints == o.constraints; }
    bool operator<(const Clause& o) const { return constraints < o.constraints; }
};

using VariablePartition = std::vector<std::set<VarId>>;

// Disjunction of clauses (the paper's collection of sets S_i), with an
// optional variable partition witnessing mono-quadratic structure.
struct ConstraintSystem {
    std::vector<Clause> clauses;
    std::optional<VariablePartition> partition;

    static ConstraintSystem bottom() { return {}; }
    static ConstraintSystem top() {
        ConstraintSystem s;
        s.clauses.emplace_back();
        return s;
    }

    bool is_bottom() const { return clauses.empty(); }

    bool satisfied(const Valuation& v) const {
        for (auto& cl : clauses)
            if (cl.satisfied(v)) return true;
        return false;
    }
    std::set<VarId> vars() const {
        std::set<VarId> s;
        for (auto& cl : clauses) cl.collect_vars(s);
        return s;
    }

    // Disjunction: concatenate clause lists.
    ConstraintSystem operator|(const ConstraintSystem& o) const {
        ConstraintSystem r = *this;
        r.partition.reset();
        for (auto& c : o.clauses) r.clauses.push_back(c);
        return r;
    }
    // Conjunction: distribute over clauses.
    ConstraintSystem operator&(const ConstraintSystem& o) const {
        ConstraintSystem r;
        for (auto& a : clauses)
            for (auto& b : o.clauses) {
                Clause c = a;
                for (auto& x : b.constraints) c.add(x);
                r.clauses.push_back(std::move(c));
            }
        return r;
    }

    void canonicalize() {
        for (auto& c : clauses) c.canonicalize();
        std::sort(clauses.begin(), clauses.end());
        clauses.erase(std::unique(clauses.begin(), clauses.end()), clauses.end());
    }
};

inline ConstraintSystem system_of_clause(Clause c) {
    ConstraintSystem s;
    s.clauses.push_back(std::move(c));
    return s;
}
inline ConstraintSystem system_of_constraint(Constraint c) {
    Clause cl;
    cl.add(std::move(c));
    return system_of_clause(std::move(cl));
}

// Checks the paper's mono-quadratic discipline for a clause against a
// partition: no constraint spans parts; at most one quadratic equality per
// part; quadratic constraints are equalities (by construction of Constraint).
struct MonoQuadraticReport {
    bool valid = true;
    std::string reason;
};

inline MonoQuadraticReport check_mono_quadratic(const Clause& cl, const VariablePartition& parts) {
    MonoQuadraticReport rep;
    auto part_of = [&](const VarId& v) -> int {
        for (size_t i = 0; i < parts.size(); ++i)
            if (parts[i].count(v)) return int(i);
        return -1;
    };
    std::map<int, int> quad_in_part;
    for (auto& c : cl.constraints) {
        std::set<VarId> vs;
        c.collect_vars(vs);
        int part = -2;
        for (auto& v : vs) {
            int p = part_of(v);
            if (p < 0) {
                rep.valid = false;
                rep.reason = "variable " + v.name + " not covered by partition";
                return rep;
            }
            if (part == -2) part = p;
            if (p != part) {
                rep.valid = false;
                rep.reason = "constraint spans partition parts";
                return rep;
            }
        }
        if (c.is_quadratic() && part >= 0 && ++quad_in_part[part] > 1) {
            rep.valid = false;
            rep.reason = "two quadratic equalities in one part";
            return rep;
        }
    }
    return rep;
}

inline MonoQuadraticReport check_mono_quadratic(const ConstraintSystem& sys) {
    for (auto& cl : sys.clauses) {
        VariablePartition parts;
        if (sys.partition) {
            parts = *sys.partition;
        } else {
            parts.push_back(cl.vars());  // single part
        }
        // Unpartitioned variables of this clause: give each its own part only
        // if a partition was supplied but misses them -- that is an error the
        // checker will report.
        auto rep = check_mono_quadratic(cl, parts);
        if (!rep.valid) return rep;
    }
    return {};
}

// --- canonical text serialization ------------------------------------------

inline std::string render_poly(const AffineForm& f) {
    std::ostringstream os;
    bool first = true;
    for (auto& [v, c] : f.coeffs()) {
        if (!first) os << (c > 0 ? " + " : " - ");
        if (first && c < 0) os << "-";
        Int a = abs_int(c);
        if (a != 1) os << a.str() << "*";
        os << v.name;
        first = false;
    }
    const Int& k = f.constant();
    if (first) {
        os << k.str();
    } else if (k != 0) {
        os << (k > 0 ? " + " : " - ") << abs_int(k).str();
    }
    return os.str();
}

inline std::string render_poly(const QuadraticForm& q) {
    std::ostringstream os;
    bool first = true;
    for (auto& [k, c] : q.quad()) {
        if (!first) os << (c > 0 ? " + " : " - ");
        if (first && c < 0) os << "-";
        Int a = abs_int(c);
        if (a != 1) os << a.str() << "*";
        os << k.first.name << "*" << k.second.name;
        first = false;
    }
    std::string lin = render_poly(q.linear());
    if (first) return lin;
    if (lin == "0") return os.str();
    if (lin[0] == '-')
        os << " - " << lin.substr(1);
    else
        os << " + " << lin;
    return os.str();
}

inline std::string render_constraint(const Constraint& c) {
    std::ostringstream os;
    if (c.is_quadratic())
        os << render_poly(c.quadratic());
    else
        os << render_poly(c.affine());
    switch (c.rel) {
        case Relation::Eq: os << " = 0"; break;
        case Relation::Le: os << " <= 0"; break;
        case Relation::Lt: os << " < 0"; break;
        case Relation::ModEq: os << " = " << c.residue.str() << " mod " << c.modulus.str(); break;
    }
    return os.str();
}

inline std::string render_system_text(const ConstraintSystem& sys) {
    if (sys.is_bottom()) return "_|_\n";
    std::ostringstream os;
    bool first = true;
    for (auto& cl : sys.clauses) {
        if (!first) os << "or\n";
        first = false;
        os << "clause {\n";
        for (auto& c : cl.constraints) os << "  " << render_constraint(c) << "\n";
        os << "}\n";
    }
    return os.str();
}

}  // namespace dehnfill
