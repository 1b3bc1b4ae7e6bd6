#pragma once

#include "dehnfill/constraint.hpp"
#include "dehnfill/seifert.hpp"

namespace dehnfill {

struct NonCoprime : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Lens space L(p, q): two solid tori glued so that the meridian maps to
// q*m + p*l. Oriented; p may be negative; L(0, +-1) is S2 x S1.
struct LensSpace {
    Int p, q;

    LensSpace(Int p_, Int q_) : p(std::move(p_)), q(std::move(q_)) {
        if (p == 0) {
            if (q != 1 && q != -1) throw std::invalid_argument("L(0,q) needs q = +-1");
        } else if (gcd_int(p, q) != 1) {
            throw std::invalid_argument("LensSpace: gcd(p,q) != 1");
        }
    }
    bool operator==(const LensSpace& o) const { return p == o.p && q == o.q; }
    std::string str() const { return "L(" + p.str() + "," + q.str() + ")"; }
};

// Orientation-preserving homeomorphism: p' = e p and q' = e q^{+-1} (mod p).
inline bool lens_homeomorphic(const LensSpace& l1, const LensSpace& l2) {
    for (int e : {1, -1}) {
        if (l2.p != Int(e) * l1.p) continue;
        Int m = abs_int(l1.p);
        if (m == 0) {
            if (l2.q == Int(e) * l1.q) return true;  // q = +-1: self-inverse
            continue;
        }
        if (mod_floor(l2.q - Int(e) * l1.q, m) == 0) return true;
        if (mod_floor(l1.q * l2.q - Int(e), m) == 0) return true;  // q' = e q^{-1}
    }
    return false;
}

// Does [S2, b0/a0, b1/a1] fibre the given lens space? Lemma-style exact
// check: with b0 y - a0 x = -1 fixed once, the residue -y b1 - a1 x mod p is
// independent of the Bezout choice.
inline bool s2_fibration_check(const Int& b0, const Int& a0, const Int& b1, const Int& a1,
                               const LensSpace& target) {
    if (gcd_int(a0, b0) != 1 || gcd_int(a1, b1) != 1) throw NonCoprime("s2_fibration_check");
    Int pval = b1 * a0 + a1 * b0;
    for (int e : {1, -1}) {
        if (pval != Int(e) * target.p) continue;
        // solve b0 y - a0 x = -1
        auto [g, u, v] = gcd_ext(b0, -a0);  // g = b0 u - a0 v
        if (g != 1) continue;               // impossible given coprimality
        Int y = -u, x = -v;                 // b0 y - a0 x = -1
        Int s = -y * b1 - a1 * x;
        Int m = abs_int(target.p);
        for (int inv : {0, 1}) {
            Int qq = target.q;
            if (inv) {
                if (m == 0) continue;  // q self-inverse handled below
                if (gcd_int(qq, m) != 1) continue;
                qq = inverse_mod(qq, m);
            }
            if (m == 0) {
                if (s == Int(e) * qq) return true;
            } else if (mod_floor(s - Int(e) * qq, m) == 0) {
                return true;
            }
        }
    }
    return false;
}

// Lemma condition (1): L(p,q) fibres as [RP2, b/a] iff for some k != 0:
// p = 4k, q = 2k -+ 1 (mod p), b/a = +-1/k.
inline bool rp2_fibration_check(const Int& b, const Int& a, const LensSpace& target) {
    if (gcd_int(a, b) != 1) throw NonCoprime("rp2_fibration_check");
    if (target.p == 0 || target.p % 4 != 0) return false;
    Int k = target.p / 4;
    if (k == 0) return false;
    Int m = abs_int(target.p);
    // q = 2k + 1 branch pairs with b/a = -1/k; q = 2k - 1 with b/a = +1/k
    if (mod_floor(target.q - (2 * k + 1), m) == 0 && b * k == -a) return true;
    if (mod_floor(target.q - (2 * k - 1), m) == 0 && b * k == a) return true;
    return false;
}

// Mono-quadratic system detecting coprime pairs (a1,b1), (a2,b2) with
// [S2, b1/a1, b2/a2] a fibration of L(p,q). Variables a1,b1,a2,b2 plus
// Bezout auxiliaries x,y; coprimality of (a2,b2) encoded by congruence
// clauses over the prime divisors of p.
inline ConstraintSystem lens_quadratic_system(const LensSpace& target, const std::string& var_prefix = "") {
    if (target.p == 0) throw ZeroP("lens_quadratic_system: p = 0");
    VarId a1(var_prefix + "a1"), b1(var_prefix + "b1"), a2(var_prefix + "a2"), b2(var_prefix + "b2");
    VarId x(var_prefix + "x"), y(var_prefix + "y");

    Int m = abs_int(target.p);
    Int qplus = target.q;
    // gcd(q, p) = 1 so the inverse exists; least nonnegative representative
    Int qminus = m == 1 ? Int(0) : inverse_mod(mod_floor(target.q, m), m);

    ConstraintSystem out = ConstraintSystem::bottom();
    std::vector<Int> qbranches = {qplus, qminus};
    if (mod_floor(qplus - qminus, m) == 0) qbranches.pop_back();
    for (int e : {1, -1}) {
        for (const Int& qb : qbranches) {
            Clause cl;
            // b1*y - a1*x = -1
            QuadraticForm bez;
            bez.add_quad_term(b1, y, 1);
            bez.add_quad_term(a1, x, -1);
            bez.linear().constant() = 1;
            cl.add(Constraint::eq(bez));
            // b2 = x e p + e qb b1;  a2 = -y e p - e qb a1
            AffineForm f1 = AffineForm::variable(b2);
            f1.add_term(x, -Int(e) * target.p);
            f1.add_term(b1, -Int(e) * qb);
            cl.add(Constraint::eq(f1));
            AffineForm f2 = AffineForm::variable(a2);
            f2.add_term(y, Int(e) * target.p);
            f2.add_term(a1, Int(e) * qb);
            cl.add(Constraint::eq(f2));
            // coprimality: gcd(a2,b2) divides p, so exclude each prime r | p
            ConstraintSystem branch = system_of_clause(cl);
            Int rest = m;
            for (Int r = 2; r * r <= rest; ++r) {
                if (rest % r != 0) continue;
                while (rest % r == 0) rest /= r;
                ConstraintSystem cop = ConstraintSystem::bottom();
                for (Int res = 1; res < r; ++res) {
                    cop.clauses.push_back(Clause{Constraint::mod_eq(AffineForm::variable(a2), r, res)});
                    cop.clauses.push_back(Clause{Constraint::mod_eq(AffineForm::variable(b2), r, res)});
                }
                branch = branch & cop;
            }
            if (rest >= 2) {
                ConstraintSystem cop = ConstraintSystem::bottom();
                for (Int res = 1; res < rest; ++res) {
                    cop.clauses.push_back(Clause{Constraint::mod_eq(AffineForm::variable(a2), rest, res)});
                    cop.clauses.push_back(Clause{Constraint::mod_eq(AffineForm::variable(b2), rest, res)});
                }
                branch = branch & cop;
            }
            out = out | branch;
        }
    }
    out.partition = VariablePartition{{a1, b1, a2, b2, x, y}};
    out.canonicalize();
    return out;
}

}  // namespace dehnfill
