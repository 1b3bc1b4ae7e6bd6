#pragma once

#include "dehnfill/boolexpr.hpp"
#include "dehnfill/simplex.hpp"
#include "dehnfill/solution.hpp"

#include <cassert>
#include <numeric>

namespace dehnfill {

// ---------------------------------------------------------------------------
// Integer linear algebra: solve A x = d over Z by column reduction.
// Returns particular solution x0 and a lattice basis U (columns) of the
// kernel, so the full solution set is { x0 + U t : t in Z^f }.
// ---------------------------------------------------------------------------

struct LatticeSolution {
    bool feasible = false;
    std::vector<Int> x0;               // size n
    std::vector<std::vector<Int>> U;   // n rows, f columns
    size_t free_count = 0;
};

inline LatticeSolution lattice_solve(std::vector<std::vector<Int>> A, std::vector<Int> d) {
    const size_t m = A.size();
    const size_t n = m == 0 ? 0 : A[0].size();
    // column-operation transform: x = T t  with T unimodular
    std::vector<std::vector<Int>> T(n, std::vector<Int>(n, 0));
    for (size_t i = 0; i < n; ++i) T[i][i] = 1;

    auto col_axpy = [&](size_t dst, size_t src, const Int& q) {  // col dst -= q * col src
        for (size_t r = 0; r < m; ++r) A[r][dst] -= q * A[r][src];
        for (size_t r = 0; r < n; ++r) T[r][dst] -= q * T[r][src];
    };
    auto col_swap = [&](size_t i, size_t j) {
        for (size_t r = 0; r < m; ++r) std::swap(A[r][i], A[r][j]);
        for (size_t r = 0; r < n; ++r) std::swap(T[r][i], T[r][j]);
    };
    auto col_neg = [&](size_t i) {
        for (size_t r = 0; r < m; ++r) A[r][i] = -A[r][i];
        for (size_t r = 0; r < n; ++r) T[r][i] = -T[r][i];
    };

    std::vector<size_t> pivot_col(m, SIZE_MAX);
    size_t c = 0;
    for (size_t r = 0; r < m && c < n; ++r) {
        // reduce row r over columns >= c to a single nonzero entry at c
        while (true) {
            size_t best = SIZE_MAX;
            for (size_t j = c; j < n; ++j)
                if (A[r][j] != 0 && (best == SIZE_MAX || abs_int(A[r][j]) < abs_int(A[r][best])))
                    best = j;
            if (best == SIZE_MAX) break;  // all-zero row segment
            if (best != c) col_swap(best, c);
            bool clean = true;
            for (size_t j = c + 1; j < n; ++j) {
                if (A[r][j] == 0) continue;
                Int q = A[r][j] / A[r][c];
                if (q != 0) col_axpy(j, c, q);
                if (A[r][j] != 0) clean = false;
            }
            if (clean) break;
        }
        if (A[r][c] != 0) {
            if (A[r][c] < 0) col_neg(c);
            pivot_col[r] = c;
            ++c;
        }
    }

    // Solve (A T) t = d by forward substitution on pivot structure.
    LatticeSolution out;
    std::vector<Int> t(n, 0);
    for (size_t r = 0; r < m; ++r) {
        Int lhs = 0;
        size_t pc = pivot_col[r];
        for (size_t j = 0; j < n; ++j)
            if (j != pc && A[r][j] != 0) lhs += A[r][j] * t[j];
        Int rhs = d[r] - lhs;
        if (pc == SIZE_MAX) {
            if (rhs != 0) return out;  // inconsistent
        } else {
            if (rhs % A[r][pc] != 0) return out;  // no integral solution
            t[pc] = rhs / A[r][pc];
        }
    }
    out.feasible = true;
    out.x0.assign(n, 0);
    for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < n; ++j)
            if (t[j] != 0) out.x0[i] += T[i][j] * t[j];
    // free columns: those never used as pivot
    std::vector<bool> is_pivot(n, false);
    for (size_t r = 0; r < m; ++r)
        if (pivot_col[r] != SIZE_MAX) is_pivot[pivot_col[r]] = true;
    for (size_t j = 0; j < n; ++j)
        if (!is_pivot[j]) ++out.free_count;
    out.U.assign(n, std::vector<Int>(out.free_count, 0));
    size_t fc = 0;
    for (size_t j = 0; j < n; ++j) {
        if (is_pivot[j]) continue;
        for (size_t i = 0; i < n; ++i) out.U[i][fc] = T[i][j];
        ++fc;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Inequality rows  a.x + c <= 0  over indexed variables.
// ---------------------------------------------------------------------------

struct IneqRow {
    std::vector<Int> a;
    Int c;
};

// gcd-tighten: divide by content and round the constant inward.
inline bool tighten_row(IneqRow& row) {  // returns false if row is the contradiction 0 <= -c < 0
    Int g = 0;
    for (auto& x : row.a) g = gcd_int(g, x);
    if (g == 0) return row.c <= 0;
    if (g > 1) {
        for (auto& x : row.a) x /= g;
        row.c = div_ceil(row.c, g);
    }
    return true;
}

namespace detail {

inline Int eval_row(const IneqRow& r, const std::vector<Int>& x) {
    Int v = r.c;
    for (size_t i = 0; i < r.a.size(); ++i)
        if (r.a[i] != 0) v += r.a[i] * x[i];
    return v;
}

// substitute variable k := value, shrinking the coordinate out of the rows
inline std::vector<IneqRow> substitute_var(const std::vector<IneqRow>& rows, size_t k, const Int& val) {
    std::vector<IneqRow> out;
    out.reserve(rows.size());
    for (auto& r : rows) {
        IneqRow nr;
        nr.c = r.c + r.a[k] * val;
        nr.a.reserve(r.a.size() - 1);
        for (size_t i = 0; i < r.a.size(); ++i)
            if (i != k) nr.a.push_back(r.a[i]);
        out.push_back(std::move(nr));
    }
    return out;
}

// Omega-test feasibility with witness for { a.x + c <= 0 } over Z^n.
// Returns an integer point if one exists.
inline std::optional<std::vector<Int>> omega_feasible(std::vector<IneqRow> rows, size_t nvars) {
    // normalize
    std::vector<IneqRow> norm;
    for (auto& r : rows) {
        bool nonzero = false;
        for (auto& x : r.a)
            if (x != 0) nonzero = true;
        if (!nonzero) {
            if (r.c > 0) return std::nullopt;
            continue;
        }
        if (!tighten_row(r)) return std::nullopt;
        norm.push_back(std::move(r));
    }
    rows = std::move(norm);
    if (nvars == 0) return std::vector<Int>{};
    if (rows.empty()) return std::vector<Int>(nvars, 0);

    // variable occurrence signs
    std::vector<bool> has_pos(nvars, false), has_neg(nvars, false);
    for (auto& r : rows)
        for (size_t i = 0; i < nvars; ++i) {
            if (r.a[i] > 0) has_pos[i] = true;
            if (r.a[i] < 0) has_neg[i] = true;
        }

    // unused variable: drop it
    for (size_t k = 0; k < nvars; ++k) {
        if (has_pos[k] || has_neg[k]) continue;
        std::vector<IneqRow> rest = substitute_var(rows, k, 0);
        auto sub = omega_feasible(std::move(rest), nvars - 1);
        if (!sub) return std::nullopt;
        std::vector<Int> x = *sub;
        x.insert(x.begin() + static_cast<long>(k), 0);
        return x;
    }

    // one-signed variable: satisfiable for x_k pushed far enough
    for (size_t k = 0; k < nvars; ++k) {
        if (has_pos[k] && has_neg[k]) continue;
        std::vector<IneqRow> rest;
        std::vector<IneqRow> own;
        for (auto& r : rows)
            (r.a[k] == 0 ? rest : own).push_back(r);
        std::vector<IneqRow> rest_small = substitute_var(rest, k, 0);
        auto sub = omega_feasible(std::move(rest_small), nvars - 1);
        if (!sub) return std::nullopt;
        std::vector<Int> x = *sub;
        x.insert(x.begin() + static_cast<long>(k), 0);
        // now choose x_k satisfying its one-sided bounds
        if (!own.empty()) {
            bool upper = has_pos[k];  // a_k x_k <= -(rest)
            std::optional<Int> bound;
            for (auto& r : own) {
                Int rest_val = eval_row(r, x) - r.a[k] * x[k];
                // a_k x_k + rest_val <= 0
                Int lim = upper ? div_floor(-rest_val, r.a[k]) : div_ceil(-rest_val, r.a[k]);
                if (!bound)
                    bound = lim;
                else
                    bound = upper ? std::min(*bound, lim) : std::max(*bound, lim);
            }
            x[k] = *bound;
        }
        return x;
    }

    // pick elimination variable: smallest max |coefficient|
    size_t k = 0;
    Int best_score = -1;
    for (size_t i = 0; i < nvars; ++i) {
        Int mx = 0;
        for (auto& r : rows) mx = std::max(mx, abs_int(r.a[i]));
        if (best_score < 0 || mx < best_score) {
            best_score = mx;
            k = i;
        }
    }

    struct Bound {
        IneqRow row;  // the original row
        Int coef;     // |a_k|
    };
    std::vector<Bound> lowers, uppers;  // lower: b x_k >= l(x); upper: a x_k <= u(x)
    std::vector<IneqRow> others;
    for (auto& r : rows) {
        if (r.a[k] == 0)
            others.push_back(r);
        else if (r.a[k] > 0)
            uppers.push_back({r, r.a[k]});
        else
            lowers.push_back({r, -r.a[k]});
    }

    auto drop_k = [&](const IneqRow& r) {
        IneqRow nr;
        nr.c = r.c;
        for (size_t i = 0; i < r.a.size(); ++i)
            if (i != k) nr.a.push_back(r.a[i]);
        return nr;
    };

    auto lift = [&](std::vector<Int> xr) -> std::vector<Int> {
        std::vector<Int> x = xr;
        x.insert(x.begin() + static_cast<long>(k), 0);
        // x_k in [max ceil(l/b), min floor(u/a)]
        std::optional<Int> lo, hi;
        for (auto& L : lowers) {
            Int lval = -(eval_row(L.row, x) - L.row.a[k] * x[k]);  // b x_k >= lval
            Int v = div_ceil(lval, L.coef);
            lo = lo ? std::max(*lo, v) : v;
        }
        for (auto& Uu : uppers) {
            Int uval = -(eval_row(Uu.row, x) - Uu.row.a[k] * x[k]);  // a x_k <= uval
            Int v = div_floor(uval, Uu.coef);
            hi = hi ? std::min(*hi, v) : v;
        }
        assert(lo && hi && *lo <= *hi);
        x[k] = *lo;
        return x;
    };

    // dark shadow: for each (lower, upper) pair add b*u - a*l >= (a-1)(b-1)
    bool exact = true;
    Int amax = 0;
    for (auto& Uu : uppers) amax = std::max(amax, Uu.coef);
    std::vector<IneqRow> dark = others;
    for (auto& d : dark) d = drop_k(d);
    for (auto& L : lowers)
        for (auto& Uu : uppers) {
            if (L.coef > 1 && Uu.coef > 1) exact = false;
            // rows: L.row = -b x_k + l'(x) <= 0  means  l'(x) <= b x_k
            // U.row =  a x_k + u'(x) <= 0  means  a x_k <= -u'(x)
            // combined: a*l'(x) + b*u'(x) + gap <= 0
            IneqRow comb;
            comb.a.assign(nvars, 0);
            for (size_t i = 0; i < nvars; ++i)
                comb.a[i] = Uu.coef * L.row.a[i] + L.coef * Uu.row.a[i];
            comb.a[k] = 0;  // cancels by construction
            comb.c = Uu.coef * L.row.c + L.coef * Uu.row.c + (Uu.coef - 1) * (L.coef - 1);
            dark.push_back(drop_k(comb));
        }

    auto dark_res = omega_feasible(dark, nvars - 1);
    if (dark_res) return lift(*dark_res);
    if (exact) return std::nullopt;  // dark == exact projection here

    // splinters: b x_k = l'(x)... actually b x_k = (lower bound) + j
    for (auto& L : lowers) {
        Int jmax = div_floor(amax * L.coef - amax - L.coef, amax);
        for (Int j = 0; j <= jmax; ++j) {
            // equality: b x_k - (-l'(x)) - j = 0  i.e.  b x_k + l'(x)... careful:
            // L.row: l'(x) + (-b) x_k <= 0 with l' = row minus the x_k term.
            // Splinter: b x_k = -l'(x) + j  =>  b x_k + l'(x) - j = 0.
            std::vector<Int> eq(nvars, 0);
            for (size_t i = 0; i < nvars; ++i) eq[i] = L.row.a[i];
            eq[k] = -L.coef;  // same as L.row.a[k]
            // equality row: eq . x + (L.row.c - j) = 0  -- wait: l'(x)+c - b x_k <= 0
            // splinter sets b x_k = l'(x) + c + j, i.e. eq.x + (c + j) = 0 with eq = row.a
            Int cc = L.row.c + j;
            // solve equality over lattice, substitute into all rows
            auto ls = lattice_solve({eq}, {-cc});
            if (!ls.feasible) continue;
            // transformed rows over free params t (dimension nvars-1 normally)
            size_t f = ls.free_count;
            std::vector<IneqRow> sub;
            for (auto& r : rows) {
                IneqRow nr;
                nr.a.assign(f, 0);
                nr.c = r.c;
                for (size_t i = 0; i < nvars; ++i) {
                    if (r.a[i] == 0) continue;
                    nr.c += r.a[i] * ls.x0[i];
                    for (size_t t2 = 0; t2 < f; ++t2) nr.a[t2] += r.a[i] * ls.U[i][t2];
                }
                sub.push_back(std::move(nr));
            }
            auto res = omega_feasible(std::move(sub), f);
            if (res) {
                std::vector<Int> x(nvars, 0);
                for (size_t i = 0; i < nvars; ++i) {
                    x[i] = ls.x0[i];
                    for (size_t t2 = 0; t2 < f; ++t2) x[i] += ls.U[i][t2] * (*res)[t2];
                }
                return x;
            }
        }
    }
    return std::nullopt;
}

inline Int v_scale(const Rat& r, const Int& lcm) { return r.numerator() * (lcm / r.denominator()); }

// Nonzero integer vector in the recession cone { r : B r <= 0 }, if any.
inline std::optional<std::vector<Int>> recession_direction(const std::vector<IneqRow>& rows, size_t nvars) {
    if (nvars == 0) return std::nullopt;
    std::vector<std::vector<Rat>> A;
    std::vector<Rat> b;
    for (auto& r : rows) {
        std::vector<Rat> row(nvars);
        for (size_t i = 0; i < nvars; ++i) row[i] = Rat(r.a[i]);
        A.push_back(std::move(row));
        b.push_back(Rat(0));
    }
    // box constraints keep the LP bounded
    for (size_t i = 0; i < nvars; ++i) {
        std::vector<Rat> e(nvars, Rat(0));
        e[i] = 1;
        A.push_back(e);
        b.push_back(Rat(1));
        e[i] = -1;
        A.push_back(e);
        b.push_back(Rat(1));
    }
    Simplex lp(A, b);
    for (size_t i = 0; i < nvars; ++i) {
        for (int sgn : {+1, -1}) {
            std::vector<Rat> c(nvars, Rat(0));
            c[i] = sgn;
            auto res = lp.maximize(c);
            if (res.status == Simplex::Status::Optimal && res.value > 0) {
                // scale to integers and make primitive
                Int lcm = 1;
                for (auto& v : res.point) lcm = lcm / gcd_int(lcm, v.denominator()) * v.denominator();
                std::vector<Int> dir(nvars);
                Int g = 0;
                for (size_t j = 0; j < nvars; ++j) {
                    dir[j] = v_scale(res.point[j], lcm);
                    g = gcd_int(g, dir[j]);
                }
                if (g > 1)
                    for (auto& x : dir) x /= g;
                return dir;
            }
        }
    }
    return std::nullopt;
}

// Enumerate all integer points of the polytope { a.x + c <= 0 } (must be
// bounded). Depth-first with exact LP bounds at each level.
inline void enumerate_polytope(const std::vector<IneqRow>& rows, size_t nvars,
                               std::vector<Int>& prefix, std::vector<std::vector<Int>>& out) {
    if (nvars == 0) {
        for (auto& r : rows)
            if (r.c > 0) return;
        out.push_back(prefix);
        return;
    }
    std::vector<std::vector<Rat>> A;
    std::vector<Rat> b;
    for (auto& r : rows) {
        std::vector<Rat> row(nvars);
        for (size_t i = 0; i < nvars; ++i) row[i] = Rat(r.a[i]);
        A.push_back(std::move(row));
        b.push_back(Rat(-r.c));
    }
    Simplex lp(A, b);
    std::vector<Rat> obj(nvars, Rat(0));
    obj[0] = 1;
    auto mx = lp.maximize(obj);
    auto mn = lp.minimize(obj);
    if (mx.status == Simplex::Status::Infeasible || mn.status == Simplex::Status::Infeasible) return;
    if (mx.status != Simplex::Status::Optimal || mn.status != Simplex::Status::Optimal)
        throw std::logic_error("enumerate_polytope: unbounded");
    Int lo = ceil_rat(mn.value), hi = floor_rat(mx.value);
    for (Int v = lo; v <= hi; ++v) {
        prefix.push_back(v);
        auto sub = substitute_var(rows, 0, v);
        enumerate_polytope(sub, nvars - 1, prefix, out);
        prefix.pop_back();
    }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// eliminate_equalities
// ---------------------------------------------------------------------------

struct SubstitutionRecord {
    // original variable -> affine form over the output clause's variables
    std::map<VarId, AffineForm> back;

    Valuation back_substitute(const Valuation& sol) const {
        Valuation full = sol;
        for (auto& [v, f] : back) full[v] = f.evaluate(sol);
        return full;
    }
};

struct EliminationResult {
    Clause clause;
    SubstitutionRecord record;
    bool contradiction = false;  // an equality was integrally unsolvable
    size_t eliminated = 0;
};

// Remove linear equalities from a clause by unimodular substitution. Unit
// pivots are taken directly; the residual equality system (if any) is solved
// over the lattice with fresh parameter variables t_i.
inline EliminationResult eliminate_equalities(const Clause& input, const std::string& fresh_prefix = "t") {
    EliminationResult res;
    res.clause = input;
    std::map<VarId, AffineForm> subs;  // original -> current expression

    auto apply_everywhere = [&](const VarId& v, const AffineForm& rep) {
        res.clause = res.clause.substituted(v, rep);
        for (auto& [orig, f] : subs) f = f.substituted(v, rep);
        subs[v] = rep;
        ++res.eliminated;
    };

    // pass 1: unit pivots
    bool changed = true;
    while (changed) {
        changed = false;
        for (size_t i = 0; i < res.clause.constraints.size(); ++i) {
            const Constraint& c = res.clause.constraints[i];
            if (c.is_quadratic() || c.rel != Relation::Eq) continue;
            const AffineForm& f = c.affine();
            if (f.is_constant()) {
                if (f.constant() != 0) {
                    res.contradiction = true;
                    return res;
                }
                res.clause.constraints.erase(res.clause.constraints.begin() + static_cast<long>(i));
                changed = true;
                break;
            }
            VarId pivot;
            Int pc = 0;
            for (auto& [v, co] : f.coeffs())
                if (co == 1 || co == -1) {
                    pivot = v;
                    pc = co;
                    break;
                }
            if (pc == 0) continue;
            // pivot + pc^-1 * rest = 0  =>  pivot = -pc * (f - pc*pivot)
            AffineForm rest = f;
            rest.set_coeff(pivot, 0);
            AffineForm rep = rest * (-pc);  // pc in {1,-1}
            res.clause.constraints.erase(res.clause.constraints.begin() + static_cast<long>(i));
            apply_everywhere(pivot, rep);
            changed = true;
            break;
        }
    }

    // pass 2: residual equalities via lattice solve over fresh parameters
    std::vector<const AffineForm*> eqs;
    for (auto& c : res.clause.constraints)
        if (!c.is_quadratic() && c.rel == Relation::Eq) eqs.push_back(&c.affine());
    if (!eqs.empty()) {
        std::set<VarId> vs;
        for (auto* f : eqs) f->collect_vars(vs);
        std::vector<VarId> order(vs.begin(), vs.end());
        std::vector<std::vector<Int>> A;
        std::vector<Int> d;
        for (auto* f : eqs) {
            std::vector<Int> row(order.size(), 0);
            for (size_t i = 0; i < order.size(); ++i) row[i] = f->coeff(order[i]);
            A.push_back(std::move(row));
            d.push_back(-f->constant());
        }
        auto ls = lattice_solve(A, d);
        if (!ls.feasible) {
            res.contradiction = true;
            return res;
        }
        std::set<VarId> used = input.vars();
        FreshVars fresh(used, fresh_prefix);
        std::vector<VarId> params;
        for (size_t j = 0; j < ls.free_count; ++j) params.push_back(fresh.next());
        // representations x_i = x0_i + sum U[i][j] t_j
        std::vector<AffineForm> reps(order.size());
        for (size_t i = 0; i < order.size(); ++i) {
            AffineForm f(ls.x0[i]);
            for (size_t j = 0; j < ls.free_count; ++j) f.add_term(params[j], ls.U[i][j]);
            reps[i] = f;
        }
        Clause ncl;
        for (auto& c : res.clause.constraints) {
            if (!c.is_quadratic() && c.rel == Relation::Eq) continue;  // solved
            Constraint nc = c;
            for (size_t i = 0; i < order.size(); ++i) nc = nc.substituted(order[i], reps[i]);
            ncl.add(std::move(nc));
        }
        res.clause = std::move(ncl);
        for (auto& [orig, f] : subs) {
            for (size_t i = 0; i < order.size(); ++i) f = f.substituted(order[i], reps[i]);
        }
        for (size_t i = 0; i < order.size(); ++i) subs[order[i]] = reps[i];
        res.eliminated += order.size();
    }

    res.record.back = std::move(subs);
    return res;
}

// ---------------------------------------------------------------------------
// classify_linear_clause
// ---------------------------------------------------------------------------

namespace detail {

struct LinearizedClause {
    std::vector<VarId> order;          // original (non-aux) variables first
    std::vector<VarId> full_order;     // including congruence auxiliaries
    std::vector<IneqRow> ineqs;        // over full_order after equality elimination? (no: raw)
};

}  // namespace detail

// Decides Empty / Finite(list) / Infinite(stream) for a purely linear clause.
// Total: never returns UnknownBeyondRadius.
inline SolutionClassification classify_linear_clause(const Clause& input) {
    for (auto& c : input.constraints)
        if (c.is_quadratic()) throw std::invalid_argument("classify_linear_clause: quadratic constraint");

    std::set<VarId> orig_vars = input.vars();

    // congruences -> equalities with fresh auxiliaries
    FreshVars fresh(orig_vars, "mod");
    std::vector<VarId> aux;
    Clause cl = expand_congruences(input, fresh, &aux);

    // strict -> weak
    for (auto& c : cl.constraints)
        if (c.rel == Relation::Lt) {
            AffineForm f = c.affine();
            f.constant() += 1;
            c = Constraint::le(std::move(f));
        }

    // eliminate equalities
    EliminationResult el = eliminate_equalities(cl, "lt");
    if (el.contradiction) return SolutionClassification::empty();

    std::set<VarId> free_vars = el.clause.vars();
    std::vector<VarId> order(free_vars.begin(), free_vars.end());
    const size_t f = order.size();

    std::vector<IneqRow> rows;
    for (auto& c : el.clause.constraints) {
        if (c.rel != Relation::Le) throw std::logic_error("unexpected relation after elimination");
        IneqRow r;
        r.a.assign(f, 0);
        for (size_t i = 0; i < f; ++i) r.a[i] = c.affine().coeff(order[i]);
        r.c = c.affine().constant();
        if (!tighten_row(r)) return SolutionClassification::empty();
        rows.push_back(std::move(r));
    }

    // captured by value: the closure survives inside returned sample streams
    auto to_original = [record = el.record, orig_vars, order](const std::vector<Int>& t) {
        Valuation v;
        for (size_t i = 0; i < order.size(); ++i) v[order[i]] = t[i];
        Valuation full = record.back_substitute(v);
        Valuation out;
        for (auto& var : orig_vars) {
            auto it = full.find(var);
            out[var] = it == full.end() ? Int(0) : it->second;  // unconstrained original var
        }
        return out;
    };

    // Unconstrained original variables (not mentioned anywhere after
    // elimination and not eliminated): they make any nonempty set infinite.
    std::set<VarId> mentioned = free_vars;
    for (auto& [v, fform] : el.record.back) mentioned.insert(v);
    std::vector<VarId> dangling;
    for (auto& v : orig_vars)
        if (!mentioned.count(v)) dangling.push_back(v);

    if (f == 0) {
        for (auto& r : rows)
            if (r.c > 0) return SolutionClassification::empty();
        Valuation base = to_original({});
        if (dangling.empty()) return SolutionClassification::finite({base});
        auto fs = streams::free_stream(dangling);
        return SolutionClassification::infinite([base, fs, dangling](size_t n) {
            auto pts = fs(n);
            std::vector<Valuation> out;
            for (auto& p : pts) out.push_back(streams::merge(base, p));
            return out;
        });
    }

    auto dir = detail::recession_direction(rows, f);
    if (dir) {
        auto w = detail::omega_feasible(rows, f);
        if (!w) return SolutionClassification::empty();
        std::vector<Int> t0 = *w, r = *dir;
        return SolutionClassification::infinite([t0, r, to_original, f](size_t n) {
            std::vector<Valuation> out;
            std::set<Valuation> seen;
            std::vector<Int> t = t0;
            size_t k = 0;
            while (out.size() < n) {
                Valuation v = to_original(t);
                if (seen.insert(v).second) out.push_back(std::move(v));
                ++k;
                for (size_t i = 0; i < f; ++i) t[i] = t0[i] + Int(k) * r[i];
            }
            return out;
        });
    }

    // bounded: enumerate lattice points
    std::vector<std::vector<Int>> pts;
    std::vector<Int> prefix;
    detail::enumerate_polytope(rows, f, prefix, pts);
    if (pts.empty()) return SolutionClassification::empty();
    std::vector<Valuation> sols;
    sols.reserve(pts.size());
    for (auto& p : pts) sols.push_back(to_original(p));
    auto cls = SolutionClassification::finite(std::move(sols));
    if (dangling.empty() || cls.is_empty()) return cls;
    auto fs = streams::free_stream(dangling);
    auto base_sols = cls.solutions;
    return SolutionClassification::infinite([base_sols, fs](size_t n) {
        auto pts2 = fs((n + base_sols.size() - 1) / base_sols.size() + 1);
        std::vector<Valuation> out;
        for (auto& p : pts2)
            for (auto& b : base_sols) {
                out.push_back(streams::merge(b, p));
                if (out.size() >= n) return out;
            }
        return out;
    });
}

// Quick helper: is the clause integrally satisfiable at all.
inline bool linear_clause_feasible(const Clause& cl) {
    auto c = classify_linear_clause(cl);
    return !c.is_empty();
}

}  // namespace dehnfill
