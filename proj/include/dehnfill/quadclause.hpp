#pragma once

#include "dehnfill/binquad.hpp"

namespace dehnfill {

struct MalformedClause : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct PartitionViolation : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

constexpr long long kDefaultQuadRadius = 10000;

namespace detail {

// Is the linear part of the clause certified to confine all its variables to
// [-radius, radius]? (Then box search is exhaustive.)
inline bool linear_part_bounds_box(const Clause& cl, const Int& radius) {
    Clause lin;
    for (auto& c : cl.constraints)
        if (!c.is_quadratic()) lin.add(c);
    std::set<VarId> vars = cl.vars();
    if (vars.empty()) return true;
    // congruences do not bound; drop them
    Clause lin2;
    for (auto& c : lin.constraints)
        if (c.rel != Relation::ModEq) lin2.add(c);
    std::vector<VarId> order(vars.begin(), vars.end());
    std::vector<IneqRow> rows;
    for (auto& c : lin2.constraints) {
        IneqRow r;
        r.a.assign(order.size(), 0);
        const AffineForm& f = c.affine();
        for (size_t i = 0; i < order.size(); ++i) r.a[i] = f.coeff(order[i]);
        r.c = f.constant();
        if (c.rel == Relation::Lt) r.c += 1;
        if (c.rel == Relation::Eq) {
            // use both directions
            IneqRow r2 = r;
            for (auto& x : r2.a) x = -x;
            r2.c = -r.c;
            rows.push_back(r2);
        }
        rows.push_back(r);
    }
    if (rows.empty()) return false;
    std::vector<std::vector<Rat>> A;
    std::vector<Rat> b;
    for (auto& r : rows) {
        std::vector<Rat> row(order.size());
        for (size_t i = 0; i < order.size(); ++i) row[i] = Rat(r.a[i]);
        A.push_back(std::move(row));
        b.push_back(Rat(-r.c));
    }
    Simplex lp(A, b);
    for (size_t i = 0; i < order.size(); ++i) {
        std::vector<Rat> obj(order.size(), Rat(0));
        obj[i] = 1;
        auto mx = lp.maximize(obj);
        if (mx.status == Simplex::Status::Infeasible) return true;  // empty region is bounded
        if (mx.status != Simplex::Status::Optimal || mx.value > Rat(radius)) return false;
        auto mn = lp.minimize(obj);
        if (mn.status != Simplex::Status::Optimal || mn.value < -Rat(radius)) return false;
    }
    return true;
}

// Exhaustive box search over all clause variables.
inline SolutionClassification box_search(const Clause& cl, const Int& radius) {
    std::set<VarId> vs = cl.vars();
    std::vector<VarId> vars(vs.begin(), vs.end());
    std::vector<std::vector<size_t>> ready(vars.size() + 1);
    for (size_t ci = 0; ci < cl.constraints.size(); ++ci) {
        std::set<VarId> cvs;
        cl.constraints[ci].collect_vars(cvs);
        size_t depth = 0;
        for (size_t vi = 0; vi < vars.size(); ++vi)
            if (cvs.count(vars[vi])) depth = std::max(depth, vi + 1);
        ready[depth].push_back(ci);
    }
    std::vector<Valuation> found;
    Valuation cur;
    std::function<void(size_t)> rec = [&](size_t depth) {
        for (size_t ci : ready[depth])
            if (!cl.constraints[ci].satisfied(cur)) return;
        if (depth == vars.size()) {
            found.push_back(cur);
            return;
        }
        for (Int v = -radius; v <= radius; ++v) {
            cur[vars[depth]] = v;
            rec(depth + 1);
        }
        cur.erase(vars[depth]);
    };
    rec(0);
    if (linear_part_bounds_box(cl, radius)) return SolutionClassification::finite(std::move(found));
    return SolutionClassification::unknown(radius, std::move(found));
}

inline SolutionClassification from_binquad(const binquad::Classification& bc, const VarId& vx,
                                           const VarId& vy) {
    if (!bc.infinite) {
        std::vector<Valuation> sols;
        for (auto& [x, y] : bc.points) {
            Valuation v;
            v[vx] = x;
            v[vy] = y;
            sols.push_back(std::move(v));
        }
        return SolutionClassification::finite(std::move(sols));
    }
    auto samp = bc.sample;
    VarId cx = vx, cy = vy;
    return SolutionClassification::infinite([samp, cx, cy](size_t n) {
        std::vector<Valuation> out;
        for (auto& [x, y] : samp(n)) {
            Valuation v;
            v[cx] = x;
            v[cy] = y;
            out.push_back(std::move(v));
        }
        return out;
    });
}

}  // namespace detail

// Classify the solutions of a clause containing exactly one quadratic
// equality (plus linear constraints). Complete on the shapes the topology
// compiler emits; general shapes fall back to a bounded box search with an
// explicit UnknownBeyondRadius verdict.
inline SolutionClassification solve_quadratic_clause(const Clause& input,
                                                     Int radius = Int(kDefaultQuadRadius)) {
    if (input.quadratic_count() > 1) throw MalformedClause("more than one quadratic equality");
    if (input.quadratic_count() == 0) return classify_linear_clause(input);

    std::set<VarId> orig_vars = input.vars();
    auto restrict_to_orig = [orig_vars](const Valuation& v) {
        Valuation out;
        for (auto& var : orig_vars) {
            auto it = v.find(var);
            out[var] = it == v.end() ? Int(0) : it->second;
        }
        return out;
    };

    // congruences participate in elimination as-is; expand strict inequalities
    Clause cl = input;
    for (auto& c : cl.constraints)
        if (!c.is_quadratic() && c.rel == Relation::Lt) {
            AffineForm f = c.affine();
            f.constant() += 1;
            c = Constraint::le(std::move(f));
        }

    EliminationResult el = eliminate_equalities(cl, "t");
    if (el.contradiction) return SolutionClassification::empty();

    // Variables referenced by the back-substitution (or surviving originals)
    // that no remaining constraint mentions are genuinely free.
    std::set<VarId> assigned = el.clause.vars();
    std::set<VarId> needed;
    for (auto& [ov, f] : el.record.back) f.collect_vars(needed);
    for (auto& v : orig_vars)
        if (!el.record.back.count(v)) needed.insert(v);
    std::vector<VarId> dangling;
    for (auto& v : needed)
        if (!assigned.count(v)) dangling.push_back(v);

    auto back = [&, dangling](const SolutionClassification& c0) {
        SolutionClassification c = c0;
        if (!dangling.empty() && !c.is_empty())
            c = streams::product(c, SolutionClassification::infinite(streams::free_stream(dangling)));
        SubstitutionRecord rec = el.record;
        return streams::mapped(c, [rec, restrict_to_orig](const Valuation& v) {
            return restrict_to_orig(rec.back_substitute(v));
        });
    };

    // locate the quadratic (it may have collapsed to linear under substitution)
    const QuadraticForm* quad = nullptr;
    for (auto& c : el.clause.constraints)
        if (c.is_quadratic()) quad = &c.quadratic();
    if (!quad) return back(classify_linear_clause(el.clause));

    std::set<VarId> qvars;
    quad->collect_vars(qvars);

    if (qvars.empty()) {
        if (quad->linear().constant() != 0) return SolutionClassification::empty();
        Clause rest;
        for (auto& c : el.clause.constraints)
            if (!c.is_quadratic()) rest.add(c);
        return back(classify_linear_clause(rest));
    }

    if (qvars.size() == 1) {
        // univariate: A x^2 + B x + C = 0
        VarId x = *qvars.begin();
        Int A = quad->quad_coeff(x, x);
        Int B = quad->linear().coeff(x);
        Int C = quad->linear().constant();
        std::vector<Int> roots;
        if (A == 0) {
            if (B != 0 && C % B == 0) roots.push_back(-C / B);
        } else {
            Int disc = B * B - 4 * A * C;
            Int s;
            if (disc >= 0 && is_perfect_square(disc, s)) {
                for (int sg : {+1, -1}) {
                    Int num = -B + Int(sg) * s;
                    if (num % (2 * A) == 0) roots.push_back(num / (2 * A));
                    if (s == 0) break;
                }
            }
        }
        SolutionClassification acc = SolutionClassification::empty();
        for (const Int& r : roots) {
            Clause rest;
            for (auto& c : el.clause.constraints)
                if (!c.is_quadratic()) rest.add(c.substituted(x, AffineForm(r)));
            auto sub = classify_linear_clause(rest);
            Int rc = r;
            VarId xc = x;
            sub = streams::mapped(sub, [xc, rc](const Valuation& v) {
                Valuation out = v;
                out[xc] = rc;
                return out;
            });
            acc = streams::unite(acc, sub);
        }
        return back(acc);
    }

    if (qvars.size() == 2) {
        auto it = qvars.begin();
        VarId vx = *it++;
        VarId vy = *it;
        binquad::Problem pr;
        pr.a = quad->quad_coeff(vx, vx);
        pr.b = quad->quad_coeff(vx, vy);
        pr.c = quad->quad_coeff(vy, vy);
        pr.d = quad->linear().coeff(vx);
        pr.e = quad->linear().coeff(vy);
        pr.f = quad->linear().constant();
        Clause rest, mixed;
        for (auto& c : el.clause.constraints) {
            if (c.is_quadratic()) continue;
            std::set<VarId> cv;
            c.collect_vars(cv);
            bool has_q = cv.count(vx) || cv.count(vy);
            bool has_other = false;
            for (auto& v : cv)
                if (v != vx && v != vy) has_other = true;
            if (has_q && !has_other) {
                binquad::XYConstraint xc;
                xc.g1 = c.affine().coeff(vx);
                xc.g2 = c.affine().coeff(vy);
                xc.g0 = c.affine().constant();
                if (c.rel == Relation::ModEq) {
                    xc.is_congruence = true;
                    xc.mod = c.modulus;
                    xc.res = c.residue;
                } else if (c.rel != Relation::Le) {
                    throw std::logic_error("unexpected relation");
                }
                pr.constraints.push_back(xc);
            } else if (has_q && has_other) {
                mixed.add(c);
            } else {
                rest.add(c);
            }
        }
        auto bc = binquad::classify_two_var(pr);
        if (!mixed.constraints.empty()) {
            if (bc.infinite) {
                // infinite (x,y)-family entangled with other variables: out of
                // the complete subclass; bounded fallback
                return back(detail::box_search(el.clause, radius));
            }
            SolutionClassification acc = SolutionClassification::empty();
            for (auto& [x, y] : bc.points) {
                Clause sub = mixed;
                for (auto& c : rest.constraints) sub.add(c);
                Clause sub2;
                for (auto& c : sub.constraints)
                    sub2.add(c.substituted(vx, AffineForm(x)).substituted(vy, AffineForm(y)));
                auto cls = classify_linear_clause(sub2);
                Int xc = x, yc = y;
                VarId vxc = vx, vyc = vy;
                cls = streams::mapped(cls, [vxc, vyc, xc, yc](const Valuation& v) {
                    Valuation out = v;
                    out[vxc] = xc;
                    out[vyc] = yc;
                    return out;
                });
                acc = streams::unite(acc, cls);
            }
            return back(acc);
        }
        auto xycls = detail::from_binquad(bc, vx, vy);
        auto restcls = classify_linear_clause(rest);
        return back(streams::product(xycls, restcls));
    }

    // >= 3 quadratic variables: affine product shapes
    auto fac = binquad::factor_affine_product(*quad);
    if (fac) {
        if (!fac->kappa_integral) return SolutionClassification::empty();
        Clause rest;
        for (auto& c : el.clause.constraints)
            if (!c.is_quadratic()) rest.add(c);
        SolutionClassification acc = SolutionClassification::empty();
        if (fac->kappa != 0) {
            for (const Int& d1 : binquad::all_divisors(fac->kappa)) {
                Int d2 = fac->kappa / d1;
                Clause sub = rest;
                AffineForm f1 = fac->P1;
                f1.constant() -= d1;
                AffineForm f2 = fac->P2;
                f2.constant() -= d2;
                sub.add(Constraint::eq(f1));
                sub.add(Constraint::eq(f2));
                acc = streams::unite(acc, classify_linear_clause(sub));
            }
        } else {
            for (const AffineForm* P : {&fac->P1, &fac->P2}) {
                Clause sub = rest;
                sub.add(Constraint::eq(*P));
                acc = streams::unite(acc, classify_linear_clause(sub));
            }
        }
        return back(acc);
    }

    return back(detail::box_search(el.clause, radius));
}

// ---------------------------------------------------------------------------
// classify_system: product over partition parts, union over clauses.
// ---------------------------------------------------------------------------

inline SolutionClassification classify_system(const ConstraintSystem& sys,
                                              Int radius = Int(kDefaultQuadRadius)) {
    std::set<VarId> all_vars = sys.vars();
    VariablePartition parts;
    if (sys.partition) {
        parts = *sys.partition;
        std::set<VarId> covered;
        for (auto& p : parts) covered.insert(p.begin(), p.end());
        for (auto& v : all_vars)
            if (!covered.count(v)) throw PartitionViolation("variable not covered: " + v.name);
    } else {
        if (!all_vars.empty()) parts.push_back(all_vars);
    }

    SolutionClassification acc = SolutionClassification::empty();
    for (auto& cl : sys.clauses) {
        // split constraints by part
        std::vector<Clause> per_part(parts.size());
        for (auto& c : cl.constraints) {
            std::set<VarId> cv;
            c.collect_vars(cv);
            if (cv.empty()) {
                // ground constraint
                Valuation empty_val;
                if (!c.satisfied(empty_val)) {
                    per_part.clear();
                    break;
                }
                continue;
            }
            int part = -1;
            for (size_t i = 0; i < parts.size(); ++i) {
                bool inside = true, touches = false;
                for (auto& v : cv) {
                    if (parts[i].count(v))
                        touches = true;
                    else
                        inside = false;
                }
                if (touches) {
                    if (!inside) throw PartitionViolation("constraint spans partition parts");
                    part = int(i);
                    break;
                }
            }
            if (part < 0) throw PartitionViolation("constraint variables not in partition");
            per_part[size_t(part)].add(c);
        }
        if (per_part.empty() && !cl.constraints.empty()) continue;  // ground contradiction

        SolutionClassification clause_cls =
            SolutionClassification::finite({Valuation{}});  // neutral element
        for (size_t i = 0; i < parts.size(); ++i) {
            SolutionClassification part_cls;
            size_t nquad = per_part[i].quadratic_count();
            if (nquad > 1) throw MalformedClause("two quadratic equalities in one part");
            if (per_part[i].constraints.empty()) {
                std::vector<VarId> vs(parts[i].begin(), parts[i].end());
                part_cls = SolutionClassification::infinite(streams::free_stream(vs));
            } else {
                part_cls = nquad ? solve_quadratic_clause(per_part[i], radius)
                                 : classify_linear_clause(per_part[i]);
                // extend with unconstrained part variables
                std::set<VarId> used = per_part[i].vars();
                std::vector<VarId> missing;
                for (auto& v : parts[i])
                    if (!used.count(v)) missing.push_back(v);
                if (!missing.empty() && !part_cls.is_empty()) {
                    auto fs = SolutionClassification::infinite(streams::free_stream(missing));
                    part_cls = streams::product(part_cls, fs);
                }
            }
            clause_cls = streams::product(clause_cls, part_cls);
            if (clause_cls.is_empty()) break;
        }
        acc = streams::unite(acc, clause_cls);
    }
    return acc;
}

}  // namespace dehnfill
