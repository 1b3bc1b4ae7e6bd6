#pragma once

#include "dehnfill/quadclause.hpp"
#include "dehnfill/words.hpp"

namespace dehnfill {

struct NormalFormFailure : std::logic_error {
    using std::logic_error::logic_error;
};

// Alternating product X_1 T(n_1) X_2 ... X_h T(n_h) X_{h+1} with fixed
// matrices and affine twist entries.
struct MatrixWord {
    std::vector<GL2Matrix> fixed;   // size h+1
    std::vector<AffineForm> twists; // size h

    size_t twist_count() const { return twists.size(); }

    GL2Matrix evaluate(const Valuation& v) const {
        GL2Matrix m = fixed[0];
        for (size_t i = 0; i < twists.size(); ++i)
            m = m * GL2Matrix::twist(twists[i].evaluate(v)) * fixed[i + 1];
        return m;
    }
    static MatrixWord constant(GL2Matrix m) {
        MatrixWord w;
        w.fixed.push_back(std::move(m));
        return w;
    }
    MatrixWord times(const MatrixWord& o) const {
        MatrixWord w = *this;
        w.fixed.back() = w.fixed.back() * o.fixed[0];
        w.fixed.insert(w.fixed.end(), o.fixed.begin() + 1, o.fixed.end());
        w.twists.insert(w.twists.end(), o.twists.begin(), o.twists.end());
        return w;
    }
    MatrixWord left_mul(const GL2Matrix& m) const {
        MatrixWord w = *this;
        w.fixed[0] = m * w.fixed[0];
        return w;
    }
    MatrixWord right_mul(const GL2Matrix& m) const {
        MatrixWord w = *this;
        w.fixed.back() = w.fixed.back() * m;
        return w;
    }
    MatrixWord inverse() const {
        MatrixWord w;
        w.fixed.reserve(fixed.size());
        for (auto it = fixed.rbegin(); it != fixed.rend(); ++it) w.fixed.push_back(it->inverse());
        for (auto it = twists.rbegin(); it != twists.rend(); ++it) w.twists.push_back(-*it);
        // (X T(n) Y)^-1 = Y^-1 T(-n) X^-1: twists negate, order reverses
        return w;
    }
    Int det() const {
        Int dt = 1;
        for (auto& m : fixed) dt *= m.det();
        return dt;
    }
};

// ---------------------------------------------------------------------------
// SL2(Z)-conjugacy of fixed matrices. Complete: word machinery for hyperbolic
// det +1 pairs, the mono-quadratic base clause otherwise.
// ---------------------------------------------------------------------------

inline bool conjugate_sl2(const GL2Matrix& x, const GL2Matrix& y) {
    if (!x.is_unimodular() || !y.is_unimodular()) throw std::invalid_argument("conjugate_sl2: det must be +-1");
    if (x.det() != y.det() || x.trace() != y.trace()) return false;
    if (x == y) return true;
    GL2Matrix id = GL2Matrix::identity();
    if (x == id || x == -id) return false;  // central, and x != y
    if (y == id || y == -id) return false;

    if (x.det() == 1 && abs_int(x.trace()) > 2) {
        FreeWord wx = cyclically_reduce(psl2_decompose(x));
        FreeWord wy = cyclically_reduce(psl2_decompose(y));
        return cyclic_words_conjugate(wx, wy);  // trace != 0: PSL2-conjugacy lifts
    }

    // base case: Z x = y Z, det Z = 1
    VarId za("za"), zb("zb"), zc("zc"), zd("zd");
    Clause cl;
    QuadraticForm det;
    det.add_quad_term(za, zd, 1);
    det.add_quad_term(zb, zc, -1);
    det.linear().constant() = -1;
    cl.add(Constraint::eq(det));
    // (za zb; zc zd) * x - y * (za zb; zc zd) = 0, entrywise
    AffineForm e11, e12, e21, e22;
    e11.add_term(za, x.a);
    e11.add_term(zb, x.c);
    e11.add_term(za, -y.a);
    e11.add_term(zc, -y.b);
    e12.add_term(za, x.b);
    e12.add_term(zb, x.d);
    e12.add_term(zb, -y.a);
    e12.add_term(zd, -y.b);
    e21.add_term(zc, x.a);
    e21.add_term(zd, x.c);
    e21.add_term(za, -y.c);
    e21.add_term(zc, -y.d);
    e22.add_term(zc, x.b);
    e22.add_term(zd, x.d);
    e22.add_term(zb, -y.c);
    e22.add_term(zd, -y.d);
    for (auto* f : {&e11, &e12, &e21, &e22})
        if (!f->is_zero()) cl.add(Constraint::eq(*f));
    auto cls = solve_quadratic_clause(cl);
    if (cls.kind == SolutionClassification::Kind::UnknownBeyondRadius)
        throw std::logic_error("conjugate_sl2: incomplete dispatch (unexpected shape)");
    return cls.nonempty_known();
}

// ---------------------------------------------------------------------------
// Claim-1 style normalization of a MatrixWord, tracking the target.
// ---------------------------------------------------------------------------

namespace sl2detail {

struct NormalizedWord {
    MatrixWord word;   // X_{h+1} = id; X_1..X_h not of the form (e1 n; 0 e2),
                       // except the terminal shapes below
    GL2Matrix target;  // y, possibly negated along the way
    enum class Terminal {
        None,          // generic: ready for the bound/branch recursion
        Fixed,         // h = 0: plain conjugacy of constants
        PureTwist,     // h = 1, X_1 = id: word is T(n_1)
        Traceless      // h = 1, X_1 = (1 n; 0 -1): word is (1 n+n_1; 0 -1)
    } terminal = Terminal::None;
};

inline NormalizedWord claim1_normalize(MatrixWord w, GL2Matrix y) {
    const GL2Matrix id = GL2Matrix::identity();
    const GL2Matrix J = GL2Matrix::reflection();

    // merge constant twists eagerly
    auto merge_constant_twists = [&]() {
        for (size_t i = 0; i < w.twists.size();) {
            if (!w.twists[i].is_constant()) {
                ++i;
                continue;
            }
            GL2Matrix mid = GL2Matrix::twist(w.twists[i].constant());
            w.fixed[i] = w.fixed[i] * mid * w.fixed[i + 1];
            w.fixed.erase(w.fixed.begin() + static_cast<long>(i) + 1);
            w.twists.erase(w.twists.begin() + static_cast<long>(i));
        }
    };

    int guard = 0;
    while (true) {
        if (++guard > 1000) throw NormalFormFailure("claim1_normalize: rewriting did not terminate");
        merge_constant_twists();
        size_t h = w.twists.size();
        if (h == 0) break;

        // make the last fixed matrix the identity
        if (!(w.fixed[h] == id)) {
            if (w.fixed[h].det() == 1) {
                // conjugate by X_{h+1}
                GL2Matrix Z = w.fixed[h];
                w.fixed[0] = Z * w.fixed[0];
                w.fixed[h] = id;
            } else {
                // conjugate by J X_{h+1}, then absorb the trailing J
                GL2Matrix Z = J * w.fixed[h];
                w.fixed[0] = Z * w.fixed[0];
                w.fixed[h] = id;
                // trailing factor is now J: X_h T(n_h) J = (X_h J) T(-n_h)
                w.fixed[h - 1] = w.fixed[h - 1] * J;
                w.twists[h - 1] = -w.twists[h - 1];
            }
            continue;
        }

        // scan X_1..X_h (indices 0..h-1) for exceptional shapes
        bool rewrote = false;
        for (size_t i = 0; i < h && !rewrote; ++i) {
            GL2Matrix& X = w.fixed[i];
            if (!X.is_upper_unitriangular_like()) continue;
            if (X.a == -1) {
                // -id is central: flip X_i and the target
                X = -X;
                y = -y;
                rewrote = true;
                break;
            }
            if (X.d == -1) {  // (1 n; 0 -1)
                if (i > 0) {
                    // X_{i-1} T(n_{i-1}) X_i = (X_{i-1} J) T(-n_{i-1}) (J X_i)
                    w.fixed[i - 1] = w.fixed[i - 1] * J;
                    w.twists[i - 1] = -w.twists[i - 1];
                    X = J * X;  // becomes (1 n; 0 1)
                    rewrote = true;
                    break;
                }
                if (h == 1) {
                    // terminal traceless shape
                    NormalizedWord out;
                    out.word = w;
                    out.target = y;
                    out.terminal = NormalizedWord::Terminal::Traceless;
                    return out;
                }
                // i == 0, h > 1: X_1 T(n_1) = T(-n) T(n_1) after X_1 J = T(-n):
                // fold into the twist and conjugate the leading T away below
                GL2Matrix X1J = X * J;  // = (1 -n; 0 1)
                // X = T(-n) * (J X_2)-style: rewrite as X_1 := T(-n), push J right
                w.twists[0] = -w.twists[0];
                X = X1J;
                w.fixed[1] = J * w.fixed[1];
                rewrote = true;
                break;
            }
            // X_i = T(n)
            Int n = X.b;
            if (i > 0) {
                // merge the two surrounding twists
                w.twists[i - 1] = w.twists[i - 1] + AffineForm(n) + w.twists[i];
                w.fixed.erase(w.fixed.begin() + static_cast<long>(i));
                w.twists.erase(w.twists.begin() + static_cast<long>(i));
                rewrote = true;
                break;
            }
            // i == 0: X = T(n + n_1) X_2 ...; conjugate the leading block to the end
            if (h == 1) {
                if (w.fixed[1] == id) {
                    // pure twist T(n + n_1): terminal
                    w.twists[0].constant() += n;
                    w.fixed[0] = id;
                    NormalizedWord out;
                    out.word = w;
                    out.target = y;
                    out.terminal = NormalizedWord::Terminal::PureTwist;
                    return out;
                }
                // X = T(n+n_1) X_2 with X_2 != id: conjugate: ~ X_2 T(n+n_1)
                AffineForm m = w.twists[0] + AffineForm(n);
                GL2Matrix X2 = w.fixed[1];
                w.fixed[0] = X2;
                w.fixed[1] = id;
                w.twists[0] = m;
                rewrote = true;
                break;
            }
            // h > 1: X ~ X_2 T(n_2) ... X_h T(n_h + n + n_1)
            AffineForm m = w.twists[0] + AffineForm(n);
            w.fixed.erase(w.fixed.begin());
            w.twists.erase(w.twists.begin());
            w.twists.back() = w.twists.back() + m;
            rewrote = true;
            break;
        }
        if (!rewrote) break;
    }

    NormalizedWord out;
    out.word = w;
    out.target = y;
    if (w.twists.empty())
        out.terminal = NormalizedWord::Terminal::Fixed;
    else if (w.twists.size() == 1 && w.fixed[0] == id && w.fixed[1] == id)
        out.terminal = NormalizedWord::Terminal::PureTwist;
    return out;
}

// Bound C from the squaring trick and the cyclic length inequality: for all
// |n_i| >= C the evaluated product is not SL2-conjugate to the target.
inline Int claim2_bound(const MatrixWord& w, const GL2Matrix& y) {
    size_t h = w.twist_count();
    if (h == 0) return 0;
    const GL2Matrix J = GL2Matrix::reflection();
    // squared expression: matrices X_1..X_h repeated, trailing id
    std::vector<GL2Matrix> mats;
    for (int rep = 0; rep < 2; ++rep)
        for (size_t i = 0; i < h; ++i) mats.push_back(w.fixed[i]);
    mats.push_back(GL2Matrix::identity());
    // push det -1 factors to the right
    for (size_t j = 0; j + 1 < mats.size(); ++j) {
        if (mats[j].det() == -1) {
            mats[j] = mats[j] * J;
            mats[j + 1] = J * mats[j + 1];
        }
    }
    if (mats.back().det() != 1) throw NormalFormFailure("claim2_bound: determinant bookkeeping");
    // drop the trailing matrix (id or J-parity absorbed); decompose the rest
    size_t k2 = 2 * h;
    Int sum_len = 0, max_len = 0;
    for (size_t j = 0; j < k2; ++j) {
        FreeWord v = reduce(psl2_decompose(mats[j]));
        Int len = Int(v.length());
        sum_len += len;
        max_len = std::max(max_len, len);
    }
    GL2Matrix y2 = y * y;
    Int lw = Int(reduce(psl2_decompose(y2)).length());
    Int c1 = 2 * max_len + 2;
    Int c2 = div_floor(lw + sum_len + 4 * Int(k2), 2 * Int(k2)) + 1;
    return std::max(Int(1), std::max(c1, c2));
}

}  // namespace sl2detail

// Exposed bound (spec operation): C such that all |n_i| >= C implies the
// evaluated word is not conjugate to y.
inline Int conjugacy_bound(const MatrixWord& word, const GL2Matrix& y) {
    using Terminal = sl2detail::NormalizedWord::Terminal;
    auto norm = sl2detail::claim1_normalize(word, y);
    if (norm.word.twist_count() == 0) return 0;
    if (norm.terminal == Terminal::PureTwist) {
        // T(n) ~ y for at most one n; exclude it exactly
        const GL2Matrix& t = norm.target;
        if (t.det() != 1 || t.trace() != 2) return 1;
        // bound from the normal form T(m) of the target (see the system path)
        // |n| >= |m| + 1 excludes the single conjugate value
        Int m = t == GL2Matrix::identity() ? Int(0) : abs_int(t.b) + abs_int(t.a - 1) + abs_int(t.c);
        // crude but sound over-approximation of |m| via entries: the exact m
        // satisfies |m| <= |b| + |a-1| + |c| for the conjugated normal form
        return m + 1;
    }
    if (norm.terminal == Terminal::Traceless)
        throw NormalFormFailure(
            "conjugacy_bound: the traceless family is conjugate for infinitely many twists");
    return sl2detail::claim2_bound(norm.word, norm.target);
}

// Linear system in the twist variables whose solutions are exactly the twist
// assignments making the word SL2(Z)-conjugate to y.
inline ConstraintSystem parameterized_conjugacy_system(const MatrixWord& word, const GL2Matrix& y) {
    using Terminal = sl2detail::NormalizedWord::Terminal;
    auto norm = sl2detail::claim1_normalize(word, y);
    const MatrixWord& w = norm.word;
    const GL2Matrix& tgt = norm.target;

    switch (norm.terminal) {
        case Terminal::Fixed:
            return conjugate_sl2(w.fixed[0], tgt) ? ConstraintSystem::top() : ConstraintSystem::bottom();
        case Terminal::PureTwist: {
            // word = T(n); T(n) ~ T(m) iff n = m
            if (tgt.det() != 1 || tgt.trace() != 2) return ConstraintSystem::bottom();
            Int m;
            if (tgt == GL2Matrix::identity()) {
                m = 0;
            } else {
                // find primitive eigenvector v of eigenvalue 1, complete to
                // det-1 basis Z = (v | u); then Z^-1 tgt Z = T(m)
                Int A = tgt.a - 1, B = tgt.b, C = tgt.c, D = tgt.d - 1;
                (void)D;
                Int vx, vy;
                if (A == 0 && C == 0) {
                    vx = 1;
                    vy = 0;
                } else {
                    // (A B; C D) v = 0 with rank 1: v = (B, -A) or (D, -C)
                    vx = B;
                    vy = -A;
                    if (vx == 0 && vy == 0) {
                        vx = tgt.d - 1;
                        vy = -C;
                    }
                    Int g = gcd_int(vx, vy);
                    vx /= g;
                    vy /= g;
                }
                auto [g, s, t] = gcd_ext(vx, vy);
                if (g != 1) throw std::logic_error("eigenvector not primitive");
                // Z = (vx, -t; vy, s): det = vx*s + t*vy = 1
                GL2Matrix Z(vx, -t, vy, s);
                GL2Matrix conj = Z.inverse() * tgt * Z;
                if (!(conj.c == 0 && conj.a == 1 && conj.d == 1))
                    throw std::logic_error("parabolic normal form failed");
                m = conj.b;
            }
            AffineForm f = w.twists[0];
            f.constant() -= m;
            return system_of_constraint(Constraint::eq(f));
        }
        case Terminal::Traceless: {
            // X = (1 m; 0 -1) with affine m: conjugating by T(1) shifts m by 2,
            // so the class is the parity of m. (1 0; 0 -1) and (1 1; 0 -1)
            // represent the two distinct classes of traceless det -1 matrices.
            if (tgt.det() != -1 || tgt.trace() != 0) return ConstraintSystem::bottom();
            AffineForm m = w.twists[0];
            m.constant() += w.fixed[0].b;  // X_1 = (1 n; 0 -1): m = n + n_1
            const GL2Matrix even_rep = GL2Matrix::reflection();
            const GL2Matrix odd_rep(1, 1, 0, -1);
            if (conjugate_sl2(tgt, even_rep))
                return system_of_constraint(Constraint::mod_eq(m, 2, 0));
            if (conjugate_sl2(tgt, odd_rep))
                return system_of_constraint(Constraint::mod_eq(m, 2, 1));
            return ConstraintSystem::bottom();
        }
        case Terminal::None:
            break;
    }

    Int C = sl2detail::claim2_bound(w, tgt);
    ConstraintSystem out = ConstraintSystem::bottom();
    size_t h = w.twist_count();
    for (size_t i = 0; i < h; ++i) {
        for (Int n = -C + 1; n <= C - 1; ++n) {
            MatrixWord sub;
            sub.fixed = w.fixed;
            sub.twists = w.twists;
            sub.fixed[i] = sub.fixed[i] * GL2Matrix::twist(n) * sub.fixed[i + 1];
            sub.fixed.erase(sub.fixed.begin() + static_cast<long>(i) + 1);
            sub.twists.erase(sub.twists.begin() + static_cast<long>(i));
            ConstraintSystem branch = parameterized_conjugacy_system(sub, tgt);
            if (branch.is_bottom()) continue;
            AffineForm f = w.twists[i];
            f.constant() -= n;
            ConstraintSystem guard = system_of_constraint(Constraint::eq(f));
            out = out | (guard & branch);
        }
    }
    out.canonicalize();
    return out;
}

}  // namespace dehnfill
