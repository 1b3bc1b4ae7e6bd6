#pragma once

#include "dehnfill/numeric.hpp"

#include <vector>

namespace dehnfill {

// Dense exact-rational simplex for small systems. Solves
//   maximize c.x  subject to  A x <= b,  x free,
// with Bland's rule (no cycling, no floating point).
class Simplex {
  public:
    enum class Status { Optimal, Unbounded, Infeasible };

    struct Result {
        Status status;
        Rat value;               // objective at optimum (Optimal only)
        std::vector<Rat> point;  // optimizer in original variables
    };

    Simplex(std::vector<std::vector<Rat>> A, std::vector<Rat> b)
        : A_(std::move(A)), b_(std::move(b)), n_(A_.empty() ? 0 : A_[0].size()) {}

    Result maximize(const std::vector<Rat>& c) const { return solve(c, false); }
    Result minimize(const std::vector<Rat>& c) const {
        std::vector<Rat> neg(c.size());
        for (size_t i = 0; i < c.size(); ++i) neg[i] = -c[i];
        Result r = solve(neg, false);
        if (r.status == Status::Optimal) r.value = -r.value;
        return r;
    }
    bool feasible(std::vector<Rat>* witness = nullptr) const {
        Result r = solve(std::vector<Rat>(n_, Rat(0)), true);
        if (r.status == Status::Infeasible) return false;
        if (witness) *witness = r.point;
        return true;
    }

  private:
    std::vector<std::vector<Rat>> A_;
    std::vector<Rat> b_;
    size_t n_;

    // Tableau layout: columns = u(n) | v(n) | slack(m) | artificial(k) | rhs.
    struct Tab {
        std::vector<std::vector<Rat>> rows;  // m x (cols+1)
        std::vector<size_t> basis;           // basis column per row
        size_t cols = 0;
    };

    static void pivot(Tab& t, size_t pr, size_t pc) {
        auto& prow = t.rows[pr];
        Rat piv = prow[pc];
        for (auto& x : prow) x /= piv;
        for (size_t r = 0; r < t.rows.size(); ++r) {
            if (r == pr) continue;
            Rat f = t.rows[r][pc];
            if (f == 0) continue;
            for (size_t c = 0; c <= t.cols; ++c) t.rows[r][c] -= f * prow[c];
        }
        t.basis[pr] = pc;
    }

    // Simplex on reduced costs z (size cols): maximize. Returns false if
    // unbounded. active[c]==false columns are ignored.
    static bool run(Tab& t, std::vector<Rat>& z, Rat& zval, const std::vector<bool>& active) {
        const size_t m = t.rows.size();
        while (true) {
            size_t pc = SIZE_MAX;
            for (size_t c = 0; c < t.cols; ++c)  // Bland: lowest index with positive reduced cost
                if (active[c] && z[c] > 0) {
                    pc = c;
                    break;
                }
            if (pc == SIZE_MAX) return true;
            size_t pr = SIZE_MAX;
            Rat best;
            for (size_t r = 0; r < m; ++r) {
                const Rat& a = t.rows[r][pc];
                if (a > 0) {
                    Rat ratio = t.rows[r][t.cols] / a;
                    if (pr == SIZE_MAX || ratio < best ||
                        (ratio == best && t.basis[r] < t.basis[pr])) {
                        pr = r;
                        best = ratio;
                    }
                }
            }
            if (pr == SIZE_MAX) return false;  // unbounded
            // update reduced costs, then pivot
            Rat f = z[pc] / t.rows[pr][pc];
            for (size_t c = 0; c <= t.cols; ++c) {
                Rat upd = f * t.rows[pr][c];
                if (c == t.cols)
                    zval += upd;
                else
                    z[c] -= upd;
            }
            z[pc] = 0;
            pivot(t, pr, pc);
        }
    }

    Result solve(const std::vector<Rat>& c, bool feasibility_only) const {
        const size_t m = A_.size();
        Tab t;
        size_t n_art = 0;
        std::vector<Rat> rhs = b_;
        std::vector<int> row_sign(m, 1);
        for (size_t r = 0; r < m; ++r)
            if (rhs[r] < 0) row_sign[r] = -1, rhs[r] = -rhs[r];
        std::vector<size_t> art_col(m, SIZE_MAX);
        for (size_t r = 0; r < m; ++r)
            if (row_sign[r] < 0) art_col[r] = n_art++;  // slack becomes -1, need artificial

        const size_t cu = 0, cv = n_, cs = 2 * n_, ca = 2 * n_ + m;
        t.cols = 2 * n_ + m + n_art;
        t.rows.assign(m, std::vector<Rat>(t.cols + 1, Rat(0)));
        t.basis.assign(m, 0);
        size_t art_seen = 0;
        for (size_t r = 0; r < m; ++r) {
            for (size_t j = 0; j < n_; ++j) {
                Rat a = Rat(row_sign[r]) * A_[r][j];
                t.rows[r][cu + j] = a;
                t.rows[r][cv + j] = -a;
            }
            t.rows[r][cs + r] = Rat(row_sign[r]);
            t.rows[r][t.cols] = rhs[r];
            if (art_col[r] != SIZE_MAX) {
                size_t ac = ca + art_seen++;
                t.rows[r][ac] = 1;
                t.basis[r] = ac;
            } else {
                t.basis[r] = cs + r;
            }
        }

        std::vector<bool> active(t.cols, true);

        if (n_art > 0) {
            // Phase 1: maximize -(sum of artificials).
            std::vector<Rat> z(t.cols, Rat(0));
            Rat zval(0);
            for (size_t r = 0; r < m; ++r) {
                if (art_col[r] == SIZE_MAX) continue;
                for (size_t c = 0; c < t.cols; ++c) z[c] += t.rows[r][c];
                zval -= t.rows[r][t.cols];
            }
            for (size_t a = ca; a < ca + n_art; ++a) z[a] = 0;
            run(t, z, zval, active);  // bounded by construction
            if (zval != 0) return {Status::Infeasible, Rat(0), {}};
            // Drive leftover artificials out of the basis if possible.
            for (size_t r = 0; r < m; ++r) {
                if (t.basis[r] < ca) continue;
                size_t pc = SIZE_MAX;
                for (size_t c = 0; c < ca; ++c)
                    if (t.rows[r][c] != 0) {
                        pc = c;
                        break;
                    }
                if (pc != SIZE_MAX) pivot(t, r, pc);
                // else the row is redundant (all-zero over real columns)
            }
            for (size_t a = ca; a < ca + n_art; ++a) active[a] = false;
        }

        // Phase 2 reduced costs: z_j = c_j - c_B . B^-1 A_j
        std::vector<Rat> z(t.cols, Rat(0));
        Rat zval(0);
        if (!feasibility_only) {
            for (size_t j = 0; j < n_; ++j) {
                z[cu + j] = c[j];
                z[cv + j] = -c[j];
            }
            for (size_t r = 0; r < m; ++r) {
                Rat cb(0);
                size_t bcol = t.basis[r];
                if (bcol < cv)
                    cb = c[bcol];
                else if (bcol < cs)
                    cb = -c[bcol - cv];
                if (cb == 0) continue;
                for (size_t c2 = 0; c2 < t.cols; ++c2) z[c2] -= cb * t.rows[r][c2];
                zval += cb * t.rows[r][t.cols];
            }
            for (size_t c2 = 0; c2 < t.cols; ++c2)
                if (!active[c2]) z[c2] = 0;
            if (!run(t, z, zval, active)) return {Status::Unbounded, Rat(0), {}};
        }

        Result res;
        res.status = Status::Optimal;
        res.value = zval;
        res.point.assign(n_, Rat(0));
        for (size_t r = 0; r < m; ++r) {
            size_t bcol = t.basis[r];
            if (bcol < cv)
                res.point[bcol] += t.rows[r][t.cols];
            else if (bcol < cs)
                res.point[bcol - cv] -= t.rows[r][t.cols];
        }
        return res;
    }
};

}  // namespace dehnfill
