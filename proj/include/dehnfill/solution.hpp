#pragma once

#include "dehnfill/constraint.hpp"

#include <functional>

namespace dehnfill {

// Classification of the integer solution set of a clause or system.
//
// Finite carries the full, duplicate-free list. Infinite carries a sampler:
// sample(n) returns n distinct valid solutions. UnknownBeyondRadius is the
// honest verdict of the bounded fallback solver; `found` holds the solutions
// discovered inside the searched box.
struct SolutionClassification {
    enum class Kind { Empty, Finite, Infinite, UnknownBeyondRadius };

    Kind kind = Kind::Empty;
    std::vector<Valuation> solutions;                        // Finite
    std::function<std::vector<Valuation>(size_t)> sample;    // Infinite
    Int radius = 0;                                          // UnknownBeyondRadius
    std::vector<Valuation> found;                            // UnknownBeyondRadius

    static SolutionClassification empty() { return {}; }

    static SolutionClassification finite(std::vector<Valuation> sols) {
        SolutionClassification c;
        std::sort(sols.begin(), sols.end());
        sols.erase(std::unique(sols.begin(), sols.end()), sols.end());
        c.kind = sols.empty() ? Kind::Empty : Kind::Finite;
        c.solutions = std::move(sols);
        return c;
    }

    static SolutionClassification infinite(std::function<std::vector<Valuation>(size_t)> sampler) {
        SolutionClassification c;
        c.kind = Kind::Infinite;
        c.sample = std::move(sampler);
        return c;
    }

    static SolutionClassification unknown(Int radius, std::vector<Valuation> found_in_box) {
        SolutionClassification c;
        c.kind = Kind::UnknownBeyondRadius;
        c.radius = std::move(radius);
        c.found = std::move(found_in_box);
        return c;
    }

    bool is_empty() const { return kind == Kind::Empty; }
    bool nonempty_known() const { return kind == Kind::Finite || kind == Kind::Infinite; }
};

namespace streams {

// Merge two valuations with disjoint (or agreeing) domains.
inline Valuation merge(const Valuation& a, const Valuation& b) {
    Valuation r = a;
    for (auto& [k, v] : b) r[k] = v;
    return r;
}

// All of Z^vars, enumerated by L-infinity shells. Used for parts a clause
// does not constrain.
inline std::function<std::vector<Valuation>(size_t)> free_stream(std::vector<VarId> vars) {
    return [vars](size_t n) {
        std::vector<Valuation> out;
        if (vars.empty()) return out;
        long long shell = 0;
        while (out.size() < n) {
            // enumerate points with max-norm == shell
            std::vector<long long> pt(vars.size(), -shell);
            while (true) {
                long long mx = 0;
                for (auto v : pt) mx = std::max(mx, std::llabs(v));
                if (mx == shell) {
                    Valuation val;
                    for (size_t i = 0; i < vars.size(); ++i) val[vars[i]] = Int(pt[i]);
                    out.push_back(std::move(val));
                    if (out.size() >= n) return out;
                }
                size_t i = 0;
                while (i < pt.size() && pt[i] == shell) pt[i++] = -shell;
                if (i == pt.size()) break;
                ++pt[i];
            }
            ++shell;
        }
        return out;
    };
}

// Product of classifications over disjoint variable sets.
inline SolutionClassification product(const SolutionClassification& a, const SolutionClassification& b) {
    using K = SolutionClassification::Kind;
    if (a.kind == K::Empty || b.kind == K::Empty) return SolutionClassification::empty();
    if (a.kind == K::UnknownBeyondRadius || b.kind == K::UnknownBeyondRadius) {
        // propagate the unknown verdict; keep the smaller radius
        Int r = a.kind == K::UnknownBeyondRadius ? a.radius : b.radius;
        if (a.kind == K::UnknownBeyondRadius && b.kind == K::UnknownBeyondRadius)
            r = std::min(a.radius, b.radius);
        std::vector<Valuation> found;
        const auto& fa = a.kind == K::Finite ? a.solutions : a.found;
        const auto& fb = b.kind == K::Finite ? b.solutions : b.found;
        if (a.kind == K::Infinite || b.kind == K::Infinite) {
            // sample a handful for reporting
            auto sa = a.kind == K::Infinite ? a.sample(8) : fa;
            auto sb = b.kind == K::Infinite ? b.sample(8) : fb;
            for (auto& x : sa)
                for (auto& y : sb) found.push_back(merge(x, y));
        } else {
            for (auto& x : fa)
                for (auto& y : fb) found.push_back(merge(x, y));
        }
        return SolutionClassification::unknown(r, std::move(found));
    }
    if (a.kind == K::Finite && b.kind == K::Finite) {
        std::vector<Valuation> sols;
        for (auto& x : a.solutions)
            for (auto& y : b.solutions) sols.push_back(merge(x, y));
        return SolutionClassification::finite(std::move(sols));
    }
    // at least one Infinite, none empty
    SolutionClassification ca = a, cb = b;
    return SolutionClassification::infinite([ca, cb](size_t n) {
        auto take = [n](const SolutionClassification& c) {
            if (c.kind == K::Finite) return c.solutions;
            size_t k = static_cast<size_t>(std::max<double>(2, std::ceil(std::sqrt(double(n))) + 1));
            return c.sample(std::max(k, size_t(1)));
        };
        auto xs = take(ca), ys = take(cb);
        std::vector<Valuation> out;
        for (size_t d = 0; d < xs.size() + ys.size() && out.size() < n; ++d)
            for (size_t i = 0; i <= d && out.size() < n; ++i) {
                size_t j = d - i;
                if (i < xs.size() && j < ys.size()) out.push_back(merge(xs[i], ys[j]));
            }
        // If the diagonal ran out (one side finite and small), extend linearly.
        size_t grow = 2;
        while (out.size() < n) {
            auto more_x = ca.kind == K::Infinite ? ca.sample(n * grow) : ca.solutions;
            auto more_y = cb.kind == K::Infinite ? cb.sample(n * grow) : cb.solutions;
            out.clear();
            for (auto& x : more_x) {
                for (auto& y : more_y) {
                    out.push_back(merge(x, y));
                    if (out.size() >= n) break;
                }
                if (out.size() >= n) break;
            }
            grow *= 2;
        }
        return out;
    });
}

// Union of classifications over the same variable set.
inline SolutionClassification unite(const SolutionClassification& a, const SolutionClassification& b) {
    using K = SolutionClassification::Kind;
    if (a.kind == K::Empty) return b;
    if (b.kind == K::Empty) return a;
    if (a.kind == K::Infinite || b.kind == K::Infinite) {
        SolutionClassification ca = a, cb = b;
        return SolutionClassification::infinite([ca, cb](size_t n) {
            std::vector<Valuation> out;
            std::set<Valuation> seen;
            auto push_all = [&](const std::vector<Valuation>& vs) {
                for (auto& v : vs)
                    if (seen.insert(v).second) out.push_back(v);
            };
            if (ca.kind == K::Infinite) push_all(ca.sample(n));
            else push_all(ca.kind == K::Finite ? ca.solutions : ca.found);
            if (out.size() < n) {
                if (cb.kind == K::Infinite) push_all(cb.sample(2 * n));
                else push_all(cb.kind == K::Finite ? cb.solutions : cb.found);
            }
            if (out.size() > n) out.resize(n);
            return out;
        });
    }
    if (a.kind == K::UnknownBeyondRadius || b.kind == K::UnknownBeyondRadius) {
        Int r = a.kind == K::UnknownBeyondRadius ? a.radius : b.radius;
        if (a.kind == K::UnknownBeyondRadius && b.kind == K::UnknownBeyondRadius)
            r = std::min(a.radius, b.radius);
        std::vector<Valuation> found = a.kind == K::Finite ? a.solutions : a.found;
        const auto& fb = b.kind == K::Finite ? b.solutions : b.found;
        found.insert(found.end(), fb.begin(), fb.end());
        return SolutionClassification::unknown(r, std::move(found));
    }
    std::vector<Valuation> sols = a.solutions;
    sols.insert(sols.end(), b.solutions.begin(), b.solutions.end());
    return SolutionClassification::finite(std::move(sols));
}

// Apply an affine back-substitution / projection to every solution.
inline SolutionClassification mapped(const SolutionClassification& c,
                                     std::function<Valuation(const Valuation&)> f) {
    using K = SolutionClassification::Kind;
    switch (c.kind) {
        case K::Empty: return c;
        case K::Finite: {
            std::vector<Valuation> sols;
            sols.reserve(c.solutions.size());
            for (auto& s : c.solutions) sols.push_back(f(s));
            return SolutionClassification::finite(std::move(sols));
        }
        case K::UnknownBeyondRadius: {
            std::vector<Valuation> found;
            for (auto& s : c.found) found.push_back(f(s));
            return SolutionClassification::unknown(c.radius, std::move(found));
        }
        case K::Infinite: {
            auto base = c.sample;
            return SolutionClassification::infinite([base, f](size_t n) {
                // the map may collapse points; oversample and dedupe
                std::vector<Valuation> out;
                std::set<Valuation> seen;
                size_t m = n;
                while (out.size() < n) {
                    auto raw = base(m);
                    out.clear();
                    seen.clear();
                    for (auto& s : raw) {
                        Valuation v = f(s);
                        if (seen.insert(v).second) out.push_back(std::move(v));
                    }
                    if (raw.size() < m) break;  // stream exhausted upstream (should not happen)
                    m *= 2;
                }
                if (out.size() > n) out.resize(n);
                return out;
            });
        }
    }
    return c;
}

}  // namespace streams
}  // namespace dehnfill
