#pragma once

// Test-side oracles: brute-force enumeration and random generators kept
// deliberately independent of the solver code paths they check.

#include "dehnfill/constraint.hpp"
#include "dehnfill/solution.hpp"

#include <random>

namespace oracle {

using namespace dehnfill;

// All solutions of a clause with every variable in [-radius, radius].
// Plain depth-first enumeration; constraints prune as soon as their
// variables are all assigned.
inline std::vector<Valuation> box_solutions(const Clause& cl, long long radius,
                                            std::vector<VarId> vars = {}) {
    if (vars.empty()) {
        auto vs = cl.vars();
        vars.assign(vs.begin(), vs.end());
    }
    // constraint i is checked at the depth where its last variable appears
    std::vector<std::vector<size_t>> ready(vars.size() + 1);
    for (size_t ci = 0; ci < cl.constraints.size(); ++ci) {
        std::set<VarId> vs;
        cl.constraints[ci].collect_vars(vs);
        size_t depth = 0;
        for (size_t vi = 0; vi < vars.size(); ++vi)
            if (vs.count(vars[vi])) depth = std::max(depth, vi + 1);
        ready[depth].push_back(ci);
    }
    std::vector<Valuation> out;
    Valuation cur;
    std::function<void(size_t)> rec = [&](size_t depth) {
        for (size_t ci : ready[depth])
            if (!cl.constraints[ci].satisfied(cur)) return;
        if (depth == vars.size()) {
            out.push_back(cur);
            return;
        }
        for (long long v = -radius; v <= radius; ++v) {
            cur[vars[depth]] = Int(v);
            rec(depth + 1);
        }
        cur.erase(vars[depth]);
    };
    rec(0);
    return out;
}

inline std::vector<Valuation> box_solutions(const ConstraintSystem& sys, long long radius,
                                            std::vector<VarId> vars = {}) {
    if (vars.empty()) {
        auto vs = sys.vars();
        vars.assign(vs.begin(), vs.end());
    }
    std::set<Valuation> seen;
    for (auto& cl : sys.clauses) {
        // enumerate over the full system variable list so solutions align
        for (auto& v : box_solutions(cl, radius, vars)) seen.insert(v);
    }
    return {seen.begin(), seen.end()};
}

// Solution sets over a common box, restricted/projected to `keep` variables.
inline std::set<Valuation> box_solutions_projected(const ConstraintSystem& sys, long long radius,
                                                   const std::vector<VarId>& keep) {
    std::set<VarId> all_set;
    for (auto& v : sys.vars()) all_set.insert(v);
    for (auto& v : keep) all_set.insert(v);
    std::vector<VarId> vars(all_set.begin(), all_set.end());
    std::set<Valuation> out;
    for (auto& cl : sys.clauses)
        for (auto& v : box_solutions(cl, radius, vars)) {
            Valuation p;
            for (auto& k : keep) p[k] = v.at(k);
            out.insert(p);
        }
    return out;
}

inline Valuation make_valuation(std::initializer_list<std::pair<const char*, long long>> kv) {
    Valuation v;
    for (auto& [k, x] : kv) v[VarId(k)] = Int(x);
    return v;
}

using Rng = std::mt19937_64;

inline long long rand_in(Rng& rng, long long lo, long long hi) {
    return std::uniform_int_distribution<long long>(lo, hi)(rng);
}

}  // namespace oracle
