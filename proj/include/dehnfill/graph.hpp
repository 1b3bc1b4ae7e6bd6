#pragma once

#include "dehnfill/lens.hpp"
#include "dehnfill/seifert.hpp"
#include "dehnfill/sl2conj.hpp"

#include <map>
#include <optional>

namespace dehnfill {

struct MissingOracle : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct UnsupportedTopology : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Pieces, edges, framed graph manifolds.
//
// Conventions: slopes and H1 coordinates are column vectors (q, p) with q the
// fibre coefficient and p the section coefficient on Seifert pieces; on
// hyperbolic pieces the basis is whatever the oracle tables were written in.
// Edge matrices map `from`-coordinates to `to`-coordinates.
// ---------------------------------------------------------------------------

struct TorusRef {
    size_t piece = 0;
    size_t torus = 0;
    bool operator==(const TorusRef& o) const { return piece == o.piece && torus == o.torus; }
    bool operator<(const TorusRef& o) const { return std::tie(piece, torus) < std::tie(o.piece, o.torus); }
    std::string str() const { return "p" + std::to_string(piece) + ".t" + std::to_string(torus); }
};

struct Piece {
    enum class Kind { Seifert, Hyperbolic, SolidTorus };
    Kind kind = Kind::Seifert;
    SeifertData seifert;       // Kind::Seifert
    std::string oracle_key;    // Kind::Hyperbolic
    size_t cusps = 0;          // Kind::Hyperbolic
    std::pair<Int, Int> meridian{0, 1};  // Kind::SolidTorus: meridian in the inherited basis

    static Piece make_seifert(SeifertData d) {
        Piece p;
        p.kind = Kind::Seifert;
        p.seifert = std::move(d);
        return p;
    }
    static Piece make_hyperbolic(std::string key, size_t cusps) {
        Piece p;
        p.kind = Kind::Hyperbolic;
        p.oracle_key = std::move(key);
        p.cusps = cusps;
        return p;
    }
    static Piece make_solid_torus(Int mq, Int mp) {
        Piece p;
        p.kind = Kind::SolidTorus;
        p.meridian = {std::move(mq), std::move(mp)};
        return p;
    }
    size_t torus_count() const {
        switch (kind) {
            case Kind::Seifert: return size_t(seifert.base.boundary);
            case Kind::Hyperbolic: return cusps;
            case Kind::SolidTorus: return 1;
        }
        return 0;
    }
};

struct GraphEdge {
    TorusRef from, to;
    GL2Matrix G;  // coords at `from` -> coords at `to`
};

struct GraphManifold {
    std::vector<Piece> pieces;
    std::vector<GraphEdge> edges;
    std::vector<TorusRef> framing;  // ordered free tori

    void validate() const {
        std::set<TorusRef> used;
        for (auto& e : edges) {
            for (auto& t : {e.from, e.to}) {
                if (t.piece >= pieces.size() || t.torus >= pieces[t.piece].torus_count())
                    throw std::invalid_argument("edge references missing torus " + t.str());
                if (!used.insert(t).second)
                    throw std::invalid_argument("torus in two edges: " + t.str());
            }
            if (!e.G.is_unimodular()) throw std::invalid_argument("edge matrix not in GL2(Z)");
        }
        std::set<TorusRef> free_set;
        for (auto& t : framing) {
            if (t.piece >= pieces.size() || t.torus >= pieces[t.piece].torus_count())
                throw std::invalid_argument("framing references missing torus " + t.str());
            if (used.count(t)) throw std::invalid_argument("framing torus is glued: " + t.str());
            if (!free_set.insert(t).second)
                throw std::invalid_argument("duplicate framing torus " + t.str());
        }
        size_t total = 0;
        for (auto& p : pieces) total += p.torus_count();
        if (free_set.size() + 2 * edges.size() != total)
            throw std::invalid_argument("framing does not cover the free tori");
    }

    // connected components as piece-index sets
    std::vector<std::vector<size_t>> components() const {
        std::vector<int> comp(pieces.size(), -1);
        int nc = 0;
        for (size_t s = 0; s < pieces.size(); ++s) {
            if (comp[s] >= 0) continue;
            std::vector<size_t> stack = {s};
            comp[s] = nc;
            while (!stack.empty()) {
                size_t v = stack.back();
                stack.pop_back();
                for (auto& e : edges) {
                    size_t a = e.from.piece, b = e.to.piece;
                    if (a == v && comp[b] < 0) {
                        comp[b] = nc;
                        stack.push_back(b);
                    }
                    if (b == v && comp[a] < 0) {
                        comp[a] = nc;
                        stack.push_back(a);
                    }
                }
            }
            ++nc;
        }
        std::vector<std::vector<size_t>> out(size_t(nc));
        for (size_t i = 0; i < pieces.size(); ++i) out[size_t(comp[i])].push_back(i);
        return out;
    }
};

// ---------------------------------------------------------------------------
// Oracle tables: all hyperbolic-geometry facts enter through here.
// ---------------------------------------------------------------------------

struct OracleHomeo {
    // homeomorphism N-piece -> M-piece: cusp i of the N-piece maps to cusp
    // perm[i] of the M-piece with boundary matrix boundary[i]
    std::vector<size_t> perm;
    std::vector<GL2Matrix> boundary;
};

struct OracleFilling {
    size_t cusp = 0;
    Int a{0}, b{0};  // filling slope (a, b) in the cusp basis, primitive
    enum class Result { Hyperbolic, SolidTorus } result = Result::Hyperbolic;
    std::string result_key;          // Result::Hyperbolic
    Int meridian_a{0}, meridian_b{1};  // Result::SolidTorus (piece then has 1 torus left)
};

struct NonexceptionalTable {
    // key: canonical descriptor of a filled multi-slope (see multislope_key)
    std::map<std::string, std::vector<std::tuple<size_t, Int, Int>>> exceptional;
    std::map<std::string, bool> hyperbolic;
};

struct OracleEntry {
    size_t cusps = 0;
    std::vector<OracleFilling> fillings;
    std::map<std::string, std::vector<OracleHomeo>> matchings;  // M-piece oracle key -> homeos
    NonexceptionalTable nonexceptional;
};

struct HyperbolicOracle {
    std::map<std::string, OracleEntry> entries;

    const OracleEntry& require(const std::string& key) const {
        auto it = entries.find(key);
        if (it == entries.end()) throw MissingOracle("no oracle entry for key '" + key + "'");
        return it->second;
    }
};

inline std::string multislope_key(std::vector<std::tuple<size_t, Int, Int>> slopes) {
    for (auto& [c, a, b] : slopes) {
        if (b < 0 || (b == 0 && a < 0)) {
            a = -a;
            b = -b;
        }
    }
    std::sort(slopes.begin(), slopes.end());
    std::string s;
    for (auto& [c, a, b] : slopes)
        s += std::to_string(c) + ":" + a.str() + "/" + b.str() + ";";
    return s;
}

// ---------------------------------------------------------------------------
// Partial (boundary) equations and the six-tuple state.
// ---------------------------------------------------------------------------

// Form 1:  M_{T(t1)} * lhs = rhs
// Form 2:  M_{T(t1)} * lhs = Y * M_{T(t2)} * rhs
// t1, t2 index the boundary tori of M in framing order.
struct PartialEquation {
    bool two_sided = false;
    size_t t1 = 0, t2 = 0;
    MatrixWord lhs = MatrixWord::constant(GL2Matrix::identity());
    GL2Matrix Y = GL2Matrix::identity();
    MatrixWord rhs = MatrixWord::constant(GL2Matrix::identity());

    void collect_vars(std::set<VarId>& out) const {
        for (auto& t : lhs.twists) t.collect_vars(out);
        for (auto& t : rhs.twists) t.collect_vars(out);
    }
};

// The six-tuple (N, M, F, (rho_j, sigma_j), L, P). Template j fills
// N.framing[j]; the remaining N framing tori are free and correspond in
// order to M.framing.
struct AncestryState {
    GraphManifold N, M;
    std::vector<PartialEquation> F;
    std::vector<std::pair<AffineForm, AffineForm>> templates;  // (rho_j, sigma_j)
    ConstraintSystem L;                                        // linear
    VariablePartition P;

    size_t fill_count() const { return templates.size(); }
    std::pair<size_t, size_t> measure() const { return {N.framing.size(), N.edges.size()}; }

    void validate() const {
        N.validate();
        M.validate();
        if (templates.size() > N.framing.size())
            throw std::invalid_argument("more templates than framing tori");
        if (N.framing.size() - templates.size() != M.framing.size())
            throw std::invalid_argument("free boundary counts of N (after filling) and M differ");
        for (auto& eq : F) {
            if (eq.t1 >= M.framing.size() || (eq.two_sided && eq.t2 >= M.framing.size()))
                throw std::invalid_argument("partial equation references missing M torus");
        }
    }
};

// ---------------------------------------------------------------------------
// Canonicalization: merge fibre-matching Seifert edges, absorb solid tori,
// collapse bare thickened-torus pieces, keeping framing references valid.
// ---------------------------------------------------------------------------

namespace graphdetail {

// product-structure transit of a bare annulus piece, fibre-first coordinates
inline GL2Matrix annulus_transit() { return GL2Matrix(1, 0, 0, -1); }

struct TorusRemap {
    // old -> new torus references for tori that survive
    std::map<TorusRef, TorusRef> map;
    TorusRef operator()(const TorusRef& t) const {
        auto it = map.find(t);
        if (it == map.end()) throw std::logic_error("torus lost in canonicalization: " + t.str());
        return it->second;
    }
};

// Remove piece `dead` from the graph, renumbering piece indices.
inline void erase_piece(GraphManifold& g, size_t dead) {
    g.pieces.erase(g.pieces.begin() + static_cast<long>(dead));
    auto fix = [dead](TorusRef& t) {
        if (t.piece > dead) --t.piece;
    };
    for (auto& e : g.edges) {
        fix(e.from);
        fix(e.to);
    }
    for (auto& t : g.framing) fix(t);
}

}  // namespace graphdetail

struct CanonicalizeResult {
    GraphManifold graph;
    // true if some rewriting happened (used for idempotence checks)
    bool changed = false;
    // filled-in neighbour slopes from absorbing solid tori attached to
    // hyperbolic pieces could not be resolved without the oracle: the caller
    // passes one. A slope outside the oracle table makes the whole state
    // unmatchable; we record that as `dead`.
    bool dead = false;
    // monodromy matrices of components that are self-edged annulus pieces
    std::map<size_t, GL2Matrix> torus_bundles;  // piece index -> monodromy
};

// The torus references in `protect` (filling/free tori) must survive.
inline CanonicalizeResult canonicalize_graph(GraphManifold g, const HyperbolicOracle* oracle = nullptr) {
    using graphdetail::annulus_transit;
    CanonicalizeResult res;
    bool changed_any = false;
    bool progress = true;
    while (progress) {
        progress = false;

        // 1. merge Seifert pieces glued fibre-to-fibre (distinct pieces)
        for (size_t ei = 0; ei < g.edges.size() && !progress; ++ei) {
            GraphEdge e = g.edges[ei];
            if (e.from.piece == e.to.piece) continue;
            Piece &pf = g.pieces[e.from.piece], &pt = g.pieces[e.to.piece];
            if (pf.kind != Piece::Kind::Seifert || pt.kind != Piece::Kind::Seifert) continue;
            if (!(e.G.c == 0 && (e.G.a == 1 || e.G.a == -1))) continue;
            if (e.G.det() != -1)
                throw UnsupportedTopology("fibre-matching edge with det +1 (orientation mismatch)");
            // new piece: glue(from, to) through G. Torus numbering: the glued
            // piece's boundary tori are (from's tori except e.from.torus) then
            // (to's tori except e.to.torus).
            size_t a = e.from.piece, b = e.to.piece;
            SeifertData merged = glue(pf.seifert, pt.seifert, e.G);
            size_t a_count = pf.torus_count();
            Piece np = Piece::make_seifert(merged);
            // remap references
            auto remap = [&](TorusRef t) -> TorusRef {
                if (t.piece == a) {
                    size_t nt = t.torus - (t.torus > e.from.torus ? 1 : 0);
                    return {a, nt};
                }
                if (t.piece == b) {
                    size_t nt = t.torus - (t.torus > e.to.torus ? 1 : 0);
                    return {a, a_count - 1 + nt};
                }
                return t;
            };
            g.pieces[a] = np;
            std::vector<GraphEdge> nedges;
            for (size_t j = 0; j < g.edges.size(); ++j) {
                if (j == ei) continue;
                GraphEdge ne = g.edges[j];
                ne.from = remap(ne.from);
                ne.to = remap(ne.to);
                nedges.push_back(ne);
            }
            g.edges = nedges;
            for (auto& t : g.framing) t = remap(t);
            graphdetail::erase_piece(g, b);
            progress = true;
            changed_any = true;
        }
        if (progress) continue;

        // 2. absorb solid-torus pieces attached by an edge
        for (size_t pi = 0; pi < g.pieces.size() && !progress; ++pi) {
            Piece& p = g.pieces[pi];
            bool is_solid = p.kind == Piece::Kind::SolidTorus ||
                            (p.kind == Piece::Kind::Seifert &&
                             special_structures(p.seifert).count(SpecialStructure::SolidTorus));
            if (!is_solid) continue;
            // locate its edge (if free it stays: a solid-torus component)
            size_t ei = SIZE_MAX;
            bool from_side = false;
            for (size_t j = 0; j < g.edges.size(); ++j) {
                if (g.edges[j].from.piece == pi) {
                    ei = j;
                    from_side = true;
                    break;
                }
                if (g.edges[j].to.piece == pi) {
                    ei = j;
                    from_side = false;
                    break;
                }
            }
            if (ei == SIZE_MAX) continue;
            std::pair<Int, Int> mer = p.kind == Piece::Kind::SolidTorus
                                          ? p.meridian
                                          : solid_torus_meridian(p.seifert);
            GraphEdge e = g.edges[ei];
            GL2Matrix G = from_side ? e.G : e.G.inverse();
            auto [sq, sp] = G.apply(mer.first, mer.second);
            TorusRef target = from_side ? e.to : e.from;
            Piece& q = g.pieces[target.piece];
            g.edges.erase(g.edges.begin() + static_cast<long>(ei));
            if (q.kind == Piece::Kind::Seifert) {
                if (sp == 0) {
                    // fibre-parallel constant filling: connected-sum territory
                    throw UnsupportedTopology(
                        "solid torus absorption along a fibre-parallel slope");
                }
                Int gg = gcd_int(sq, sp);
                SeifertData filled = dehn_fill(q.seifert, sq / gg, sp / gg);
                // torus renumbering on q: drop target.torus
                auto remap = [&](TorusRef t) -> TorusRef {
                    if (t.piece == target.piece && t.torus > target.torus)
                        return {t.piece, t.torus - 1};
                    return t;
                };
                q.seifert = filled;
                for (auto& ed : g.edges) {
                    ed.from = remap(ed.from);
                    ed.to = remap(ed.to);
                }
                for (auto& t : g.framing) t = remap(t);
            } else if (q.kind == Piece::Kind::Hyperbolic) {
                if (!oracle) throw MissingOracle("solid torus absorption into hyperbolic piece");
                const OracleEntry& entry = oracle->require(q.oracle_key);
                Int gg = gcd_int(sq, sp);
                Int na = sq / gg, nb = sp / gg;
                const OracleFilling* found = nullptr;
                for (auto& f : entry.fillings) {
                    if (f.cusp != target.torus) continue;
                    if ((f.a == na && f.b == nb) || (f.a == -na && f.b == -nb)) found = &f;
                }
                if (!found) {
                    res.dead = true;  // long filling: hyperbolic, matches nothing we track
                    res.graph = g;
                    res.changed = true;
                    return res;
                }
                // replace the piece by the filled result
                auto remap = [&](TorusRef t) -> TorusRef {
                    if (t.piece == target.piece && t.torus > target.torus)
                        return {t.piece, t.torus - 1};
                    return t;
                };
                if (found->result == OracleFilling::Result::Hyperbolic) {
                    q = Piece::make_hyperbolic(found->result_key, q.cusps - 1);
                } else {
                    if (q.cusps != 2)
                        throw UnsupportedTopology("solid-torus oracle result on != 2 cusps");
                    q = Piece::make_solid_torus(found->meridian_a, found->meridian_b);
                }
                for (auto& ed : g.edges) {
                    ed.from = remap(ed.from);
                    ed.to = remap(ed.to);
                }
                for (auto& t : g.framing) t = remap(t);
            } else {
                // solid torus glued to solid torus: a closed lens space
                // component; keep both pieces (endgame handles it directly)
                g.edges.push_back(e);
                continue;
            }
            graphdetail::erase_piece(g, pi);
            progress = true;
            changed_any = true;
        }
        if (progress) continue;

        // 3. collapse bare thickened-torus pieces with two distinct edges
        for (size_t pi = 0; pi < g.pieces.size() && !progress; ++pi) {
            Piece& p = g.pieces[pi];
            if (p.kind != Piece::Kind::Seifert) continue;
            if (!(p.seifert.base.is_annulus() && p.seifert.coeffs.empty())) continue;
            // find the edges at its two tori
            size_t e0 = SIZE_MAX, e1 = SIZE_MAX;
            for (size_t j = 0; j < g.edges.size(); ++j) {
                if (g.edges[j].from.piece == pi || g.edges[j].to.piece == pi) {
                    if (g.edges[j].from.piece == pi && g.edges[j].to.piece == pi) {
                        // self-edged annulus: an Anosov torus bundle component
                        GL2Matrix Gm = g.edges[j].G;
                        res.torus_bundles[pi] = Gm * annulus_transit();
                        e0 = e1 = SIZE_MAX;
                        break;
                    }
                    (e0 == SIZE_MAX ? e0 : e1) = j;
                }
            }
            if (e0 == SIZE_MAX || e1 == SIZE_MAX) continue;
            // orient: A --E0--> (pi torus t0), (pi torus t1) --E1--> B
            GraphEdge E0 = g.edges[e0], E1 = g.edges[e1];
            if (E0.to.piece != pi) std::swap(E0.from, E0.to), E0.G = E0.G.inverse();
            if (E1.from.piece != pi) std::swap(E1.from, E1.to), E1.G = E1.G.inverse();
            // transit through the product structure between its two tori
            GL2Matrix composite = E1.G * annulus_transit() * E0.G;
            GraphEdge ne{E0.from, E1.to, composite};
            std::vector<GraphEdge> nedges;
            for (size_t j = 0; j < g.edges.size(); ++j)
                if (j != e0 && j != e1) nedges.push_back(g.edges[j]);
            nedges.push_back(ne);
            g.edges = nedges;
            graphdetail::erase_piece(g, pi);
            progress = true;
            changed_any = true;
        }
    }
    res.graph = g;
    res.changed = changed_any;
    return res;
}

}  // namespace dehnfill
