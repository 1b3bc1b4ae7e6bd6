#pragma once

#include "dehnfill/constraint.hpp"
#include "dehnfill/gl2.hpp"
#include "dehnfill/surface.hpp"

#include <algorithm>

namespace dehnfill {

struct ZeroP : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct FibreParallel : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct NoBoundary : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct NotSolidTorus : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct FibreMismatch : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct HypothesisViolation : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Coefficient pair (q, p): the filling slope q*lambda + p*mu. Stored with
// p > 0 (signs normalized via (q,p) ~ (-q,-p)) and gcd(q,p) = 1.
struct SeifertCoeff {
    Int q, p;

    SeifertCoeff(Int q_, Int p_) : q(std::move(q_)), p(std::move(p_)) {
        if (p == 0) throw ZeroP("fibre-parallel coefficient is not Seifert data");
        if (p < 0) {
            p = -p;
            q = -q;
        }
        if (gcd_int(q, p) != 1) throw std::invalid_argument("SeifertCoeff: not coprime");
    }
    bool operator==(const SeifertCoeff& o) const { return q == o.q && p == o.p; }
    bool operator<(const SeifertCoeff& o) const { return std::tie(p, q) < std::tie(o.p, o.q); }
};

// Seifert data [Sigma, q_1/p_1, ..., q_n/p_n].
struct SeifertData {
    Surface base;
    std::vector<SeifertCoeff> coeffs;

    SeifertData() = default;
    explicit SeifertData(Surface b) : base(b) {}
    SeifertData(Surface b, std::vector<SeifertCoeff> cs) : base(b), coeffs(std::move(cs)) {}
    SeifertData(Surface b, std::initializer_list<std::pair<long long, long long>> cs) : base(b) {
        for (auto& [q, p] : cs) coeffs.emplace_back(Int(q), Int(p));
    }

    Rat euler() const {
        Rat e(0);
        for (auto& c : coeffs) e += Rat(c.q, c.p);
        return e;
    }
    bool closed() const { return base.boundary == 0; }

    bool operator==(const SeifertData& o) const { return base == o.base && coeffs == o.coeffs; }
    bool operator<(const SeifertData& o) const { return std::tie(base, coeffs) < std::tie(o.base, o.coeffs); }
};

// Seifert and slope data: marked oriented boundary slopes (q, p), p != 0
// allowed with sign (orientation matters), at most one per boundary torus.
struct SlopeData {
    SeifertData data;
    std::vector<std::pair<Int, Int>> marked;  // oriented (q, p)

    SlopeData() = default;
    SlopeData(SeifertData d, std::vector<std::pair<Int, Int>> m)
        : data(std::move(d)), marked(std::move(m)) {
        if (marked.size() > size_t(data.base.boundary))
            throw std::invalid_argument("SlopeData: more marks than boundary tori");
    }
};

// --- canonical form ----------------------------------------------------------

// Canonical form per the classification theorem: residues (q mod p, p) for
// p >= 2; integer coefficients folded into a single carry (kept for closed
// bases, dropped modulo Z for bounded ones).
struct CanonicalSeifert {
    Surface base;
    std::vector<SeifertCoeff> residues;  // p >= 2, 0 <= q < p, sorted
    Int carry = 0;                       // meaningful iff base closed
    bool operator==(const CanonicalSeifert& o) const {
        return base == o.base && residues == o.residues && (base.boundary > 0 || carry == o.carry);
    }
};

inline CanonicalSeifert canonical_form(const SeifertData& d) {
    CanonicalSeifert c;
    c.base = d.base;
    for (auto& co : d.coeffs) {
        Int r = mod_floor(co.q, co.p);
        c.carry += (co.q - r) / co.p;
        if (co.p >= 2) c.residues.emplace_back(r, co.p);
    }
    std::sort(c.residues.begin(), c.residues.end());
    if (d.base.boundary > 0) c.carry = 0;
    return c;
}

inline SeifertData normalize(const SeifertData& d) {
    CanonicalSeifert c = canonical_form(d);
    SeifertData out(d.base);
    out.coeffs = c.residues;
    if (d.base.boundary == 0 && c.carry != 0) out.coeffs.emplace_back(c.carry, Int(1));
    std::sort(out.coeffs.begin(), out.coeffs.end());
    return out;
}

// Orientation-preserving isomorphism of Seifert structures.
inline bool sfs_isomorphic(const SeifertData& d1, const SeifertData& d2) {
    return canonical_form(d1) == canonical_form(d2);
}

// --- slope isomorphism -------------------------------------------------------

inline bool slope_isomorphic(const SlopeData& s1, const SlopeData& s2) {
    for (auto& m : s1.marked)
        if (m.second == 0) throw HypothesisViolation("marked slope with p = 0");
    for (auto& m : s2.marked)
        if (m.second == 0) throw HypothesisViolation("marked slope with p = 0");
    if (s1.data.base != s2.data.base) return false;
    if (s1.marked.size() != s2.marked.size()) return false;
    // Euler sums including marked slopes (signed p)
    Rat e1 = s1.data.euler(), e2 = s2.data.euler();
    for (auto& m : s1.marked) e1 += Rat(m.first, m.second);
    for (auto& m : s2.marked) e2 += Rat(m.first, m.second);
    if (s1.marked.size() == size_t(s1.data.base.boundary)) {
        if (e1 != e2) return false;
    } else {
        Rat diff = e1 - e2;
        if (diff.denominator() != 1) return false;
    }
    // unmarked coefficients up to q/1 insertions: residue multisets for p >= 2
    auto mset = [](const SeifertData& d) {
        std::vector<SeifertCoeff> v;
        for (auto& c : d.coeffs)
            if (c.p >= 2) v.emplace_back(mod_floor(c.q, c.p), c.p);
        std::sort(v.begin(), v.end());
        return v;
    };
    if (mset(s1.data) != mset(s2.data)) return false;
    // marked: up to permutation with equal signed p and q congruent mod p
    auto marks = [](const SlopeData& s) {
        std::vector<std::pair<Int, Int>> v;
        for (auto& m : s.marked) v.push_back({m.second, mod_floor(m.first, abs_int(m.second))});
        std::sort(v.begin(), v.end());
        return v;
    };
    return marks(s1) == marks(s2);
}

// --- the linear system of slope isomorphism ---------------------------------

// Template whose coefficient slots are affine forms (q-form, p-form).
struct SlopeTemplate {
    Surface base;
    std::vector<std::pair<AffineForm, AffineForm>> unmarked;
    std::vector<std::pair<AffineForm, AffineForm>> marked;
};

// Linear system whose solutions are exactly the slot values making the
// instantiated template slope-isomorphic to the target (coprimality of the
// instantiated pairs comes along for free from the matching equations).
inline ConstraintSystem slope_isomorphism_system(const SlopeData& target, const SlopeTemplate& tmpl) {
    ConstraintSystem out = ConstraintSystem::bottom();
    if (tmpl.base != target.data.base) return out;
    if (tmpl.marked.size() != target.marked.size()) return out;
    const size_t n = tmpl.unmarked.size();
    const size_t h = tmpl.marked.size();

    // target unmarked sorted by descending p
    std::vector<SeifertCoeff> tgt = target.data.coeffs;
    std::sort(tgt.begin(), tgt.end(), [](const SeifertCoeff& a, const SeifertCoeff& b) {
        return std::tie(b.p, b.q) < std::tie(a.p, a.q);
    });
    const size_t np = tgt.size();

    // Euler data of the target, including marked slopes
    Rat target_euler = target.data.euler();
    for (auto& m : target.marked) target_euler += Rat(m.first, m.second);
    bool exact_euler = h == size_t(tmpl.base.boundary);

    // enumerate k (how many target coefficients are matched to slots)
    for (size_t k = 0; k <= std::min(n, np); ++k) {
        bool rest_ok = true;
        for (size_t i = k; i < np; ++i)
            if (tgt[i].p != 1) rest_ok = false;
        if (!rest_ok) continue;

        // injective assignments of k slots to the first k target coefficients
        std::vector<size_t> slots(n);
        for (size_t i = 0; i < n; ++i) slots[i] = i;
        std::vector<size_t> choice(k);
        std::function<void(size_t, std::vector<size_t>&)> pick = [&](size_t depth,
                                                                     std::vector<size_t>& avail) {
            if (depth == k) {
                // sign vectors over matched slots
                for (size_t mask = 0; mask < (size_t(1) << k); ++mask) {
                    // unmatched slots get p = +-1; enumerate those signs too
                    size_t free_cnt = n - k;
                    for (size_t fmask = 0; fmask < (size_t(1) << free_cnt); ++fmask) {
                        Clause cl;
                        std::vector<Rat> slot_pin(n);  // pinned p value per slot
                        std::vector<bool> used_slot(n, false);
                        bool bad = false;
                        for (size_t i = 0; i < k && !bad; ++i) {
                            int sgn = (mask >> i) & 1 ? -1 : 1;
                            size_t s = choice[i];
                            used_slot[s] = true;
                            Int pv = Int(sgn) * tgt[i].p;
                            Int qv = Int(sgn) * tgt[i].q;
                            AffineForm pf = tmpl.unmarked[s].second;
                            pf.constant() -= pv;
                            cl.add(Constraint::eq(pf));
                            if (tgt[i].p >= 2) {
                                cl.add(Constraint::mod_eq(tmpl.unmarked[s].first, tgt[i].p,
                                                          mod_floor(qv, tgt[i].p)));
                            }
                            slot_pin[s] = Rat(pv);
                        }
                        size_t fidx = 0;
                        for (size_t s = 0; s < n && !bad; ++s) {
                            if (used_slot[s]) continue;
                            int sgn = (fmask >> fidx++) & 1 ? -1 : 1;
                            AffineForm pf = tmpl.unmarked[s].second;
                            pf.constant() -= Int(sgn);
                            cl.add(Constraint::eq(pf));
                            slot_pin[s] = Rat(Int(sgn));
                        }
                        // marked slots: bijections to target marks
                        std::vector<size_t> perm(h);
                        for (size_t i = 0; i < h; ++i) perm[i] = i;
                        do {
                            Clause mcl = cl;
                            std::vector<Rat> mark_pin(h);
                            for (size_t j = 0; j < h; ++j) {
                                const auto& tm = target.marked[perm[j]];
                                AffineForm pf = tmpl.marked[j].second;
                                pf.constant() -= tm.second;
                                mcl.add(Constraint::eq(pf));
                                Int pm = abs_int(tm.second);
                                if (pm >= 2)
                                    mcl.add(Constraint::mod_eq(tmpl.marked[j].first, pm,
                                                               mod_floor(tm.first, pm)));
                                mark_pin[j] = Rat(tm.second);
                            }
                            // Euler equality with cleared denominators
                            Int L = 1;
                            for (auto& pin : slot_pin) L = L / gcd_int(L, abs_int(pin.numerator())) *
                                                           abs_int(pin.numerator());
                            for (auto& pin : mark_pin) L = L / gcd_int(L, abs_int(pin.numerator())) *
                                                           abs_int(pin.numerator());
                            Int te_den = target_euler.denominator();
                            L = L / gcd_int(L, te_den) * te_den;
                            AffineForm euler;
                            for (size_t s = 0; s < n; ++s)
                                euler += tmpl.unmarked[s].first * (L / slot_pin[s].numerator());
                            for (size_t j = 0; j < h; ++j)
                                euler += tmpl.marked[j].first * (L / mark_pin[j].numerator());
                            Rat Le = Rat(L) * target_euler;
                            euler.constant() -= Le.numerator();  // Le integral by construction
                            if (exact_euler)
                                mcl.add(Constraint::eq(euler));
                            else if (L >= 2)
                                mcl.add(Constraint::mod_eq(euler, L, 0));
                            // L = 1: the mod-Z condition is vacuous
                            out.clauses.push_back(std::move(mcl));
                        } while (std::next_permutation(perm.begin(), perm.end()));
                    }
                }
                return;
            }
            for (size_t idx = 0; idx < avail.size(); ++idx) {
                choice[depth] = avail[idx];
                std::vector<size_t> rest = avail;
                rest.erase(rest.begin() + static_cast<long>(idx));
                pick(depth + 1, rest);
            }
        };
        std::vector<size_t> avail(n);
        for (size_t i = 0; i < n; ++i) avail[i] = i;
        pick(0, avail);
    }
    out.canonicalize();
    return out;
}

// --- operations --------------------------------------------------------------

inline SeifertData dehn_fill(const SeifertData& d, const Int& q, const Int& p) {
    if (p == 0) throw FibreParallel("dehn_fill: fibre-parallel slope");
    if (d.base.boundary == 0) throw NoBoundary("dehn_fill: closed base");
    if (gcd_int(q, p) != 1) throw std::invalid_argument("dehn_fill: slope not primitive");
    SeifertData out = d;
    out.base = d.base.capped_off();
    out.coeffs.emplace_back(q, p);
    return out;
}

// Glue two pieces along boundary tori by a fibre-to-fibre map G (coordinates
// (q, p) = (lambda coeff, mu coeff); det G = -1 for an orientation-reversing
// torus gluing).
inline SeifertData glue(const SeifertData& d1, const SeifertData& d2, const GL2Matrix& G) {
    if (d1.base.boundary == 0 || d2.base.boundary == 0) throw NoBoundary("glue: need boundary");
    if (G.c != 0 || !(G.a == 1 || G.a == -1)) throw FibreMismatch("glue: map does not send fibre to fibre");
    if (G.det() != -1) throw FibreMismatch("glue: torus gluing must reverse orientation");
    Int extra_q = -G.a * G.b;
    SeifertData out;
    out.base = Surface::glue_along_circle(d1.base, d2.base);
    if (extra_q != 0) out.coeffs.emplace_back(extra_q, Int(1));
    out.coeffs.insert(out.coeffs.end(), d1.coeffs.begin(), d1.coeffs.end());
    out.coeffs.insert(out.coeffs.end(), d2.coeffs.begin(), d2.coeffs.end());
    return out;
}

// Contractible boundary slope of a solid-torus-shaped piece, in the
// Seifert-given basis.
inline std::pair<Int, Int> solid_torus_meridian(const SeifertData& d) {
    if (!d.base.is_disc()) throw NotSolidTorus("base is not a disc");
    Int a = 0;
    Int q = 0, p = 1;
    bool have_exceptional = false;
    for (auto& c : d.coeffs) {
        if (c.p == 1) {
            a += c.q;
        } else {
            if (have_exceptional) throw NotSolidTorus("two exceptional fibres");
            have_exceptional = true;
            q = c.q;
            p = c.p;
        }
    }
    return {q + a * p, p};
}

// --- exceptional structure tags ----------------------------------------------

enum class SpecialStructure {
    SolidTorus,
    ThickenedTorus,
    KleinBottleI,
    LensOverS2,
    LensOverRP2,
    TorusBundleSFS,
    None
};

inline std::string to_string(SpecialStructure s) {
    switch (s) {
        case SpecialStructure::SolidTorus: return "SolidTorus";
        case SpecialStructure::ThickenedTorus: return "ThickenedTorus";
        case SpecialStructure::KleinBottleI: return "KleinBottleI";
        case SpecialStructure::LensOverS2: return "LensOverS2";
        case SpecialStructure::LensOverRP2: return "LensOverRP2";
        case SpecialStructure::TorusBundleSFS: return "TorusBundleSFS";
        case SpecialStructure::None: return "None";
    }
    return "?";
}

inline std::set<SpecialStructure> special_structures(const SeifertData& d) {
    std::set<SpecialStructure> tags;
    CanonicalSeifert c = canonical_form(d);
    size_t ex = c.residues.size();  // exceptional fibre count

    if (d.base.is_disc()) {
        if (ex <= 1) tags.insert(SpecialStructure::SolidTorus);
        if (ex == 2 && c.residues[0].p == 2 && c.residues[1].p == 2)
            tags.insert(SpecialStructure::KleinBottleI);
    }
    if (d.base.is_annulus() && ex == 0) tags.insert(SpecialStructure::ThickenedTorus);
    if (d.base.is_mobius() && ex == 0) tags.insert(SpecialStructure::KleinBottleI);
    if (d.base.is_sphere() && ex <= 2) tags.insert(SpecialStructure::LensOverS2);
    if (d.base.is_sphere() && ex == 3) {
        // [S2, 1/2, -1/2, q/p] pattern: same manifold as [RP2, -p/q]
        int halves = 0;
        for (auto& r : c.residues)
            if (r.p == 2) ++halves;
        if (halves >= 2) tags.insert(SpecialStructure::LensOverS2);
    }
    if (d.base.is_rp2()) {
        // lens iff the fibration is [RP2, +-1/k]: exact reduced fraction
        if (d.coeffs.empty()) {
            // [RP2] = [RP2, 0/1]: not a lens space (RP3 # RP3)
        } else if (d.coeffs.size() == 1 && abs_int(d.coeffs[0].q) == 1) {
            tags.insert(SpecialStructure::LensOverRP2);
        }
    }
    // torus bundle table
    if ((d.base.is_torus() || d.base.is_klein()) && ex == 0)
        tags.insert(SpecialStructure::TorusBundleSFS);
    if (d.base.is_sphere()) {
        auto matches_exact = [&](std::initializer_list<std::pair<long long, long long>> pat) {
            SeifertData ref(Surface::sphere());
            for (auto& [q, p] : pat) ref.coeffs.emplace_back(Int(q), Int(p));
            CanonicalSeifert rc = canonical_form(ref);
            return c.residues == rc.residues && c.carry == rc.carry;
        };
        if (matches_exact({{1, 2}, {1, 2}, {-1, 2}, {-1, 2}}) ||
            matches_exact({{2, 3}, {-1, 3}, {-1, 3}}) || matches_exact({{1, 2}, {-1, 4}, {-1, 4}}) ||
            matches_exact({{1, 2}, {-1, 3}, {-1, 6}}))
            tags.insert(SpecialStructure::TorusBundleSFS);
    }
    if (tags.empty()) tags.insert(SpecialStructure::None);
    return tags;
}

// --- text form ----------------------------------------------------------------

inline std::string render_seifert(const SeifertData& d) {
    std::ostringstream os;
    os << "SFS(base=" << d.base.str() << ", bdry=" << d.base.boundary << ";";
    bool first = true;
    for (auto& c : d.coeffs) {
        os << (first ? " " : ", ") << c.q << "/" << c.p;
        first = false;
    }
    if (first) os << " ";
    os << ")";
    return os.str();
}

inline std::string render_slope_data(const SlopeData& s) {
    std::string base = render_seifert(s.data);
    base.pop_back();  // drop ')'
    std::ostringstream os;
    os << base << " |";
    bool first = true;
    for (auto& m : s.marked) {
        os << (first ? " " : ", ") << "(" << m.first << "," << m.second << ")";
        first = false;
    }
    os << ")";
    return os.str();
}

inline Int parse_int_token(std::string t) {
    size_t b = t.find_first_not_of(" \t");
    size_t e = t.find_last_not_of(" \t");
    if (b == std::string::npos) throw std::invalid_argument("empty integer token");
    return Int(t.substr(b, e - b + 1));
}

inline SlopeData parse_slope_data(const std::string& text) {
    auto fail = [&](const std::string& msg) {
        throw std::invalid_argument("parse_slope_data: " + msg + " in '" + text + "'");
    };
    size_t open = text.find('(');
    size_t close = text.rfind(')');
    if (text.substr(0, open) != "SFS" || open == std::string::npos || close == std::string::npos)
        fail("expected SFS(...)");
    std::string body = text.substr(open + 1, close - open - 1);
    // base=..., bdry=k; coeffs | marks
    auto semi = body.find(';');
    if (semi == std::string::npos) fail("missing ';'");
    std::string head = body.substr(0, semi);
    std::string tail = body.substr(semi + 1);
    std::string base_tok, bdry_tok;
    {
        auto bpos = head.find("base=");
        auto dpos = head.find("bdry=");
        if (bpos == std::string::npos || dpos == std::string::npos) fail("missing base=/bdry=");
        base_tok = head.substr(bpos + 5, head.find(',', bpos) - bpos - 5);
        bdry_tok = head.substr(dpos + 5);
        auto strip = [](std::string& s) {
            while (!s.empty() && (s.back() == ' ' || s.back() == ',')) s.pop_back();
            while (!s.empty() && s.front() == ' ') s.erase(s.begin());
        };
        strip(base_tok);
        strip(bdry_tok);
    }
    Surface base = Surface::parse(base_tok, std::stoi(bdry_tok));
    std::string coeff_part = tail, mark_part;
    if (auto bar = tail.find('|'); bar != std::string::npos) {
        coeff_part = tail.substr(0, bar);
        mark_part = tail.substr(bar + 1);
    }
    SeifertData data(base);
    {
        std::istringstream is(coeff_part);
        std::string tok;
        while (std::getline(is, tok, ',')) {
            auto slash = tok.find('/');
            if (slash == std::string::npos) {
                bool blank = true;
                for (char ch : tok)
                    if (!std::isspace(static_cast<unsigned char>(ch))) blank = false;
                if (blank) continue;
                fail("bad coefficient " + tok);
            }
            data.coeffs.emplace_back(parse_int_token(tok.substr(0, slash)),
                                     parse_int_token(tok.substr(slash + 1)));
        }
    }
    std::vector<std::pair<Int, Int>> marks;
    if (!mark_part.empty()) {
        size_t pos = 0;
        while ((pos = mark_part.find('(', pos)) != std::string::npos) {
            size_t comma = mark_part.find(',', pos);
            size_t end = mark_part.find(')', pos);
            if (comma == std::string::npos || end == std::string::npos || comma > end)
                fail("bad marked slope");
            marks.push_back({parse_int_token(mark_part.substr(pos + 1, comma - pos - 1)),
                             parse_int_token(mark_part.substr(comma + 1, end - comma - 1))});
            pos = end + 1;
        }
    }
    return SlopeData(std::move(data), std::move(marks));
}

inline SeifertData parse_seifert(const std::string& text) { return parse_slope_data(text).data; }

}  // namespace dehnfill
