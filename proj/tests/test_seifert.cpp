#include <catch2/catch_amalgamated.hpp>

#include "dehnfill/seifert.hpp"
#include "dehnfill/lens.hpp"

#include "oracles.hpp"

using namespace dehnfill;

namespace {
SeifertData sd(Surface base, std::initializer_list<std::pair<long long, long long>> cs) {
    return SeifertData(base, cs);
}
}  // namespace

TEST_CASE("normalize canonical forms") {
    // [S2, 0/1, 1/2] -> [S2, 1/2]
    auto d1 = normalize(sd(Surface::sphere(), {{0, 1}, {1, 2}}));
    CHECK(d1 == sd(Surface::sphere(), {{1, 2}}));

    // [S2, 5/2] -> residues (1,2) with integer part 2 carried
    auto d2 = normalize(sd(Surface::sphere(), {{5, 2}}));
    CHECK(d2 == sd(Surface::sphere(), {{2, 1}, {1, 2}}));  // sorted by multiplicity
    CHECK(d2.euler() == sd(Surface::sphere(), {{5, 2}}).euler());

    // boundary case drops the carry: [D2, 3/1] -> [D2]
    auto d3 = normalize(sd(Surface::disc(), {{3, 1}}));
    CHECK(d3 == SeifertData(Surface::disc()));

    // idempotence and isomorphism with the original
    oracle::Rng rng(5);
    for (int i = 0; i < 60; ++i) {
        Surface base(oracle::rand_in(rng, 0, 1) == 0, int(oracle::rand_in(rng, 1, 2)),
                     int(oracle::rand_in(rng, 0, 2)));
        SeifertData d(base);
        for (int j = 0, n = int(oracle::rand_in(rng, 0, 3)); j < n; ++j) {
            long long p = oracle::rand_in(rng, 1, 5);
            long long q = oracle::rand_in(rng, -6, 6);
            while (gcd_int(Int(q), Int(p)) != 1) ++q;
            d.coeffs.emplace_back(Int(q), Int(p));
        }
        CHECK(normalize(normalize(d)) == normalize(d));
        CHECK(sfs_isomorphic(d, normalize(d)));
    }
}

TEST_CASE("sfs_isomorphic spec examples and properties") {
    auto d = sd(Surface::sphere(), {{1, 2}, {3, 5}});
    CHECK(sfs_isomorphic(d, d));

    // multiset symmetry
    CHECK(sfs_isomorphic(sd(Surface::sphere(), {{1, 2}, {3, 5}}),
                         sd(Surface::sphere(), {{3, 5}, {1, 2}})));

    // different bases are different fibrations even when manifolds agree
    CHECK(!sfs_isomorphic(sd(Surface::sphere(), {{1, 2}, {1, 2}, {-1, 2}, {-1, 2}}),
                          SeifertData(Surface::klein())));

    // (0,1) insertion invariance; (q,p) -> (q+p, p) with compensating -1/1
    CHECK(sfs_isomorphic(d, sd(Surface::sphere(), {{1, 2}, {3, 5}, {0, 1}})));
    CHECK(sfs_isomorphic(d, sd(Surface::sphere(), {{3, 2}, {3, 5}, {-1, 1}})));
    // closed case: Euler must match exactly
    CHECK(!sfs_isomorphic(d, sd(Surface::sphere(), {{3, 2}, {3, 5}})));
    // with boundary the same shift is absorbed mod Z
    CHECK(sfs_isomorphic(sd(Surface::disc(), {{1, 2}}), sd(Surface::disc(), {{3, 2}})));
}

TEST_CASE("slope_isomorphic") {
    // identical data
    SlopeData s1(sd(Surface::annulus(), {{1, 3}}), {{Int(0), Int(1)}});
    CHECK(slope_isomorphic(s1, s1));

    // solid torus example: [D2, a1/1, ..., q/p | (q+ap, p)] ~ [D2, (q+ap)/p | (q+ap, p)]
    for (long long a1 = -3; a1 <= 3; ++a1) {
        for (long long q = -2; q <= 2; ++q) {
            long long p = 5;
            if (gcd_int(Int(q), Int(p)) != 1) continue;
            SlopeData lhs(sd(Surface::disc(), {{a1, 1}, {q, p}}), {{Int(q + a1 * p), Int(p)}});
            SlopeData rhs(sd(Surface::disc(), {{q + a1 * p, p}}), {{Int(q + a1 * p), Int(p)}});
            CHECK(slope_isomorphic(lhs, rhs));
        }
    }

    // 6.3-style Euler check with matching residues: [Sg4 bdry1, c/1, 5/8, -1/4 | (0,1)]
    // vs [Sg4 bdry1, 5/8, -5/4 | (0,1)] are slope-isomorphic iff c + 5/8 - 1/4 = 5/8 - 5/4
    for (long long c = -3; c <= 3; ++c) {
        SlopeData lhs(sd(Surface::orientable_genus(4, 1), {{c, 1}, {5, 8}, {-1, 4}}),
                      {{Int(0), Int(1)}});
        SlopeData rhs(sd(Surface::orientable_genus(4, 1), {{5, 8}, {-5, 4}}), {{Int(0), Int(1)}});
        CHECK(slope_isomorphic(lhs, rhs) == (c == -1));
    }
    // with the residue condition violated (paper's printed M1) it never holds
    for (long long c = -5; c <= 5; ++c) {
        SlopeData lhs(sd(Surface::orientable_genus(4, 1), {{c, 1}, {5, 8}, {-1, 4}}),
                      {{Int(0), Int(1)}});
        SlopeData rhs(sd(Surface::orientable_genus(4, 1), {{-3, 4}, {1, 8}}), {{Int(0), Int(1)}});
        CHECK(!slope_isomorphic(lhs, rhs));
    }

    // implies sfs_isomorphic with marks forgotten and matching fills appended
    oracle::Rng rng(99);
    for (int i = 0; i < 40; ++i) {
        long long q = oracle::rand_in(rng, -4, 4), p = oracle::rand_in(rng, 1, 4);
        if (gcd_int(Int(q), Int(p)) != 1) continue;
        SlopeData a(sd(Surface::annulus(), {}), {{Int(q), Int(p)}});
        SlopeData b(sd(Surface::annulus(), {{1, 1}}), {{Int(q - p), Int(p)}});
        if (slope_isomorphic(a, b)) {
            auto fa = dehn_fill(a.data, q, p);
            auto fb = dehn_fill(b.data, q - p, p);
            CHECK(sfs_isomorphic(fa, fb));
        }
    }
}

TEST_CASE("dehn_fill and glue") {
    // [S1xI] filled (q2, 1) -> [D2, q2/1]
    auto filled = dehn_fill(SeifertData(Surface::annulus()), Int(7), Int(1));
    CHECK(filled == sd(Surface::disc(), {{7, 1}}));

    // commutes across distinct boundary tori
    auto base = SeifertData(Surface::sphere(3));
    auto ab = dehn_fill(dehn_fill(base, 3, 1), 2, 5);
    auto ba = dehn_fill(dehn_fill(base, 2, 5), 3, 1);
    CHECK(sfs_isomorphic(ab, ba));

    // fibre-parallel rejected
    CHECK_THROWS_AS(dehn_fill(base, 1, 0), FibreParallel);

    // glue: 6.3 numbers: [Sg2 bdry1, 5/8] u [Sg2 bdry2, -1/4] via (1 q; 0 -1)
    for (long long qq = -4; qq <= 4; ++qq) {
        GL2Matrix G(1, qq, 0, -1);
        auto g = glue(sd(Surface::orientable_genus(2, 1), {{5, 8}}),
                      sd(Surface::orientable_genus(2, 2), {{-1, 4}}), G);
        SeifertData want = sd(Surface::orientable_genus(4, 1), {{-qq, 1}, {5, 8}, {-1, 4}});
        CHECK(sfs_isomorphic(g, want));
    }

    // glue respects dehn filling of untouched tori
    {
        auto d1 = sd(Surface::annulus(), {{1, 3}});
        auto d2 = sd(Surface::annulus(), {{2, 5}});
        GL2Matrix G(1, 2, 0, -1);
        auto glued_then_filled = dehn_fill(glue(d1, d2, G), 4, 7);
        auto filled_then_glued = glue(d1, dehn_fill(d2, 4, 7), G);
        CHECK(sfs_isomorphic(glued_then_filled, filled_then_glued));
    }

    // fibre mismatch rejected
    CHECK_THROWS_AS(glue(SeifertData(Surface::annulus()), SeifertData(Surface::annulus()),
                         GL2Matrix(0, 1, 1, 0)),
                    FibreMismatch);
}

TEST_CASE("solid_torus_meridian") {
    auto [q1, p1] = solid_torus_meridian(sd(Surface::disc(), {{3, 5}}));
    CHECK((q1 == 3 && p1 == 5));
    auto [q2, p2] = solid_torus_meridian(sd(Surface::disc(), {{2, 1}, {3, 5}}));
    CHECK((q2 == 13 && p2 == 5));
    CHECK_THROWS_AS(solid_torus_meridian(SeifertData(Surface::orientable_genus(1, 1))), NotSolidTorus);
}

TEST_CASE("special_structures tags") {
    using SS = SpecialStructure;
    CHECK(special_structures(sd(Surface::disc(), {{1, 2}, {-1, 2}})).count(SS::KleinBottleI));
    CHECK(special_structures(SeifertData(Surface::mobius())).count(SS::KleinBottleI));
    CHECK(special_structures(sd(Surface::sphere(), {{1, 2}, {-1, 2}, {3, 5}})).count(SS::None) == 0);
    CHECK(special_structures(sd(Surface::sphere(), {{1, 2}, {-1, 2}, {3, 5}}))
              .count(SS::TorusBundleSFS) == 0);
    CHECK(special_structures(sd(Surface::sphere(), {{3, 5}})).count(SS::LensOverS2));
    CHECK(special_structures(SeifertData(Surface::disc())).count(SS::SolidTorus));
    CHECK(special_structures(sd(Surface::disc(), {{3, 5}})).count(SS::SolidTorus));
    CHECK(special_structures(SeifertData(Surface::annulus())).count(SS::ThickenedTorus));
    CHECK(special_structures(sd(Surface::orientable_genus(2, 0), {{5, 8}, {-17, 7}})).count(SS::None));
    // torus bundle list
    CHECK(special_structures(sd(Surface::torus(), {{3, 1}})).count(SS::TorusBundleSFS));
    CHECK(special_structures(sd(Surface::klein(), {{-2, 1}})).count(SS::TorusBundleSFS));
    CHECK(special_structures(sd(Surface::sphere(), {{1, 2}, {1, 2}, {-1, 2}, {-1, 2}}))
              .count(SS::TorusBundleSFS));
    CHECK(special_structures(sd(Surface::sphere(), {{2, 3}, {-1, 3}, {-1, 3}}))
              .count(SS::TorusBundleSFS));
    CHECK(special_structures(sd(Surface::sphere(), {{1, 2}, {-1, 4}, {-1, 4}}))
              .count(SS::TorusBundleSFS));
    CHECK(special_structures(sd(Surface::sphere(), {{1, 2}, {-1, 3}, {-1, 6}}))
              .count(SS::TorusBundleSFS));
    // RP2 lens pattern
    CHECK(special_structures(sd(Surface::rp2(), {{-1, 3}})).count(SS::LensOverRP2));
    CHECK(special_structures(sd(Surface::rp2(), {{3, 4}})).count(SS::LensOverRP2) == 0);
    CHECK(special_structures(SeifertData(Surface::rp2())).count(SS::LensOverRP2) == 0);
}

TEST_CASE("seifert text round trip") {
    auto d = sd(Surface::orientable_genus(2, 2), {{5, 8}, {-1, 4}});
    SlopeData s(d, {{Int(0), Int(1)}, {Int(3), Int(-2)}});
    auto txt = render_slope_data(s);
    auto back = parse_slope_data(txt);
    CHECK(back.data == d);
    CHECK(back.marked == s.marked);
    CHECK(render_slope_data(back) == txt);
    CHECK(parse_seifert(render_seifert(d)) == d);
}

TEST_CASE("slope_isomorphism_system box consistency") {
    oracle::Rng rng(314);
    VarId u1("u1"), v1("v1"), u2("u2"), v2("v2");
    int done = 0;
    while (done < 12) {
        // random target with <= 2 unmarked coefficients and <= 1 mark
        Surface base(true, int(oracle::rand_in(rng, 0, 1)), int(oracle::rand_in(rng, 1, 2)));
        SeifertData tdata(base);
        for (int j = 0, nn = int(oracle::rand_in(rng, 0, 2)); j < nn; ++j) {
            long long p = oracle::rand_in(rng, 1, 4);
            long long q = oracle::rand_in(rng, -5, 5);
            if (gcd_int(Int(q), Int(p)) != 1) continue;
            tdata.coeffs.emplace_back(Int(q), Int(p));
        }
        size_t h = size_t(oracle::rand_in(rng, 0, 1));
        std::vector<std::pair<Int, Int>> tmarks;
        if (h == 1) {
            long long p = oracle::rand_in(rng, -3, 3);
            if (p == 0) continue;
            long long q = oracle::rand_in(rng, -5, 5);
            if (gcd_int(Int(q), Int(p)) != 1) continue;
            tmarks.push_back({Int(q), Int(p)});
        }
        SlopeData target(tdata, tmarks);

        // template with two unmarked slots and h marked slots, slot vars
        SlopeTemplate tmpl;
        tmpl.base = base;
        tmpl.unmarked.push_back({AffineForm::variable(u1), AffineForm::variable(v1)});
        tmpl.unmarked.push_back({AffineForm::variable(u2), AffineForm::variable(v2)});
        std::vector<VarId> vars = {u1, v1, u2, v2};
        VarId mu("mu"), mv("mv");
        if (h == 1) {
            tmpl.marked.push_back({AffineForm::variable(mu), AffineForm::variable(mv)});
            vars.push_back(mu);
            vars.push_back(mv);
        }
        auto sys = slope_isomorphism_system(target, tmpl);
        // box check over [-5, 5]
        long long B = 5;
        std::vector<long long> assign(vars.size(), -B);
        while (true) {
            Valuation val;
            for (size_t i = 0; i < vars.size(); ++i) val[vars[i]] = Int(assign[i]);
            bool member = sys.satisfied(val);
            // direct: instantiate and compare, when the instantiation is legal
            bool direct = false;
            long long pv1 = assign[1], pv2 = assign[3];
            bool legal = pv1 != 0 && pv2 != 0 &&
                         gcd_int(Int(assign[0]), Int(pv1)) == 1 &&
                         gcd_int(Int(assign[2]), Int(pv2)) == 1;
            if (h == 1 && (assign[5] == 0 || gcd_int(Int(assign[4]), Int(assign[5])) != 1))
                legal = false;
            if (legal) {
                SeifertData inst(base);
                inst.coeffs.emplace_back(Int(assign[0]), Int(pv1));
                inst.coeffs.emplace_back(Int(assign[2]), Int(pv2));
                std::vector<std::pair<Int, Int>> imarks;
                if (h == 1) imarks.push_back({Int(assign[4]), Int(assign[5])});
                direct = slope_isomorphic(SlopeData(inst, imarks), target);
            }
            if (member != direct) {
                UNSCOPED_INFO("target " << render_slope_data(target));
                Valuation vv = val;
                std::string assigns;
                for (auto& [k2, v2x] : vv) assigns += k2.name + "=" + v2x.str() + " ";
                UNSCOPED_INFO(assigns);
            }
            REQUIRE(member == direct);
            size_t i = 0;
            while (i < assign.size() && assign[i] == B) assign[i++] = -B;
            if (i == assign.size()) break;
            ++assign[i];
        }
        ++done;
    }
}
