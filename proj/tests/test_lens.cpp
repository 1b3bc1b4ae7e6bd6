#include <catch2/catch_amalgamated.hpp>

#include "dehnfill/lens.hpp"
#include "dehnfill/quadclause.hpp"

#include "oracles.hpp"

using namespace dehnfill;

TEST_CASE("lens_homeomorphic") {
    CHECK(lens_homeomorphic(LensSpace(7, 2), LensSpace(7, 2)));
    CHECK(lens_homeomorphic(LensSpace(7, 2), LensSpace(7, 4)));   // 2*4 = 1 mod 7
    CHECK(!lens_homeomorphic(LensSpace(7, 2), LensSpace(7, 3)));  // L(7,3) is the mirror
    CHECK(lens_homeomorphic(LensSpace(1, 0), LensSpace(-1, 0)));
    CHECK(lens_homeomorphic(LensSpace(0, 1), LensSpace(0, -1)));

    // equivalence-relation spot checks and the stated invariances
    oracle::Rng rng(42);
    std::vector<LensSpace> pool;
    for (long long p = -9; p <= 9; ++p)
        for (long long q = -6; q <= 6; ++q) {
            if (p == 0 && q != 1 && q != -1) continue;
            if (p != 0 && gcd_int(Int(p), Int(q)) != 1) continue;
            pool.emplace_back(Int(p), Int(q));
        }
    for (auto& l : pool) {
        CHECK(lens_homeomorphic(l, l));
        if (l.p != 0) {
            CHECK(lens_homeomorphic(l, LensSpace(l.p, l.q + l.p)));
        }
        CHECK(lens_homeomorphic(l, LensSpace(-l.p, -l.q)));
    }
    for (int i = 0; i < 300; ++i) {
        auto& A = pool[size_t(oracle::rand_in(rng, 0, (long long)pool.size() - 1))];
        auto& B = pool[size_t(oracle::rand_in(rng, 0, (long long)pool.size() - 1))];
        auto& C = pool[size_t(oracle::rand_in(rng, 0, (long long)pool.size() - 1))];
        CHECK(lens_homeomorphic(A, B) == lens_homeomorphic(B, A));
        if (lens_homeomorphic(A, B) && lens_homeomorphic(B, C)) CHECK(lens_homeomorphic(A, C));
    }
}

TEST_CASE("s2_fibration_check") {
    // [S2, b1/a1, b2/a2] = S3 iff b1 a2 + b2 a1 = +-1
    for (long long a0 = -5; a0 <= 5; ++a0)
        for (long long b0 = -5; b0 <= 5; ++b0) {
            if (gcd_int(Int(a0), Int(b0)) != 1) continue;
            for (long long a1 = -5; a1 <= 5; ++a1)
                for (long long b1 = -5; b1 <= 5; ++b1) {
                    if (gcd_int(Int(a1), Int(b1)) != 1) continue;
                    bool expect = abs_int(Int(b1) * Int(a0) + Int(a1) * Int(b0)) == 1;
                    CHECK(s2_fibration_check(b0, a0, b1, a1, LensSpace(1, 0)) == expect);
                }
        }

    // invariance under swapping the two fibres
    oracle::Rng rng(7);
    for (int i = 0; i < 400; ++i) {
        long long a0 = oracle::rand_in(rng, -6, 6), b0 = oracle::rand_in(rng, -6, 6);
        long long a1 = oracle::rand_in(rng, -6, 6), b1 = oracle::rand_in(rng, -6, 6);
        if (gcd_int(Int(a0), Int(b0)) != 1 || gcd_int(Int(a1), Int(b1)) != 1) continue;
        for (long long p = 1; p <= 6; ++p)
            for (long long q = 0; q < p; ++q) {
                if (gcd_int(Int(p), Int(q)) != 1) continue;
                LensSpace L(p, q);
                CHECK(s2_fibration_check(b0, a0, b1, a1, L) == s2_fibration_check(b1, a1, b0, a0, L));
            }
    }

    // invariance under lens_homeomorphic replacement of the target
    for (int i = 0; i < 200; ++i) {
        long long a0 = oracle::rand_in(rng, -5, 5), b0 = oracle::rand_in(rng, -5, 5);
        long long a1 = oracle::rand_in(rng, -5, 5), b1 = oracle::rand_in(rng, -5, 5);
        if (gcd_int(Int(a0), Int(b0)) != 1 || gcd_int(Int(a1), Int(b1)) != 1) continue;
        long long p = oracle::rand_in(rng, 1, 7);
        long long q = oracle::rand_in(rng, 0, p - 1);
        if (gcd_int(Int(p), Int(q)) != 1) continue;
        LensSpace L1(p, q);
        LensSpace L2(p, q + p);
        LensSpace L3(-p, -q);
        bool r = s2_fibration_check(b0, a0, b1, a1, L1);
        CHECK(r == s2_fibration_check(b0, a0, b1, a1, L2));
        CHECK(r == s2_fibration_check(b0, a0, b1, a1, L3));
    }

    // the classification formula L(b1 a0 + a1 b0, -y b1 - a1 x) is consistent
    // across Bezout choices (x,y) -> (x + b0, y + a0)
    for (int i = 0; i < 200; ++i) {
        long long a0 = oracle::rand_in(rng, -5, 5), b0 = oracle::rand_in(rng, -5, 5);
        long long a1 = oracle::rand_in(rng, -5, 5), b1 = oracle::rand_in(rng, -5, 5);
        if (gcd_int(Int(a0), Int(b0)) != 1 || gcd_int(Int(a1), Int(b1)) != 1) continue;
        Int pl = Int(b1) * a0 + Int(a1) * b0;
        if (pl == 0) continue;
        auto [g, u, v] = gcd_ext(Int(b0), Int(-a0));
        if (g != 1) continue;
        Int y = -u, x = -v;
        for (int shift = 0; shift < 3; ++shift) {
            Int q1 = -(y)*Int(b1) - Int(a1) * x;
            Int q2 = -(y + a0) * Int(b1) - Int(a1) * (x + b0);
            if (gcd_int(pl, q1) == 1 && gcd_int(pl, q2) == 1)
                CHECK(lens_homeomorphic(LensSpace(pl, q1), LensSpace(pl, q2)));
            x += b0;
            y += a0;
        }
    }
}

TEST_CASE("rp2_fibration_check") {
    CHECK(rp2_fibration_check(1, 1, LensSpace(4, 1)));
    CHECK(rp2_fibration_check(-1, 1, LensSpace(4, 3)));
    CHECK(!rp2_fibration_check(1, 1, LensSpace(5, 1)));
    // k in [-5,5] \ {0}: L(4k, 2k +- 1) detection matches the lemma
    for (long long k = -5; k <= 5; ++k) {
        if (k == 0) continue;
        for (long long a = -6; a <= 6; ++a)
            for (long long b = -2; b <= 2; ++b) {
                if (gcd_int(Int(a), Int(b)) != 1) continue;
                LensSpace Lp(4 * k, 2 * k + 1);
                LensSpace Lm(4 * k, 2 * k - 1);
                bool expect_p = (Int(b) * k == Int(-a));
                bool expect_m = (Int(b) * k == Int(a));
                CHECK(rp2_fibration_check(b, a, Lp) == expect_p);
                CHECK(rp2_fibration_check(b, a, Lm) == expect_m);
            }
    }
}

TEST_CASE("lens_quadratic_system solution sets") {
    // target S3 = L(1,0): solutions are exactly the coprime 4-tuples with
    // b1 a2 + b2 a1 = +-1. x,y witnesses can leave the tuple box, so project
    // from a larger witness box.
    auto sys = lens_quadratic_system(LensSpace(1, 0));
    CHECK(check_mono_quadratic(sys).valid);
    VarId a1("a1"), b1("b1"), a2("a2"), b2("b2");
    long long B = 4, W = 9;
    std::set<Valuation> sols;
    {
        auto big = oracle::box_solutions_projected(sys, W, {a1, b1, a2, b2});
        for (auto& v : big) {
            bool inside = true;
            for (auto& [k, val] : v)
                if (abs_int(val) > B) inside = false;
            if (inside) sols.insert(v);
        }
    }
    std::set<Valuation> expect;
    for (long long va1 = -B; va1 <= B; ++va1)
        for (long long vb1 = -B; vb1 <= B; ++vb1) {
            if (gcd_int(Int(va1), Int(vb1)) != 1) continue;
            for (long long va2 = -B; va2 <= B; ++va2)
                for (long long vb2 = -B; vb2 <= B; ++vb2) {
                    if (gcd_int(Int(va2), Int(vb2)) != 1) continue;
                    if (abs_int(Int(vb1) * va2 + Int(vb2) * va1) != 1) continue;
                    expect.insert(oracle::make_valuation(
                        {{"a1", va1}, {"b1", vb1}, {"a2", va2}, {"b2", vb2}}));
                }
        }
    CHECK(sols == expect);
}

TEST_CASE("lens_quadratic_system cross-checks s2_fibration_check") {
    for (long long p = 1; p <= 5; ++p) {
        for (long long q = 0; q < std::max(1LL, p); ++q) {
            if (gcd_int(Int(p), Int(q)) != 1) continue;
            LensSpace L(p, q);
            auto sys = lens_quadratic_system(L);
            VarId a1("a1"), b1("b1"), a2("a2"), b2("b2");
            long long B = 3, W = 9;  // tuple box and witness box
            auto raw = oracle::box_solutions_projected(sys, W, {a1, b1, a2, b2});
            std::set<Valuation> sols;
            for (auto& v : raw) {
                bool inside = true;
                for (auto& [k, val] : v)
                    if (abs_int(val) > B) inside = false;
                if (inside) sols.insert(v);
            }
            std::set<Valuation> expect;
            for (long long va1 = -B; va1 <= B; ++va1)
                for (long long vb1 = -B; vb1 <= B; ++vb1) {
                    if (gcd_int(Int(va1), Int(vb1)) != 1) continue;
                    for (long long va2 = -B; va2 <= B; ++va2)
                        for (long long vb2 = -B; vb2 <= B; ++vb2) {
                            if (gcd_int(Int(va2), Int(vb2)) != 1) continue;
                            if (s2_fibration_check(Int(vb1), Int(va1), Int(vb2), Int(va2), L))
                                expect.insert(oracle::make_valuation({{"a1", va1},
                                                                      {"b1", vb1},
                                                                      {"a2", va2},
                                                                      {"b2", vb2}}));
                        }
                }
            INFO("target " << L.str());
            CHECK(sols == expect);
            // no solution violates gcd(a2,b2) | p
            for (auto& s : sols)
                CHECK(mod_floor(Int(p), gcd_int(s.at(a2), s.at(b2))) == 0);
        }
    }
}
