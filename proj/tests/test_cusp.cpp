#include <catch2/catch_amalgamated.hpp>

#include "dehnfill/cusp.hpp"

#include "oracles.hpp"

using namespace dehnfill;

namespace {

// random rational cusp shape with certified sin interval
CuspShape random_shape(oracle::Rng& rng) {
    auto rnd_rat = [&](long long lo, long long hi, long long den) {
        return Rat(Int(oracle::rand_in(rng, lo, hi)), Int(den));
    };
    Rat l1 = rnd_rat(5, 30, 10), l2 = rnd_rat(5, 30, 10);
    Rat cosv = rnd_rat(-8, 8, 10);
    Rat sin_sq = Rat(1) - cosv * cosv;
    RatInterval sinv = sqrt_interval(sin_sq, Rat(1, 100000));
    return CuspShape::from_lengths(RatInterval(l1), RatInterval(l2), RatInterval(cosv), sinv);
}

}  // namespace

TEST_CASE("normalized_length_sq formula values") {
    CuspShape sq = CuspShape::square();
    CHECK(normalized_length_sq(sq, Slope(1, 0)).contains(Rat(1)));
    CHECK(normalized_length_sq(sq, Slope(1, 1)).contains(Rat(2)));
    CHECK(normalized_length_sq(sq, Slope(3, 4)).contains(Rat(25)));
    // exact on the square cusp (all-point intervals)
    CHECK(normalized_length_sq(sq, Slope(1, 1)).width() == 0);

    // invariance under s -> -s and the parallelogram identity
    oracle::Rng rng(2718);
    for (int i = 0; i < 50; ++i) {
        CuspShape sh = random_shape(rng);
        long long a = oracle::rand_in(rng, -6, 6), b = oracle::rand_in(rng, -6, 6);
        if (a == 0 && b == 0) a = 1;
        if (b == 0 && (a == 1 || a == -1)) a = 3;  // keep a-+1 away from (0,0)
        auto n1 = normalized_length_sq(sh, Slope(a, b));
        auto n2 = normalized_length_sq(sh, Slope(-a, -b));
        CHECK(n1.lo == n2.lo);
        CHECK(n1.hi == n2.hi);
        // parallelogram: L^2(a+1,b) + L^2(a-1,b) = 2 L^2(a,b) + 2 L^2(1,0)
        auto lhs = normalized_length_sq(sh, Slope(a + 1, b)) + normalized_length_sq(sh, Slope(a - 1, b));
        auto rhs = Rat(2) * normalized_length_sq(sh, Slope(a, b)) +
                   Rat(2) * normalized_length_sq(sh, Slope(1, 0));
        // exact rational shapes: the intervals bracket equal values
        CHECK(lhs.lo <= rhs.hi);
        CHECK(rhs.lo <= lhs.hi);
    }
}

TEST_CASE("enumerate_short_slopes on the square cusp") {
    CuspShape sq = CuspShape::square();
    auto got = enumerate_short_slopes(sq, Rat(3, 2));
    std::set<Slope> want = {Slope(1, 0), Slope(0, 1), Slope(1, 1), Slope(-1, 1)};
    CHECK(std::set<Slope>(got.begin(), got.end()) == want);
    CHECK(enumerate_short_slopes(sq, Rat(1, 2)).empty());
}

TEST_CASE("enumerate_short_slopes completeness against brute force") {
    oracle::Rng rng(1111);
    for (int trial = 0; trial < 50; ++trial) {
        CuspShape sh = random_shape(rng);
        Rat c(Int(oracle::rand_in(rng, 1, 40)), Int(10));
        auto got = enumerate_short_slopes(sh, c);
        std::set<Slope> got_set(got.begin(), got.end());
        Rat c2 = c * c;
        for (long long a = -50; a <= 50; ++a)
            for (long long b = 0; b <= 50; ++b) {
                if (b == 0 && a <= 0) continue;
                if (gcd_int(Int(a), Int(b)) != 1) continue;
                auto nl = normalized_length_sq(sh, Slope(a, b));
                if (nl.hi <= c2) {
                    // certified short: must be present
                    CHECK(got_set.count(Slope(a, b)));
                }
            }
        // no listed slope has certified lower bound above the cutoff
        for (auto& s : got) CHECK(normalized_length_sq(sh, s).lo <= c2);
    }
}

TEST_CASE("hk_threshold constants") {
    // delta = 1, b = 1: sqrt(2 pi + 28.78) < 7.823, so the max is 7.823
    auto t1 = hk_threshold(Rat(1), 1);
    CHECK(t1.contains(Rat(7823, 1000)));
    CHECK(t1.width() < Rat(1, 1000000));
    // delta = 0.1: sqrt(20 pi + 28.78) ~ 9.57 dominates
    auto t2 = hk_threshold(Rat(1, 10), 1);
    CHECK(t2.lo > Rat(95, 10));
    CHECK(t2.hi < Rat(96, 10));
    // b = 4 doubles the bound
    auto t4 = hk_threshold(Rat(1), 4);
    CHECK(t4.contains(Rat(2) * Rat(7823, 1000)));
}

TEST_CASE("filling_volume_bounds") {
    // l_min = 4 pi: factor is (3/4)^{3/2}
    RatInterval four_pi = Rat(4) * pi_interval();
    auto fb = filling_volume_bounds(RatInterval(Rat(1)), four_pi, 3);
    // (3/4)^{3/2} = sqrt(27/64)
    auto expect = sqrt_interval(Rat(27, 64), Rat(1, Int("1000000000000")));
    CHECK(fb.fkp_lower.lo <= expect.hi);
    CHECK(expect.lo <= fb.fkp_lower.hi);
    CHECK(fb.fkp_lower.width() < Rat(1, 1000000000));
    CHECK(fb.adams_lower == Rat(303, 100));
    CHECK(systole_lower(Rat(1)) == Rat(56, 1000));
    CHECK(systole_lower(Rat(1, 100)) == Rat(6034, 1000000));
    CHECK_THROWS_AS(filling_volume_bounds(RatInterval(Rat(1)), RatInterval(Rat(6)), 1),
                    PreconditionViolation);
}

TEST_CASE("total_normalized_length") {
    auto single = total_normalized_length({Rat(5, 2)});
    CHECK(single.contains(Rat(5, 2)));
    CHECK(single.width() == 0);  // perfect square case is exact
    // two equal lengths: L / sqrt(2)
    auto two = total_normalized_length({Rat(3), Rat(3)});
    CHECK(two.hi * two.hi >= Rat(9, 2) - Rat(1, 1000));
    CHECK(two.lo * two.lo <= Rat(9, 2) + Rat(1, 1000));
    // monotone: result <= min of inputs
    oracle::Rng rng(9);
    for (int i = 0; i < 40; ++i) {
        std::vector<Rat> ls;
        Rat mn(1000000);
        for (int j = 0, n = int(oracle::rand_in(rng, 1, 4)); j < n; ++j) {
            Rat l(Int(oracle::rand_in(rng, 1, 50)), Int(7));
            ls.push_back(l);
            mn = std::min(mn, l);
        }
        CHECK(total_normalized_length(ls).lo <= mn);
    }
    CHECK_THROWS_AS(total_normalized_length({}), EmptyList);
}
