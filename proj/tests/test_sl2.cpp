#include <catch2/catch_amalgamated.hpp>

#include "dehnfill/sl2conj.hpp"

#include "oracles.hpp"

using namespace dehnfill;

namespace {

GL2Matrix random_gl2(oracle::Rng& rng, long long maxentry) {
    // random product of generators keeps entries unimodular
    GL2Matrix m = GL2Matrix::identity();
    const GL2Matrix S(0, -1, 1, 0), J = GL2Matrix::reflection();
    int steps = int(oracle::rand_in(rng, 1, 6));
    for (int i = 0; i < steps; ++i) {
        switch (oracle::rand_in(rng, 0, 2)) {
            case 0: m = m * GL2Matrix::twist(Int(oracle::rand_in(rng, -3, 3))); break;
            case 1: m = m * S; break;
            default: m = m * J; break;
        }
        if (abs_int(m.a) > maxentry || abs_int(m.b) > maxentry || abs_int(m.c) > maxentry ||
            abs_int(m.d) > maxentry)
            return m.det() == 1 ? GL2Matrix::identity() : J;
    }
    return m;
}

FreeWord random_word(oracle::Rng& rng, size_t len) {
    std::string s;
    const char* alpha = "abB";
    for (size_t i = 0; i < len; ++i) s += alpha[oracle::rand_in(rng, 0, 2)];
    return FreeWord::from_string(s);
}

}  // namespace

TEST_CASE("word reduction basics") {
    CHECK(reduce(FreeWord::from_string("abBa")).length() == 0);
    CHECK(reduce(FreeWord::from_string("ababab")).str() == "ababab");
    CHECK(reduce(FreeWord::from_string("bbb")).length() == 0);
    CHECK(reduce(FreeWord::from_string("bb")).str() == "B");
    // idempotent on random words; preserves phi-image up to sign; shortens
    oracle::Rng rng(99);
    for (int i = 0; i < 200; ++i) {
        FreeWord w = random_word(rng, size_t(oracle::rand_in(rng, 0, 12)));
        FreeWord r = reduce(w);
        CHECK(reduce(r) == r);
        CHECK(r.length() <= w.length());
        CHECK(equal_up_to_sign(phi_evaluate(w), phi_evaluate(r)));
    }
}

TEST_CASE("cyclic reduction matches the definition on short words") {
    CHECK(cyclically_reduce(FreeWord::from_string("baB")).str() == "a");
    // exhaustive over words of length <= 4: result is reduced, satisfies the
    // boundary-letter condition, and conjugation by a letter never shortens
    std::vector<std::string> alphabet = {"a", "b", "B"};
    std::function<void(std::string, size_t)> walk = [&](std::string cur, size_t rem) {
        FreeWord w = FreeWord::from_string(cur);
        FreeWord cr = cyclically_reduce(w);
        CHECK(reduce(cr) == cr);
        if (cr.length() >= 2) {
            bool fa = cr.letters.front().is_a, la = cr.letters.back().is_a;
            CHECK(fa != la);
        }
        for (auto& x : alphabet) {
            FreeWord conj = reduce(
                FreeWord::from_string(x).concat(w).concat(FreeWord::from_string(x).inverse()));
            CHECK(cyclically_reduce(conj).length() == cr.length());
        }
        if (rem == 0) return;
        for (auto& x : alphabet) walk(cur + x, rem - 1);
    };
    walk("", 4);
}

TEST_CASE("phi homomorphism and decomposition") {
    // generator images
    CHECK(phi_evaluate(FreeWord::from_string("a")) == GL2Matrix(0, -1, 1, 0));
    CHECK(equal_up_to_sign(phi_evaluate(FreeWord::from_string("ba")), GL2Matrix::twist(1)));

    // phi(uv) = +-phi(u)phi(v)
    oracle::Rng rng(321);
    for (int i = 0; i < 100; ++i) {
        FreeWord u = random_word(rng, size_t(oracle::rand_in(rng, 0, 12)));
        FreeWord v = random_word(rng, size_t(oracle::rand_in(rng, 0, 12)));
        CHECK(equal_up_to_sign(phi_evaluate(u.concat(v)), phi_evaluate(u) * phi_evaluate(v)));
    }

    // psl2_decompose spec examples
    CHECK(psl2_decompose(GL2Matrix(0, -1, 1, 0)).str() == "a");
    CHECK(psl2_decompose(GL2Matrix::identity()).length() == 0);
    CHECK(equal_up_to_sign(phi_evaluate(psl2_decompose(GL2Matrix::twist(1))), GL2Matrix::twist(1)));

    // random round trips
    for (int i = 0; i < 200; ++i) {
        GL2Matrix m = random_gl2(rng, 1000);
        if (m.det() != 1) m = m * GL2Matrix::reflection();
        FreeWord w = psl2_decompose(m);
        CHECK(equal_up_to_sign(phi_evaluate(w), m));
        CHECK(reduce(w) == w);
    }
}

TEST_CASE("claim 3 length inequality holds empirically") {
    oracle::Rng rng(1234);
    FreeWord ba = FreeWord::from_string("ba");
    int done = 0;
    while (done < 60) {
        FreeWord g = reduce(random_word(rng, size_t(oracle::rand_in(rng, 1, 6))));
        if (g.length() == 0) continue;
        // skip powers of ba
        bool is_power = false;
        for (long long p = -4; p <= 4; ++p)
            if (reduce(ba.power(p)) == g) is_power = true;
        if (is_power) continue;
        long long lg = static_cast<long long>(g.length());
        long long m = oracle::rand_in(rng, lg + 1, lg + 6) * (oracle::rand_in(rng, 0, 1) ? 1 : -1);
        long long n = oracle::rand_in(rng, lg + 1, lg + 6) * (oracle::rand_in(rng, 0, 1) ? 1 : -1);
        FreeWord word = reduce(ba.power(n).concat(g).concat(ba.power(m)));
        CHECK(static_cast<long long>(word.length()) >=
              2 * std::llabs(m) + 2 * std::llabs(n) - lg - 4);
        ++done;
    }
}

TEST_CASE("conjugate_sl2 base facts") {
    oracle::Rng rng(777);
    GL2Matrix X = random_gl2(rng, 50);
    CHECK(conjugate_sl2(X, X));

    // (1 1; 0 1) vs (1 -1; 0 1): not conjugate in SL2(Z)
    CHECK(!conjugate_sl2(GL2Matrix::twist(1), GL2Matrix::twist(-1)));

    // traceless det -1 matrices split into two classes by twist parity:
    // diag(1,-1) and the swap matrix are NOT conjugate (any conjugator has
    // even determinant), while (1 1; 0 -1) and the swap matrix are.
    CHECK(!conjugate_sl2(GL2Matrix(1, 0, 0, -1), GL2Matrix(0, 1, 1, 0)));
    CHECK(conjugate_sl2(GL2Matrix(1, 1, 0, -1), GL2Matrix(0, 1, 1, 0)));
    CHECK(conjugate_sl2(GL2Matrix(1, 2, 0, -1), GL2Matrix(1, 0, 0, -1)));

    // symmetry and simultaneous-conjugation invariance on random pairs
    for (int i = 0; i < 60; ++i) {
        GL2Matrix A = random_gl2(rng, 40), B = random_gl2(rng, 40);
        if (A.det() != B.det()) B = B * GL2Matrix::reflection();
        bool ab = conjugate_sl2(A, B);
        CHECK(ab == conjugate_sl2(B, A));
        GL2Matrix Z = GL2Matrix::identity();
        for (int s = 0; s < 3; ++s)
            Z = Z * (oracle::rand_in(rng, 0, 1) ? GL2Matrix::twist(Int(oracle::rand_in(rng, -2, 2)))
                                                : GL2Matrix(0, -1, 1, 0));
        CHECK(conjugate_sl2(Z * A * Z.inverse(), Z * B * Z.inverse()) == ab);
    }

    // explicit conjugates must be detected (all trace regimes)
    for (int i = 0; i < 120; ++i) {
        GL2Matrix A = random_gl2(rng, 30);
        GL2Matrix Z = GL2Matrix::identity();
        int steps = int(oracle::rand_in(rng, 1, 4));
        for (int s = 0; s < steps; ++s)
            Z = Z * (oracle::rand_in(rng, 0, 1) ? GL2Matrix::twist(Int(oracle::rand_in(rng, -2, 2)))
                                                : GL2Matrix(0, -1, 1, 0));
        CHECK(conjugate_sl2(A, Z * A * Z.inverse()));
    }
}

TEST_CASE("conjugate_sl2 agrees with BFS conjugator search") {
    // BFS certifies positives; whenever it finds an SL2 conjugator, the
    // library answer must be yes. Conversely if the library says yes on a
    // small pair, a conjugator should exist within a generous radius.
    oracle::Rng rng(2024);
    const GL2Matrix S(0, -1, 1, 0), T = GL2Matrix::twist(1), Tn = GL2Matrix::twist(-1);
    auto bfs_conjugate = [&](const GL2Matrix& A, const GL2Matrix& B, int maxdepth) {
        std::set<std::string> seen;
        std::vector<GL2Matrix> frontier = {GL2Matrix::identity()};
        for (int depth = 0; depth <= maxdepth; ++depth) {
            std::vector<GL2Matrix> next;
            for (auto& Z : frontier) {
                if (Z * A == B * Z) return true;
                for (const auto& g : {S, T, Tn}) {
                    GL2Matrix W = Z * g;
                    if (abs_int(W.a) > 60 || abs_int(W.b) > 60 || abs_int(W.c) > 60 ||
                        abs_int(W.d) > 60)
                        continue;
                    if (seen.insert(W.str()).second) next.push_back(W);
                }
            }
            frontier = std::move(next);
        }
        return false;
    };
    int positives = 0;
    for (int trial = 0; trial < 40; ++trial) {
        GL2Matrix A = random_gl2(rng, 6), B = random_gl2(rng, 6);
        if (A.det() != B.det()) continue;
        bool found = bfs_conjugate(A, B, 10);
        if (found) {
            CHECK(conjugate_sl2(A, B));
            ++positives;
        }
    }
    CHECK(positives >= 3);
}

TEST_CASE("parameterized conjugacy: simple shapes") {
    VarId n("n");
    // word = T(n), y = id  ->  {n = 0}
    MatrixWord w;
    w.fixed = {GL2Matrix::identity(), GL2Matrix::identity()};
    w.twists = {AffineForm::variable(n)};
    auto sys = parameterized_conjugacy_system(w, GL2Matrix::identity());
    for (long long v = -15; v <= 15; ++v) {
        Valuation val = oracle::make_valuation({{"n", v}});
        CHECK(sys.satisfied(val) == (v == 0));
    }
    CHECK(conjugacy_bound(w, GL2Matrix::identity()) >= 1);

    // word = X T(n) X^-1, y = T(5) -> system equivalent to {n = 5}
    oracle::Rng rng(5150);
    for (int i = 0; i < 10; ++i) {
        GL2Matrix X = random_gl2(rng, 20);
        MatrixWord wc;
        wc.fixed = {X, X.inverse()};
        wc.twists = {AffineForm::variable(n)};
        auto s2 = parameterized_conjugacy_system(wc, GL2Matrix::twist(5));
        for (long long v = -20; v <= 20; ++v) {
            Valuation val = oracle::make_valuation({{"n", v}});
            INFO("X = " << X.str() << " v = " << v);
            CHECK(s2.satisfied(val) == conjugate_sl2(wc.evaluate(val), GL2Matrix::twist(5)));
        }
    }

    // h = 0 word: bound is 0
    MatrixWord w0 = MatrixWord::constant(GL2Matrix::twist(3));
    CHECK(conjugacy_bound(w0, GL2Matrix::identity()) == 0);
}

TEST_CASE("claim-1 normalization preserves pointwise conjugacy") {
    oracle::Rng rng(8080);
    for (int trial = 0; trial < 40; ++trial) {
        size_t h = size_t(oracle::rand_in(rng, 1, 2));
        MatrixWord w;
        for (size_t i = 0; i <= h; ++i) w.fixed.push_back(random_gl2(rng, 5));
        std::vector<VarId> vars;
        for (size_t i = 0; i < h; ++i) {
            VarId v("n" + std::to_string(i + 1));
            vars.push_back(v);
            w.twists.push_back(AffineForm::variable(v));
        }
        GL2Matrix Y = random_gl2(rng, 5);
        if (w.det() != Y.det()) Y = Y * GL2Matrix::reflection();
        auto norm = sl2detail::claim1_normalize(w, Y);
        std::vector<Int> assign(h, -6);
        while (true) {
            Valuation val;
            for (size_t i = 0; i < h; ++i) val[vars[i]] = assign[i];
            bool before = conjugate_sl2(w.evaluate(val), Y);
            bool after = conjugate_sl2(norm.word.evaluate(val), norm.target);
            if (before != after) {
                UNSCOPED_INFO("w0=" << w.fixed[0].str() << " w1=" << w.fixed[1].str()
                                    << (h > 1 ? " w2=" + w.fixed[2].str() : std::string())
                                    << " Y=" << Y.str());
                for (size_t i = 0; i < h; ++i) UNSCOPED_INFO("n" << i + 1 << "=" << assign[i]);
            }
            REQUIRE(before == after);
            size_t i = 0;
            while (i < h && assign[i] == 6) assign[i++] = -6;
            if (i == h) break;
            ++assign[i];
        }
    }
}

TEST_CASE("parameterized conjugacy master property (randomized)") {
    oracle::Rng rng(31337);
    int words_done = 0;
    while (words_done < 12) {
        size_t h = size_t(oracle::rand_in(rng, 1, 2));
        MatrixWord w;
        for (size_t i = 0; i <= h; ++i) w.fixed.push_back(random_gl2(rng, 5));
        std::vector<VarId> vars;
        for (size_t i = 0; i < h; ++i) {
            VarId v("n" + std::to_string(i + 1));
            vars.push_back(v);
            w.twists.push_back(AffineForm::variable(v));
        }
        GL2Matrix Y = random_gl2(rng, 5);
        if (w.det() != Y.det()) Y = Y * GL2Matrix::reflection();
        Int C = 0;
        bool have_bound = true;
        try {
            C = conjugacy_bound(w, Y);
        } catch (const NormalFormFailure&) {
            have_bound = false;  // traceless family: no finite exclusion bound
        }
        if (C > 20) continue;  // keep the box affordable in a unit test
        auto sys = parameterized_conjugacy_system(w, Y);
        Int B = have_bound ? C + 5 : Int(9);
        std::vector<Int> assign(h, -B);
        bool mismatch = false;
        while (true) {
            Valuation val;
            for (size_t i = 0; i < h; ++i) val[vars[i]] = assign[i];
            bool member = sys.satisfied(val);
            bool direct = conjugate_sl2(w.evaluate(val), Y);
            if (member != direct) {
                mismatch = true;
                UNSCOPED_INFO("word fixed[0]=" << w.fixed[0].str() << " Y=" << Y.str());
                for (size_t i = 0; i < h; ++i) UNSCOPED_INFO("n" << i + 1 << " = " << assign[i]);
                break;
            }
            bool all_big = have_bound;
            for (size_t i = 0; i < h; ++i)
                if (abs_int(assign[i]) < C) all_big = false;
            if (all_big && C > 0) CHECK(!direct);
            size_t i = 0;
            while (i < h && assign[i] == B) assign[i++] = -B;
            if (i == h) break;
            ++assign[i];
        }
        CHECK(!mismatch);
        ++words_done;
    }
}
