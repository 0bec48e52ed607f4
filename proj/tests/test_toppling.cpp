#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "sandlab/toppling.hpp"

using namespace sandlab;

TEST_CASE("k distances: direct scans") {
    const HeightConfig ones = testing::all_ones();
    CHECK(k_plus(5, ones) == ExtNat::finite(0));
    CHECK(k_minus(5, ones) == ExtNat::finite(1));

    const HeightConfig pair = from_critical_set(CriticalSet{{0, 1}});
    CHECK(k_plus(0, pair) == ExtNat::finite(2));
    CHECK(k_minus(0, pair) == ExtNat::finite(1));

    CHECK(k_plus(3, testing::all_twos()).is_infinite());
    CHECK(k_minus(3, testing::all_twos()).is_infinite());
}

TEST_CASE("k scans fail fast on unspecified tails") {
    const HeightConfig u(0, {2, 2, 2}, Tail::Unspecified);
    CHECK_THROWS_AS((void)k_plus(0, u), InsufficientWindow);
    CHECK_THROWS_AS((void)k_minus(0, u), InsufficientWindow);
}

TEST_CASE("topple cases: birth") {
    const TopplingOutcome out = topple_add(0, testing::all_ones());
    CHECK(out.case_id == ToppleCase::Birth);
    CHECK(out.k_plus == ExtNat::finite(0));
    CHECK_FALSE(out.hole.has_value());
    CHECK(out.config == from_critical_set(CriticalSet{{0}}));
}

TEST_CASE("topple cases: interior avalanche, checked grain by grain") {
    const HeightConfig eta = from_critical_set(CriticalSet{{0, 1}});
    const TopplingOutcome out = topple_add(0, eta);
    CHECK(out.case_id == ToppleCase::Interior);
    CHECK(out.k_plus == ExtNat::finite(2));
    CHECK(out.k_minus == ExtNat::finite(1));
    REQUIRE(out.hole.has_value());
    CHECK(*out.hole == 1);
    CHECK(critical_set_of(out.config) == CriticalSet{{-1, 0, 2}});
    CHECK(out.config == testing::grain_oracle_topple(0, eta, 1));
}

TEST_CASE("topple cases: all-twos is a fixed point") {
    const HeightConfig two_hat = testing::all_twos();
    const TopplingOutcome out = topple_add(3, two_hat);
    CHECK(out.case_id == ToppleCase::AllTwos);
    CHECK(out.k_plus.is_infinite());
    CHECK(out.k_minus.is_infinite());
    CHECK(out.config == two_hat);
}

TEST_CASE("topple cases: escapes on half-infinite two blocks") {
    // ... 2 2 2 1 1 ... : twos tail on the left, ones in window.
    HeightConfig left_block(0, {2, 1, 1}, Tail::AllTwos);
    // adding below the window: grain surfaces at the first one to the right.
    const TopplingOutcome r = topple_add(-4, left_block);
    CHECK(r.case_id == ToppleCase::RightEscape);
    CHECK(r.k_minus.is_infinite());
    CHECK(r.config.at(1) == 2);

    HeightConfig right_block(-2, {1, 1, 2}, Tail::AllTwos);
    const TopplingOutcome l = topple_add(4, right_block);
    CHECK(l.case_id == ToppleCase::LeftEscape);
    CHECK(l.k_plus.is_infinite());
    CHECK(l.config.at(-1) == 2);
}

TEST_CASE("topple matches the grain oracle on random configurations") {
    Rng rng(42);
    for (int rep = 0; rep < 300; ++rep) {
        const HeightConfig eta = testing::random_omega_f(rng, -12, 12, 0.5);
        const Site i = rng.pick(-14, 14);
        const TopplingOutcome out = topple_add(i, eta);
        CHECK(out.config == testing::grain_oracle_topple(i, eta, rng.next_u64()));
    }
}

TEST_CASE("critical set grows by exactly one for birth and interior cases") {
    Rng rng(43);
    for (int rep = 0; rep < 300; ++rep) {
        const HeightConfig eta = testing::random_omega_f(rng, -10, 10, 0.5);
        const Site i = rng.pick(-11, 11);
        const TopplingOutcome out = topple_add(i, eta);
        REQUIRE((out.case_id == ToppleCase::Birth || out.case_id == ToppleCase::Interior));
        CHECK(critical_set_of(out.config).size() == critical_set_of(eta).size() + 1);
        if (out.case_id == ToppleCase::Interior)
            CHECK(*out.hole == i + out.k_plus.value() - out.k_minus.value());
    }
}

TEST_CASE("toppling acts only between the flanking ones") {
    Rng rng(44);
    for (int rep = 0; rep < 200; ++rep) {
        const HeightConfig eta = testing::random_omega_f(rng, -10, 10, 0.6);
        const Site i = rng.pick(-10, 10);
        const TopplingOutcome out = topple_add(i, eta);
        if (out.case_id != ToppleCase::Interior) continue;
        const Site a = i - out.k_minus.value();
        const Site b = i + out.k_plus.value();
        for (Site s = -15; s <= 15; ++s) {
            if (s < a || s > b) CHECK(out.config.at(s) == eta.at(s));
        }
    }
}

TEST_CASE("abelian commutation on small windows") {
    Rng rng(45);
    for (int rep = 0; rep < 200; ++rep) {
        const HeightConfig eta = testing::random_omega_f(rng, -5, 5, 0.5);
        const Site i = rng.pick(-6, 6);
        const Site j = rng.pick(-6, 6);
        CHECK(topple_add(j, topple_add(i, eta).config).config ==
              topple_add(i, topple_add(j, eta).config).config);
    }
}

TEST_CASE("phi: equal configurations couple to the same site") {
    const HeightConfig eta = from_critical_set(CriticalSet{{0}});
    const auto site = phi(0, eta, eta);
    REQUIRE(site.has_value());
    CHECK(*site == 0);
}

TEST_CASE("phi: strictly smaller lower configuration, direct scan") {
    const HeightConfig eta = from_critical_set(CriticalSet{{0, 1}});
    const HeightConfig xi = from_critical_set(CriticalSet{{1}});
    // The avalanche in eta at 0 puts its one at 1; xi(1) = 2, and toppling
    // xi at 1 + k_plus(1, xi) - k_minus(1, xi) = 1 + 1 - 1 = 1 recreates it.
    const auto site = phi(0, eta, xi);
    REQUIRE(site.has_value());
    CHECK(*site == 1);
    CHECK(*topple_add(*site, xi).hole == *topple_add(0, eta).hole);
}

TEST_CASE("phi: infinite when the lower configuration already has the one") {
    const HeightConfig eta = from_critical_set(CriticalSet{{0}});
    CHECK_FALSE(phi(0, eta, testing::all_ones()).has_value());
}

TEST_CASE("phi rejects bad inputs") {
    const HeightConfig eta = from_critical_set(CriticalSet{{0}});
    const HeightConfig bigger = from_critical_set(CriticalSet{{0, 3}});
    CHECK_THROWS_AS((void)phi(0, eta, bigger), NotOrdered);
    CHECK_THROWS_AS((void)phi(5, eta, eta), InvalidSite);
}

TEST_CASE("phi sends the toppling where the same hole appears") {
    Rng rng(46);
    int interesting = 0;
    for (int rep = 0; rep < 400; ++rep) {
        const HeightConfig eta = testing::random_omega_f(rng, -9, 9, 0.55);
        // lower: erase some critical sites
        std::vector<std::uint8_t> hl;
        for (Site s = -9; s <= 9; ++s)
            hl.push_back(eta.at(s) == 2 && rng.unit() < 0.4 ? 1 : static_cast<std::uint8_t>(eta.at(s)));
        const HeightConfig xi(-9, std::move(hl), Tail::AllOnes);
        const auto crit = critical_set_of(eta).sites();
        if (crit.empty()) continue;
        const Site i = crit[rng.below(crit.size())];
        const TopplingOutcome up = topple_add(i, eta);
        if (up.case_id != ToppleCase::Interior) continue;
        const auto j = phi(i, eta, xi);
        if (!j.has_value()) {
            CHECK(xi.at(*up.hole) == 1);
            continue;
        }
        ++interesting;
        const TopplingOutcome low = topple_add(*j, xi);
        REQUIRE(low.case_id == ToppleCase::Interior);
        CHECK(*low.hole == *up.hole);
    }
    CHECK(interesting > 50);
}

TEST_CASE("finite-volume toppling: boundary losses") {
    const HeightConfig full(-1, {2, 2, 2}, Tail::AllOnes);
    const HeightConfig after = topple_add_finite(1, 0, full);
    CHECK(after == HeightConfig(-1, {2, 1, 2}, Tail::AllOnes));
    CHECK(after == testing::grain_oracle_topple_finite(1, 0, full, 5));

    const HeightConfig ones(-1, {1, 1, 1}, Tail::AllOnes);
    CHECK(topple_add_finite(1, 1, ones) == HeightConfig(-1, {1, 1, 2}, Tail::AllOnes));

    const HeightConfig wide(-2, {2, 2, 2, 2, 2}, Tail::AllOnes);
    const HeightConfig res = topple_add_finite(2, 0, wide);
    int ones_count = 0;
    for (Site s = -2; s <= 2; ++s)
        if (res.at(s) == 1) ++ones_count;
    CHECK(ones_count == 1);
    CHECK(res.at(0) == 1);

    CHECK_THROWS_AS(topple_add_finite(1, 2, ones), InvalidSite);
}

TEST_CASE("finite-volume toppling matches the absorbing grain oracle") {
    Rng rng(47);
    for (int rep = 0; rep < 300; ++rep) {
        const long n = 1 + static_cast<long>(rng.below(6));
        const HeightConfig eta = testing::random_omega_f(rng, -n, n, 0.5);
        const Site i = rng.pick(-n, n);
        CHECK(topple_add_finite(n, i, eta) ==
              testing::grain_oracle_topple_finite(n, i, eta, rng.next_u64()));
    }
}

TEST_CASE("grain field text round-trip") {
    GrainField f;
    f.lo = -1;
    f.counts = {2, 3, 2};
    CHECK(f.to_text() == "-1 1 2 3 2");
    const GrainField g = GrainField::from_text(f.to_text());
    CHECK(g.lo == f.lo);
    CHECK(g.counts == f.counts);
    CHECK_THROWS_AS(GrainField::from_text("0 1 4"), ParseError);
}

TEST_CASE("stabilize: no grains means all ones") {
    GrainField f;
    f.lo = -3;
    f.counts = {1, 1, 1, 1, 1, 1, 1};
    CHECK(stabilize(3, f) == HeightConfig(-3, {1, 1, 1, 1, 1, 1, 1}, Tail::AllOnes));
}

TEST_CASE("stabilize: worked three-site example") {
    GrainField f;
    f.lo = -1;
    f.counts = {2, 3, 2};
    const HeightConfig got = stabilize(1, f);
    CHECK(got == HeightConfig(-1, {2, 1, 2}, Tail::AllOnes));
    CHECK(got == stabilize_bruteforce(1, f, 99));
}

TEST_CASE("stabilize: already stable input is untouched") {
    GrainField f;
    f.lo = -1;
    f.counts = {2, 2, 2};
    CHECK(stabilize(1, f) == HeightConfig(-1, {2, 2, 2}, Tail::AllOnes));
}

TEST_CASE("stabilize rejects zero counts inside the volume") {
    GrainField f;
    f.lo = -1;
    f.counts = {2, 0, 2};
    CHECK_THROWS_AS(stabilize(1, f), InvalidGrainField);
    CHECK_THROWS_AS(stabilize_bruteforce(1, f, 1), InvalidGrainField);
    GrainField narrow;
    narrow.lo = 0;
    narrow.counts = {1, 1};
    CHECK_THROWS_AS(stabilize(2, narrow), InsufficientWindow);
}

TEST_CASE("stabilize equals sequential finite-volume toppling") {
    Rng rng(48);
    for (int rep = 0; rep < 50; ++rep) {
        const long n = 1 + static_cast<long>(rng.below(4));
        GrainField f;
        f.lo = -n;
        for (Site i = -n; i <= n; ++i) f.counts.push_back(1 + rng.below(4));

        // Sequential route: ones, then count-1 single additions per site.
        HeightConfig cfg(-n, std::vector<std::uint8_t>(static_cast<std::size_t>(2 * n + 1), 1),
                         Tail::AllOnes);
        for (Site i = -n; i <= n; ++i)
            for (std::uint64_t c = 1; c < f.at(i); ++c) cfg = topple_add_finite(n, i, cfg);
        CHECK(stabilize(n, f) == cfg);
    }
}

TEST_CASE("stabilize agrees with the randomized brute force") {
    Rng rng(49);
    for (int rep = 0; rep < 200; ++rep) {
        const long n = 1 + static_cast<long>(rng.below(20));
        GrainField f;
        f.lo = -n;
        for (Site i = -n; i <= n; ++i) f.counts.push_back(1 + rng.below(6));
        CHECK(stabilize(n, f) == stabilize_bruteforce(n, f, rng.next_u64()));
    }
}
