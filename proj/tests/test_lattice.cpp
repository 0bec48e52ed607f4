#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "sandlab/lattice.hpp"

using namespace sandlab;

TEST_CASE("height config reads resolve through the tail") {
    HeightConfig c(0, {1, 2, 1}, Tail::AllOnes);
    CHECK(c.at(0) == 1);
    CHECK(c.at(1) == 2);
    CHECK(c.at(-5) == 1);
    CHECK(c.at(100) == 1);

    HeightConfig t(0, {2}, Tail::AllTwos);
    CHECK(t.at(7) == 2);

    HeightConfig u(0, {1, 2}, Tail::Unspecified);
    CHECK(u.at(1) == 2);
    CHECK_THROWS_AS((void)u.at(2), InsufficientWindow);
}

TEST_CASE("height values outside {1,2} are rejected") {
    CHECK_THROWS_AS(HeightConfig(0, {1, 3}, Tail::AllOnes), ParseError);
    CHECK_THROWS_AS(HeightConfig(0, {0}, Tail::AllOnes), ParseError);
}

TEST_CASE("text serialization round-trips") {
    HeightConfig c(-2, {1, 2, 2, 1, 1}, Tail::AllOnes);
    CHECK(c.to_text() == "-2 2 ones 1 2 2 1 1");
    CHECK(HeightConfig::from_text(c.to_text()) == c);
    CHECK(HeightConfig::from_text("0 0 twos 2").tail() == Tail::AllTwos);
    CHECK_THROWS_AS(HeightConfig::from_text("0 2 ones 1 1"), ParseError);
    CHECK_THROWS_AS(HeightConfig::from_text("0 0 ones 1 1"), ParseError);
    CHECK_THROWS_AS(HeightConfig::from_text("0 0 bogus 1"), ParseError);
}

TEST_CASE("from_critical_set: empty and singleton") {
    const HeightConfig empty = from_critical_set(CriticalSet{});
    for (Site i = -4; i <= 4; ++i) CHECK(empty.at(i) == 1);

    const HeightConfig one = from_critical_set(CriticalSet{{0}});
    CHECK(one.at(0) == 2);
    CHECK(one.at(-1) == 1);
    CHECK(one.at(1) == 1);
}

TEST_CASE("from_critical_set round-trips by direct scan") {
    const CriticalSet a{{-1, 0, 2}};
    const HeightConfig cfg = from_critical_set(a);
    CHECK(cfg.at(-1) == 2);
    CHECK(cfg.at(0) == 2);
    CHECK(cfg.at(2) == 2);
    CHECK(cfg.at(1) == 1);
    CHECK(cfg.at(3) == 1);
    CHECK(critical_set_of(cfg) == a);
}

TEST_CASE("round-trip property on random finite sets") {
    Rng rng(20260808);
    for (int rep = 0; rep < 200; ++rep) {
        std::vector<Site> sites;
        const int count = static_cast<int>(rng.below(8));
        for (int k = 0; k < count; ++k) sites.push_back(rng.pick(-30, 30));
        const CriticalSet a{sites};
        CHECK(critical_set_of(from_critical_set(a)) == a);
    }
}

TEST_CASE("interval decomposition of the all-ones configuration") {
    const auto dec = interval_decomposition(testing::all_ones(), -5, 5);
    for (long j = -5; j <= 5; ++j) {
        CHECK(dec.one_position(j) == j);
        CHECK(dec.interval_size(j) == 1);
    }
}

TEST_CASE("interval decomposition around a single critical site") {
    const HeightConfig cfg = from_critical_set(CriticalSet{{0}});
    const auto dec = interval_decomposition(cfg, -2, 2);
    CHECK(dec.one_position(-1) == -1);
    CHECK(dec.one_position(0) == 1);
    CHECK(dec.interval_first(0) == 0);
    CHECK(dec.interval_last(0) == 1);
    CHECK(dec.interval_size(0) == 2);
    CHECK(dec.interval_size(1) == 1);
    CHECK(dec.interval_size(-1) == 1);
}

TEST_CASE("interval decomposition fails without ones") {
    CHECK_THROWS_AS(interval_decomposition(testing::all_twos(), 0, 1), InsufficientWindow);
    HeightConfig narrow(0, {2, 2}, Tail::Unspecified);
    CHECK_THROWS_AS(interval_decomposition(narrow, 0, 1), InsufficientWindow);
}

TEST_CASE("intervals tile the span with ones at right endpoints") {
    Rng rng(77);
    for (int rep = 0; rep < 100; ++rep) {
        const HeightConfig cfg = testing::random_omega_f(rng, -25, 25, 0.45);
        const auto dec = interval_decomposition(cfg, -4, 4);
        Site expect_first = dec.one_position(-5) + 1;
        for (long j = -4; j <= 4; ++j) {
            CHECK(dec.interval_first(j) == expect_first);  // no gaps, no overlap
            CHECK(dec.interval_size(j) >= 1);
            CHECK(cfg.at(dec.interval_last(j)) == 1);
            for (Site s = dec.interval_first(j); s < dec.interval_last(j); ++s)
                CHECK(cfg.at(s) == 2);
            expect_first = dec.interval_last(j) + 1;
        }
        CHECK(dec.size_sum(-4, 4) == dec.one_position(4) - dec.one_position(-5));
    }
}

TEST_CASE("decency of a finite-critical configuration tends to one") {
    const HeightConfig cfg = from_critical_set(CriticalSet{{-3, 0, 1, 7}});
    const DecencyReport rep = decency_report(cfg, 200);
    CHECK(rep.a_estimate == doctest::Approx(1.0).epsilon(0.02));
    CHECK(rep.radius == doctest::Approx(1.0 / (4.0 * std::exp(1.0))).epsilon(0.02));
}

TEST_CASE("decency of the periodic two-one configuration") {
    // ... 2 1 2 1 ... on a width-200 window: every interval has size 2.
    std::vector<std::uint8_t> h;
    for (Site i = -100; i <= 99; ++i) h.push_back(i % 2 == 0 ? 2 : 1);
    const HeightConfig cfg(-100, std::move(h), Tail::Unspecified);
    const DecencyReport rep = decency_report(cfg, 40);
    for (std::size_t k = 0; k < rep.partial_a.size(); ++k) {
        const double n = static_cast<double>(k + 1);
        CHECK(rep.partial_a[k] == doctest::Approx(2.0 * (2.0 * n + 1.0) / (2.0 * n)));
    }
    CHECK(rep.a_estimate == doctest::Approx(2.0).epsilon(0.05));
    CHECK(rep.rho_estimate == doctest::Approx(0.5).epsilon(0.02));
}

TEST_CASE("decency of the all-ones configuration") {
    const DecencyReport rep = decency_report(testing::all_ones(), 60);
    CHECK(rep.a_estimate == doctest::Approx(1.0).epsilon(0.04));
    CHECK(rep.radius == doctest::Approx(0.09197).epsilon(0.04));
    for (double v : rep.partial_a) CHECK(v > 0.0);
    CHECK(rep.a_estimate >= 1.0);
}

TEST_CASE("density times average interval size stays near one") {
    // Periodic patterns with p sites per period and k ones per period.
    struct Pattern {
        std::vector<std::uint8_t> period;
    };
    const std::vector<Pattern> patterns = {
        {{2, 1}}, {{2, 2, 1}}, {{2, 1, 1}}, {{2, 2, 1, 2, 1}}, {{1}},
    };
    for (const auto& p : patterns) {
        std::vector<std::uint8_t> h;
        for (Site i = 0; i < 600; ++i)
            h.push_back(p.period[static_cast<std::size_t>(i) % p.period.size()]);
        const HeightConfig cfg(-300, std::move(h), Tail::Unspecified);
        const DecencyReport rep = decency_report(cfg, 50);
        CHECK(rep.a_estimate * rep.rho_estimate > 0.9);
        CHECK(rep.a_estimate * rep.rho_estimate < 1.1);
    }
}

TEST_CASE("pointwise ordering over tails") {
    const HeightConfig ones = testing::all_ones();
    const HeightConfig mid = from_critical_set(CriticalSet{{1, 2}});
    CHECK(leq_everywhere(ones, mid));
    CHECK_FALSE(leq_everywhere(mid, ones));
    CHECK(leq_everywhere(mid, testing::all_twos()));
    CHECK_FALSE(leq_everywhere(testing::all_twos(), mid));
    CHECK(leq_everywhere(mid, mid));
}
