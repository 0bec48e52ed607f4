#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "sandlab/exact.hpp"

using namespace sandlab;

TEST_CASE("state space indexing is a lexicographic bijection") {
    const StateSpace space(1);
    CHECK(space.size() == 8);
    CHECK(space.config(0) == HeightConfig(-1, {1, 1, 1}, Tail::AllOnes));
    CHECK(space.config(7) == HeightConfig(-1, {2, 2, 2}, Tail::AllOnes));
    CHECK(space.config(4) == HeightConfig(-1, {2, 1, 1}, Tail::AllOnes));
    for (std::size_t s = 0; s < space.size(); ++s) CHECK(space.index_of(space.config(s)) == s);
    CHECK_THROWS_AS(StateSpace(7), SizeLimit);
}

TEST_CASE("recurrent sets by enumeration") {
    CHECK(recurrent_set(0).size() == 2);
    const StateSpace s1(1);
    const auto rec1 = recurrent_set(1);
    CHECK(rec1.size() == 4);
    std::vector<HeightConfig> expect = {
        HeightConfig(-1, {1, 2, 2}, Tail::AllOnes),
        HeightConfig(-1, {2, 1, 2}, Tail::AllOnes),
        HeightConfig(-1, {2, 2, 1}, Tail::AllOnes),
        HeightConfig(-1, {2, 2, 2}, Tail::AllOnes),
    };
    for (const auto& cfg : expect) {
        bool found = false;
        for (std::size_t idx : rec1) found = found || s1.config(idx) == cfg;
        CHECK(found);
    }
    CHECK(recurrent_set(2).size() == 6);
    CHECK(recurrent_set(3).size() == 8);
}

TEST_CASE("two-state generator by hand") {
    const RateMatrix q = build_generator(0);
    REQUIRE(q.size == 2);
    CHECK(q.at(0, 0) == -1.0);
    CHECK(q.at(0, 1) == 1.0);
    CHECK(q.at(1, 0) == 1.0);
    CHECK(q.at(1, 1) == -1.0);
}

TEST_CASE("generator rows sum to zero with nonnegative integer rates") {
    for (long n = 0; n <= 3; ++n) {
        const RateMatrix q = build_generator(n);
        for (std::size_t s = 0; s < q.size; ++s) {
            double row = 0.0;
            for (std::size_t t = 0; t < q.size; ++t) {
                row += q.at(s, t);
                if (s != t) {
                    CHECK(q.at(s, t) >= 0.0);
                    CHECK(q.at(s, t) == std::floor(q.at(s, t)));
                }
            }
            CHECK(row == doctest::Approx(0.0).epsilon(1e-14));
        }
    }
}

TEST_CASE("generator entry from the full state") {
    const StateSpace space(1);
    const RateMatrix q = build_generator(1);
    const std::size_t full = space.index_of(HeightConfig(-1, {2, 2, 2}, Tail::AllOnes));
    const std::size_t holed = space.index_of(HeightConfig(-1, {2, 1, 2}, Tail::AllOnes));
    CHECK(q.at(full, holed) >= 1.0);
}

TEST_CASE("stationary distribution is uniform on the recurrent set") {
    for (long n = 0; n <= 3; ++n) {
        const Distribution pi = stationary_distribution(n);
        const auto rec = recurrent_set(n);
        const double expect = 1.0 / static_cast<double>(rec.size());
        std::vector<bool> is_rec(pi.weights.size(), false);
        for (std::size_t idx : rec) is_rec[idx] = true;
        for (std::size_t s = 0; s < pi.weights.size(); ++s) {
            if (is_rec[s])
                CHECK(std::abs(pi.weights[s] - expect) < 1e-10);
            else
                CHECK(std::abs(pi.weights[s]) < 1e-10);
        }
    }
}

TEST_CASE("reversibility identity for indicators and random observables") {
    {
        const StateSpace space(1);
        std::vector<double> f(8, 0.0), g(8, 0.0);
        f[space.index_of(HeightConfig(-1, {2, 1, 2}, Tail::AllOnes))] = 1.0;
        g[space.index_of(HeightConfig(-1, {2, 2, 2}, Tail::AllOnes))] = 1.0;
        const auto [lhs, rhs] = check_reversibility(1, f, g);
        CHECK(std::abs(lhs - rhs) <= 1e-12);
    }
    Rng rng(7);
    for (long n = 0; n <= 3; ++n) {
        const std::size_t m = std::size_t{1} << (2 * n + 1);
        for (int rep = 0; rep < 25; ++rep) {
            std::vector<double> f(m), g(m);
            for (auto& v : f) v = rng.unit() * 2.0 - 1.0;
            for (auto& v : g) v = rng.unit() * 2.0 - 1.0;
            const auto [lhs, rhs] = check_reversibility(n, f, g);
            CHECK(std::abs(lhs - rhs) <= 1e-12);
        }
    }
}

TEST_CASE("detailed balance holds pairwise on the recurrent set") {
    for (long n = 0; n <= 3; ++n) {
        const RateMatrix q = build_generator(n);
        const Distribution mu = stationary_of(q);
        for (std::size_t s = 0; s < q.size; ++s)
            for (std::size_t t = 0; t < q.size; ++t)
                if (s != t)
                    CHECK(std::abs(mu.weights[s] * q.at(s, t) - mu.weights[t] * q.at(t, s)) <=
                          1e-12);
    }
}

TEST_CASE("unique toppling site between distinct recurrent states") {
    for (long n = 0; n <= 3; ++n) {
        const BijectionReport rep = check_unique_toppling_bijection(n);
        CHECK(rep.ok);
        CHECK(rep.counterexamples.empty());
        const std::size_t r = recurrent_set(n).size();
        CHECK(rep.pairs_checked == r * (r - 1));
        CHECK(rep.max_pushforward_deviation <= 1e-10);
    }
}

TEST_CASE("transient distribution: point mass at time zero") {
    const Distribution d = transient_distribution(1, 3, 0.0);
    CHECK(d.weights[3] == 1.0);
    double sum = 0.0;
    for (double w : d.weights) sum += w;
    CHECK(sum == doctest::Approx(1.0));
}

TEST_CASE("transient distribution converges to the stationary one") {
    for (long n = 0; n <= 2; ++n) {
        const Distribution pi = stationary_distribution(n);
        const Distribution d = transient_distribution(n, 0, 50.0);
        for (std::size_t s = 0; s < d.weights.size(); ++s)
            CHECK(std::abs(d.weights[s] - pi.weights[s]) < 1e-8);
    }
}

TEST_CASE("transient rows stay stochastic to the tail bound") {
    const RateMatrix q = build_generator(2);
    for (double t : {0.1, 0.5, 3.0, 50.0}) {
        const Distribution d = transient_of(q, 17, t);
        double sum = 0.0;
        for (double w : d.weights) {
            CHECK(w >= 0.0);
            sum += w;
        }
        CHECK(std::abs(sum - 1.0) < 1e-10);
    }
}

TEST_CASE("central excess lands in the recurrent set") {
    SUBCASE("all mass at the origin") {
        GrainField f;
        f.lo = -4;
        f.counts.assign(9, 1);
        f.counts[4] = 48;  // 12 n at n = 4
        CHECK(is_recurrent_config(4, stabilize(4, f)));
    }
    SUBCASE("spread mass over the central half") {
        GrainField f;
        f.lo = -4;
        f.counts.assign(9, 1);
        for (Site i = -2; i <= 2; ++i) f.counts[static_cast<std::size_t>(i + 4)] = 24;
        CHECK(is_recurrent_config(4, stabilize(4, f)));
    }
    SUBCASE("no grains stays non-recurrent") {
        GrainField f;
        f.lo = -4;
        f.counts.assign(9, 1);
        CHECK_FALSE(is_recurrent_config(4, stabilize(4, f)));
    }
    SUBCASE("randomized hypothesis sampling") {
        const ExcessReport rep = check_lemma_excess(4, 50, 11);
        CHECK(rep.ok);
        CHECK(rep.violations.empty());
    }
}

TEST_CASE("csv exports carry headers and full precision") {
    const Distribution pi = stationary_distribution(0);
    const std::string csv = distribution_csv(0, pi);
    CHECK(csv.find("state_index,heights,weight") == 0);
    CHECK(csv.find("0,1,0.5") != std::string::npos);
    const std::string gen = generator_csv(build_generator(0));
    CHECK(gen.find("row,col,rate") == 0);
    CHECK(gen.find("0,1,1") != std::string::npos);
}
