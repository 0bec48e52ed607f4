#pragma once

#include <cstdint>
#include <functional>
#include <utility>
#include <string>
#include <vector>

#include "sandlab/lattice.hpp"
#include "sandlab/toppling.hpp"

namespace sandlab {

// Enumeration of {1,2}^[-n,n] with lexicographic indexing: index 0 is the
// all-ones state, the last index all-twos, h(-n) most significant.
class StateSpace {
public:
    explicit StateSpace(long n, long n_cap = 6);

    long n() const { return n_; }
    std::size_t size() const { return std::size_t{1} << (2 * n_ + 1); }

    HeightConfig config(std::size_t index) const;
    std::size_t index_of(const HeightConfig& cfg) const;

    // Number of ones in [-n, n] for a state given by index.
    int ones_count(std::size_t index) const;

private:
    long n_;
};

// Dense generator of the finite-volume process: unit-rate additions at every
// site of [-n, n]. Rows sum to zero; off-diagonal entries count the sites
// whose toppling maps one state to the other.
struct RateMatrix {
    std::size_t size = 0;
    std::vector<double> q;  // row-major

    double at(std::size_t s, std::size_t t) const { return q[s * size + t]; }
};

struct Distribution {
    std::vector<double> weights;

    double total_variation(const Distribution& other) const;
};

std::vector<std::size_t> recurrent_set(long n);

RateMatrix build_generator(long n, long n_cap = 6);

// Stationary distribution of the generator: the normalized null vector of
// the transposed matrix, found by dense least squares.
Distribution stationary_distribution(long n, long n_cap = 6);
Distribution stationary_of(const RateMatrix& q);

// Both sides of the self-adjointness identity of the generator in the
// stationary measure: <Lf, g>_mu and <f, Lg>_mu.
std::pair<double, double> check_reversibility(long n, const std::vector<double>& f,
                                              const std::vector<double>& g);

struct BijectionReport {
    bool ok = true;
    long n = 0;
    std::size_t pairs_checked = 0;
    // Ordered recurrent pairs with no unique toppling site, if any.
    std::vector<std::pair<std::size_t, std::size_t>> counterexamples;
    double max_pushforward_deviation = 0.0;  // max |mu T_{n,i} - mu| entry
};

// For every ordered pair of distinct recurrent states, verify that exactly
// one site of [-n, n] topples the first onto the second, and that every
// T_{n,i} leaves the stationary measure invariant.
BijectionReport check_unique_toppling_bijection(long n);

// Row of exp(t q) from state s0 by uniformization, Poisson tail below tol.
Distribution transient_distribution(long n, std::size_t s0, double t, double tol = 1e-10,
                                    long n_cap = 6);
Distribution transient_of(const RateMatrix& q, std::size_t s0, double t, double tol = 1e-10);

struct ExcessReport {
    bool ok = true;
    long n = 0;
    int trials = 0;
    std::vector<GrainField> violations;
};

// Random grain fields with entries >= 1 and central mass at least 12 n all
// stabilize into the recurrent set.
ExcessReport check_lemma_excess(long n, int trials, std::uint64_t seed);

bool is_recurrent_config(long n, const HeightConfig& cfg);

// CSV exports: distribution rows `state_index,heights,weight`, generator as
// sparse triplets `row,col,rate`.
std::string distribution_csv(long n, const Distribution& d);
std::string generator_csv(const RateMatrix& q);

}  // namespace sandlab
