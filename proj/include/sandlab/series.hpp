#pragma once

#include <functional>
#include <string>
#include <vector>

#include "sandlab/lattice.hpp"

namespace sandlab {

// An observable that depends only on the heights inside the intervals
// I_{-N}..I_N of its argument, with a declared uniform bound. Observables
// whose dependence set is unbounded in interval distance (for instance an
// exponentially weighted sum over all sites) are not representable here.
struct LocalFunction {
    std::string name;
    long locality = 0;    // N: interval radius of the dependence set
    double sup_norm = 1;  // uniform bound on |eval|
    std::function<double(const HeightConfig&)> eval;
};

// eta(0) - 1; locality 0.
LocalFunction occupancy_at_origin();
// indicator of both sites 0 and 1 critical; locality 1.
LocalFunction pair_indicator();
// |I_k| clamped at `cap` so that a uniform bound exists; locality |k|.
// Agrees with the raw interval size whenever that size is at most cap.
LocalFunction interval_length(long k, double cap = 64.0);

// Parse a builtin name: occ0 | pair01 | interval-len:<k>.
LocalFunction builtin_observable(const std::string& name);

struct ApplyResult {
    double value = 0.0;
    Site range_first = 0;  // sites actually summed over
    Site range_last = 0;
    long terms = 0;
};

// One application of the formal generator at a point: the sum of
// f(T_i eta) - f(eta) over the interval neighbourhood where it can differ
// from zero.
ApplyResult apply_L(const LocalFunction& f, const HeightConfig& eta);

struct SeriesOptions {
    int depth_cap = 8;       // maximum iterated-generator order evaluated exactly
    bool memoize = true;     // pattern-keyed caching of intermediate values
    long radius_n_max = 50;  // interval range for the radius surrogate
};

// L^n f(eta) by the interval-local recursion. DepthLimit beyond the cap.
double iterate_Ln(const LocalFunction& f, const HeightConfig& eta, int n,
                  const SeriesOptions& opts = {});

// All of L^0 f(eta) .. L^K f(eta) sharing one cache.
std::vector<double> iterate_all(const LocalFunction& f, const HeightConfig& eta, int k_max,
                                const SeriesOptions& opts = {});

// The a priori growth bound on |L^n f(eta)|:
// (|I_{-N-n}| + ... + |I_{N+n}|)^n 2^n sup_norm, with the n = 0 value
// defined as sup_norm.
double bound_Ln(const LocalFunction& f, const HeightConfig& eta, int n);

// 1 / (4 e a_estimate): times below this admit the convergent series.
double radius(const HeightConfig& eta, long n_max);

struct SeriesResult {
    double value = 0.0;      // truncated series sum
    int truncation_K = 0;    // last order included
    double tail_bound = 0.0; // rigorous bound on everything dropped
    double radius = 0.0;
    double t = 0.0;
    bool depth_limited = false;  // tolerance unreachable within the depth cap
};

// Evaluate sum_k t^k L^k f(eta) / k! to K terms, where K is the smallest
// order whose growth-bound remainder is below tol. If that order exceeds the
// depth cap, the sum stops at the cap and the (larger, still valid) remainder
// is reported with depth_limited set; the value plus tail_bound always
// encloses the full series.
SeriesResult taylor_semigroup(const LocalFunction& f, const HeightConfig& eta, double t,
                              double tol, const SeriesOptions& opts = {});

// Remainder sum_{k>K} t^k bound_k / k! for the given configuration; used by
// taylor_semigroup and exposed for diagnostics. Infinite if the geometric
// closure fails (t too close to the radius).
double series_tail_bound(const LocalFunction& f, const HeightConfig& eta, double t, int K);

}  // namespace sandlab
