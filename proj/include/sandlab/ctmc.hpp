#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sandlab/lattice.hpp"
#include "sandlab/rng.hpp"
#include "sandlab/toppling.hpp"

namespace sandlab {

enum class EventKind : std::uint8_t { Avalanche, Birth, CoupledPair };

const char* event_kind_name(EventKind k);

struct SiteChange {
    Site site;
    int new_height;
    bool operator==(const SiteChange&) const = default;
};

struct TrajectoryEvent {
    double t = 0.0;
    Site site = 0;  // the clock that fired
    EventKind kind = EventKind::Avalanche;
    std::vector<SiteChange> upper_changes;
    std::vector<SiteChange> lower_changes;  // empty for single chains
};

// Time-stamped jump record. Replaying the deltas from the initial state
// reproduces the sampled path exactly.
struct Trajectory {
    HeightConfig initial{0, {1}, Tail::AllOnes};
    std::optional<HeightConfig> initial_lower;
    double horizon = 0.0;
    std::vector<TrajectoryEvent> events;

    std::string to_jsonl() const;  // one event per line: {t, site, kind, delta}
};

HeightConfig replay_upper(const Trajectory& traj);
HeightConfig replay_lower(const Trajectory& traj);

struct EstimatorResult {
    double mean = 0.0;
    double stderr_ = 0.0;  // sample standard deviation / sqrt(samples)
    long samples = 0;
    std::uint64_t seed = 0;
    std::map<std::string, std::string> params;
};

// Sorted-set state of the pure avalanche chain with one exponential clock
// per critical site.
class AvalancheSetState {
public:
    explicit AvalancheSetState(const CriticalSet& a0);

    const std::vector<Site>& sites() const { return sites_; }
    std::size_t size() const { return sites_.size(); }

    struct Jump {
        Site fired, left, right, hole;
    };
    // Fire the clock of sites()[index].
    Jump fire(std::size_t index);

    // Interval minus at most one interior point.
    bool is_interval_minus_point() const;
    bool contains(Site i) const;

private:
    std::vector<Site> sites_;
};

inline constexpr double kNoHorizon = std::numeric_limits<double>::infinity();

// Pure avalanche dynamics from a finite critical set: every critical site
// carries a unit-rate clock and firing performs the three-site jump.
Trajectory simulate_avalanche_chain(const CriticalSet& a0, double horizon, std::uint64_t seed,
                                    long max_events = -1);

// Avalanches everywhere plus unit-rate births on the window [-n, n].
Trajectory simulate_Ln(long n, const HeightConfig& eta0, double horizon, std::uint64_t seed);

// Finite-volume process realized by adding Poisson grains in [-n, n] and
// restabilizing after each grain.
Trajectory simulate_fvsp_poisson(long n, const HeightConfig& eta0, double horizon,
                                 std::uint64_t seed);

enum class CouplingKind : std::uint8_t {
    AvalancheOnly,    // shared avalanche clocks, lower follows through phi
    SameWindow,       // avalanche clocks plus shared birth clocks on [-n, n]
    WindowPlusOne,    // upper births on [-n-1, n+1], lower on [-n, n]
};

struct CoupledOutcome {
    Trajectory trajectory;
    long order_violations = 0;  // exact pointwise checks after every event
};

CoupledOutcome simulate_coupled_avalanche(const HeightConfig& upper0, const HeightConfig& lower0,
                                          double horizon, std::uint64_t seed);
CoupledOutcome simulate_coupled_n(long n, const HeightConfig& upper0, const HeightConfig& lower0,
                                  double horizon, std::uint64_t seed);
CoupledOutcome simulate_coupled_n1_n(long n, const HeightConfig& upper0,
                                     const HeightConfig& lower0, double horizon,
                                     std::uint64_t seed);

// Monte Carlo mean of f over the window-n dynamics at time t, started from
// eta truncated to [-m, m] with ones outside.
EstimatorResult estimate_semigroup(const std::function<double(const HeightConfig&)>& f,
                                   const HeightConfig& eta, double t, long n, long m,
                                   long samples, std::uint64_t seed);

HeightConfig truncate_to_ones(const HeightConfig& eta, long m);

// P(theta_n(N_t + ones)(0) = 1): the finite-volume occupation probability
// under Poisson grain counts at time t.
EstimatorResult estimate_absorption(long n, double t, long samples, std::uint64_t seed);

// P(0 not in A_t) for the avalanche chain from the full interval [-n, n].
EstimatorResult estimate_hole_at_time(long n, double t, long samples, std::uint64_t seed);

// E|A_t| for the avalanche chain from a0.
EstimatorResult estimate_growth(const CriticalSet& a0, double t, long samples,
                                std::uint64_t seed);

struct HoleLawResult {
    std::vector<double> p_hat;    // index k-1: empirical P(0 not in A at jump k)
    std::vector<double> stderr_;
    long samples = 0;
    long structural_violations = 0;  // states that were not interval-minus-point
};

// Empirical hole law at the first k_max jumps from a0 (an interval).
HoleLawResult estimate_hole_law(const CriticalSet& a0, int k_max, long samples,
                                std::uint64_t seed);

// One uniform-site grain addition per step with absorbing stabilization.
HeightConfig discrete_time_fvsp(long n, long steps, const HeightConfig& eta0,
                                std::uint64_t seed);

}  // namespace sandlab
