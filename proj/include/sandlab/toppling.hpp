#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sandlab/lattice.hpp"

namespace sandlab {

// Natural number extended with infinity. No arithmetic is defined on the
// infinite value; callers branch on is_infinite() first.
class ExtNat {
public:
    static ExtNat finite(Site v) { return ExtNat(v, false); }
    static ExtNat infinity() { return ExtNat(0, true); }

    bool is_infinite() const { return inf_; }
    Site value() const {
        if (inf_) throw Error("value() on infinite extended natural");
        return v_;
    }

    bool operator==(const ExtNat& o) const {
        return inf_ == o.inf_ && (inf_ || v_ == o.v_);
    }

private:
    ExtNat(Site v, bool inf) : v_(v), inf_(inf) {}
    Site v_;
    bool inf_;
};

enum class ToppleCase : std::uint8_t {
    Birth,        // height 1 at the site: a grain just sticks
    Interior,     // both flanking ones exist: three-site avalanche update
    LeftEscape,   // no one to the right: the grain surfaces at i - k_minus
    RightEscape,  // no one to the left: the grain surfaces at i + k_plus
    AllTwos,      // no one anywhere: the map is the identity
};

const char* topple_case_name(ToppleCase c);

struct TopplingOutcome {
    HeightConfig config;
    ToppleCase case_id;
    ExtNat k_plus;
    ExtNat k_minus;
    std::optional<Site> hole;  // the site where a one appears (Interior only)
};

// Distance from i to the nearest one at or right of i (k_plus), resp.
// strictly left of i (k_minus). Infinite only with an all-twos tail.
ExtNat k_plus(Site i, const HeightConfig& eta);
ExtNat k_minus(Site i, const HeightConfig& eta);

// Add one grain at site i and stabilize: the closed-form five-case map.
TopplingOutcome topple_add(Site i, const HeightConfig& eta);

// The coupling site map: the site whose toppling in xi creates a one at the
// same place the avalanche in eta did. nullopt encodes "no transition in xi".
// Requires xi <= eta pointwise and eta(i) = 2.
std::optional<Site> phi(Site i, const HeightConfig& eta, const HeightConfig& xi);

// Finite-volume toppling on [-n, n]: clamp to the volume with ones outside,
// apply the infinite-lattice map, clamp again. Grains crossing the boundary
// are lost.
HeightConfig topple_add_finite(long n, Site i, const HeightConfig& eta);

// Unbounded grain counts on a finite window.
struct GrainField {
    Site lo = 0;
    std::vector<std::uint64_t> counts;

    Site hi() const { return lo + static_cast<Site>(counts.size()) - 1; }
    std::uint64_t at(Site i) const;

    std::string to_text() const;
    static GrainField from_text(const std::string& text);
};

// Stabilization of a grain field in [-n, n] with absorbing boundary:
// start from all ones, add count-1 grains at each site, topple to rest.
// Requires every count in [-n, n] to be >= 1.
HeightConfig stabilize(long n, const GrainField& field);

// Same contract, implemented as literal single-grain dynamics with a seeded
// random choice of which unstable site topples next.
HeightConfig stabilize_bruteforce(long n, const GrainField& field, std::uint64_t seed);

namespace detail {

struct ToppleResult {
    ToppleCase case_id;
    ExtNat k_plus = ExtNat::infinity();
    ExtNat k_minus = ExtNat::infinity();
    std::optional<Site> hole;
};

// In-place kernel for the hot paths; extends the window as needed when the
// tail is known. All public toppling entry points funnel through this.
ToppleResult topple_add_inplace(Lattice& lat, Site i);

ExtNat scan_k_plus(const Lattice& lat, Site i);
ExtNat scan_k_minus(const Lattice& lat, Site i);

}  // namespace detail

}  // namespace sandlab
