#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "sandlab/errors.hpp"

namespace sandlab {

using Site = long long;

// Value of sites outside the stored window.
enum class Tail : std::uint8_t { AllOnes, AllTwos, Unspecified };

const char* tail_name(Tail t);
Tail tail_from_name(const std::string& s);

namespace detail {

// Mutable working form of a configuration. Heights are {1,2}; reads outside
// [lo, lo+h.size()) resolve through the tail. Simulation hot loops and the
// toppling kernels operate on this; the public HeightConfig wraps it.
struct Lattice {
    std::vector<std::uint8_t> h;
    Site lo = 0;
    Tail tail = Tail::AllOnes;

    Site hi() const { return lo + static_cast<Site>(h.size()) - 1; }
    bool inside(Site i) const { return i >= lo && i <= hi(); }

    int at(Site i) const {
        if (inside(i)) return h[static_cast<std::size_t>(i - lo)];
        switch (tail) {
            case Tail::AllOnes: return 1;
            case Tail::AllTwos: return 2;
            default:
                throw InsufficientWindow("read at site " + std::to_string(i) +
                                         " outside window with unspecified tail");
        }
    }

    void set(Site i, int v) { h[static_cast<std::size_t>(i - lo)] = static_cast<std::uint8_t>(v); }

    // Grow the window to include i, filling new sites from the tail.
    // Only meaningful for known tails.
    void ensure(Site i) {
        if (inside(i)) return;
        if (tail == Tail::Unspecified)
            throw InsufficientWindow("cannot extend a window with unspecified tail");
        const std::uint8_t fill = tail == Tail::AllOnes ? 1 : 2;
        if (i < lo) {
            h.insert(h.begin(), static_cast<std::size_t>(lo - i), fill);
            lo = i;
        } else {
            h.insert(h.end(), static_cast<std::size_t>(i - hi()), fill);
        }
    }
};

// Positions X_{j_lo-1}..X_{j_hi} of the ones around the origin, with the
// anchor X_0 = first one at a nonnegative site. Tail-resolved.
std::vector<Site> resolve_ones(const Lattice& lat, long j_lo, long j_hi);

}  // namespace detail

// A configuration of heights in {1,2} on an integer window plus a tail
// convention for everything outside. Immutable after construction.
class HeightConfig {
public:
    HeightConfig(Site lo, std::vector<std::uint8_t> heights, Tail tail);
    explicit HeightConfig(detail::Lattice lat);

    Site lo() const { return lat_.lo; }
    Site hi() const { return lat_.hi(); }
    Tail tail() const { return lat_.tail; }
    Site width() const { return hi() - lo() + 1; }

    // Tail-resolving read; InsufficientWindow outside an unspecified tail.
    int at(Site i) const { return lat_.at(i); }

    const detail::Lattice& lattice() const { return lat_; }

    bool operator==(const HeightConfig& other) const;

    std::string to_text() const;
    static HeightConfig from_text(const std::string& text);

private:
    detail::Lattice lat_;
};

// Pointwise ordering over the whole lattice (tails included).
// Throws InsufficientWindow if a needed read is unresolvable.
bool leq_everywhere(const HeightConfig& lower, const HeightConfig& upper);

// Finite sorted duplicate-free set of critical sites; the avalanche-chain state.
class CriticalSet {
public:
    CriticalSet() = default;
    explicit CriticalSet(std::vector<Site> sites);

    const std::vector<Site>& sites() const { return sites_; }
    std::size_t size() const { return sites_.size(); }
    bool empty() const { return sites_.empty(); }
    bool contains(Site i) const;

    bool operator==(const CriticalSet& other) const { return sites_ == other.sites_; }

private:
    std::vector<Site> sites_;
};

HeightConfig from_critical_set(const CriticalSet& a);
CriticalSet critical_set_of(const HeightConfig& eta);

// The view of a configuration as a bi-infinite sequence of intervals between
// consecutive ones. X_0 is the position of the first one at or right of the
// origin; I_j = (X_{j-1}, X_j]. Resolved for a contiguous index range.
class IntervalDecomposition {
public:
    // xs holds X_{j_lo-1} .. X_{j_hi}.
    IntervalDecomposition(long j_lo, long j_hi, std::vector<Site> xs);

    long j_lo() const { return j_lo_; }
    long j_hi() const { return j_hi_; }

    Site one_position(long j) const;                     // X_j, j in [j_lo-1, j_hi]
    Site interval_first(long j) const { return one_position(j - 1) + 1; }
    Site interval_last(long j) const { return one_position(j); }
    Site interval_size(long j) const { return interval_last(j) - interval_first(j) + 1; }

    // Sum of |I_j| over j in [a, b]; telescopes to X_b - X_{a-1}.
    Site size_sum(long a, long b) const { return one_position(b) - one_position(a - 1); }

private:
    long j_lo_, j_hi_;
    std::vector<Site> xs_;
};

IntervalDecomposition interval_decomposition(const HeightConfig& eta, long j_lo, long j_hi);

// Finite-window surrogate for the interval-density diagnostics: running
// averages of interval sizes, their stabilized maximum, the independent
// density of ones, and the implied series radius.
struct DecencyReport {
    std::vector<double> partial_a;  // entry n-1 holds (|I_-n|+...+|I_n|)/(2n)
    double a_estimate = 0.0;
    double rho_estimate = 0.0;  // empirical density of ones on the resolved span
    double radius = 0.0;        // 1 / (4 e a_estimate)
};

DecencyReport decency_report(const HeightConfig& eta, long n_max);

std::ostream& operator<<(std::ostream& os, const HeightConfig& cfg);

}  // namespace sandlab
