#include "sandlab/toppling.hpp"

#include <algorithm>
#include <sstream>

#include "sandlab/rng.hpp"

namespace sandlab {

const char* topple_case_name(ToppleCase c) {
    switch (c) {
        case ToppleCase::Birth: return "birth";
        case ToppleCase::Interior: return "interior";
        case ToppleCase::LeftEscape: return "left-escape";
        case ToppleCase::RightEscape: return "right-escape";
        default: return "all-twos";
    }
}

namespace detail {

ExtNat scan_k_plus(const Lattice& lat, Site i) {
    Site s = i;
    for (;;) {
        if (s > lat.hi()) {
            if (lat.tail == Tail::AllOnes) return ExtNat::finite(s - i);
            if (lat.tail == Tail::AllTwos) return ExtNat::infinity();
            throw InsufficientWindow("k_plus scan left the window (unspecified tail)");
        }
        if (s < lat.lo) {
            if (lat.tail == Tail::AllOnes) return ExtNat::finite(s - i);
            if (lat.tail == Tail::AllTwos) {  // tail twos up to the window edge
                s = lat.lo;
                continue;
            }
            throw InsufficientWindow("k_plus scan left the window (unspecified tail)");
        }
        if (lat.at(s) == 1) return ExtNat::finite(s - i);
        ++s;
    }
}

ExtNat scan_k_minus(const Lattice& lat, Site i) {
    Site s = i - 1;
    for (;;) {
        if (s < lat.lo) {
            if (lat.tail == Tail::AllOnes) return ExtNat::finite(i - s);
            if (lat.tail == Tail::AllTwos) return ExtNat::infinity();
            throw InsufficientWindow("k_minus scan left the window (unspecified tail)");
        }
        if (s > lat.hi()) {
            if (lat.tail == Tail::AllOnes) return ExtNat::finite(i - s);
            if (lat.tail == Tail::AllTwos) {
                s = lat.hi();
                continue;
            }
            throw InsufficientWindow("k_minus scan left the window (unspecified tail)");
        }
        if (lat.at(s) == 1) return ExtNat::finite(i - s);
        --s;
    }
}

ToppleResult topple_add_inplace(Lattice& lat, Site i) {
    const ExtNat kp = scan_k_plus(lat, i);
    if (!kp.is_infinite() && kp.value() == 0) {
        lat.ensure(i);
        lat.set(i, 2);
        return {ToppleCase::Birth, kp, scan_k_minus(lat, i), std::nullopt};
    }
    const ExtNat km = scan_k_minus(lat, i);

    if (!kp.is_infinite() && !km.is_infinite()) {
        const Site right = i + kp.value();
        const Site left = i - km.value();
        const Site hole = i + kp.value() - km.value();
        lat.ensure(right);
        lat.ensure(left);
        lat.set(right, 2);
        lat.set(left, 2);
        lat.set(hole, 1);
        return {ToppleCase::Interior, kp, km, hole};
    }
    if (kp.is_infinite() && !km.is_infinite()) {
        const Site left = i - km.value();
        lat.ensure(left);
        lat.set(left, 2);
        return {ToppleCase::LeftEscape, kp, km, std::nullopt};
    }
    if (!kp.is_infinite() && km.is_infinite()) {
        const Site right = i + kp.value();
        lat.ensure(right);
        lat.set(right, 2);
        return {ToppleCase::RightEscape, kp, km, std::nullopt};
    }
    return {ToppleCase::AllTwos, kp, km, std::nullopt};  // identity
}

}  // namespace detail

ExtNat k_plus(Site i, const HeightConfig& eta) { return detail::scan_k_plus(eta.lattice(), i); }
ExtNat k_minus(Site i, const HeightConfig& eta) { return detail::scan_k_minus(eta.lattice(), i); }

TopplingOutcome topple_add(Site i, const HeightConfig& eta) {
    detail::Lattice work = eta.lattice();
    const detail::ToppleResult r = detail::topple_add_inplace(work, i);
    return {HeightConfig(std::move(work)), r.case_id, r.k_plus, r.k_minus, r.hole};
}

std::optional<Site> phi(Site i, const HeightConfig& eta, const HeightConfig& xi) {
    if (!leq_everywhere(xi, eta)) throw NotOrdered("phi requires xi <= eta pointwise");
    if (eta.at(i) != 2) throw InvalidSite("phi requires a critical site in the upper configuration");

    const ExtNat kp = k_plus(i, eta);
    const ExtNat km = k_minus(i, eta);
    if (kp.is_infinite() || km.is_infinite())
        throw InsufficientWindow("phi needs a finite avalanche in the upper configuration");
    const Site hole = i + kp.value() - km.value();

    if (xi.at(hole) == 1) return std::nullopt;
    const ExtNat kp2 = k_plus(hole, xi);
    const ExtNat km2 = k_minus(hole, xi);
    return hole + kp2.value() - km2.value();
}

namespace {

// Restriction to [-n, n] with fixed ones outside.
detail::Lattice clamp_to_volume(long n, const HeightConfig& eta) {
    detail::Lattice lat;
    lat.lo = -n;
    lat.tail = Tail::AllOnes;
    lat.h.resize(static_cast<std::size_t>(2 * n + 1));
    for (Site i = -n; i <= n; ++i)
        lat.h[static_cast<std::size_t>(i + n)] = static_cast<std::uint8_t>(eta.at(i));
    return lat;
}

void topple_finite_inplace(long n, Site i, detail::Lattice& lat) {
    // The avalanche from a single grain never topples the boundary ones, so
    // re-clamping just drops the (at most two) flips outside [-n, n].
    detail::topple_add_inplace(lat, i);
    if (lat.lo < -n || lat.hi() > n) {
        std::vector<std::uint8_t> inner(static_cast<std::size_t>(2 * n + 1));
        for (Site s = -n; s <= n; ++s)
            inner[static_cast<std::size_t>(s + n)] = static_cast<std::uint8_t>(lat.at(s));
        lat.h = std::move(inner);
        lat.lo = -n;
    }
}

}  // namespace

HeightConfig topple_add_finite(long n, Site i, const HeightConfig& eta) {
    if (i < -n || i > n)
        throw InvalidSite("site " + std::to_string(i) + " outside volume [-" + std::to_string(n) +
                          ", " + std::to_string(n) + "]");
    detail::Lattice lat = clamp_to_volume(n, eta);
    topple_finite_inplace(n, i, lat);
    return HeightConfig(std::move(lat));
}

std::uint64_t GrainField::at(Site i) const {
    if (i < lo || i > hi())
        throw InsufficientWindow("grain count read outside the stored window");
    return counts[static_cast<std::size_t>(i - lo)];
}

std::string GrainField::to_text() const {
    std::ostringstream os;
    os << lo << ' ' << hi();
    for (std::uint64_t c : counts) os << ' ' << c;
    return os.str();
}

GrainField GrainField::from_text(const std::string& text) {
    std::istringstream is(text);
    Site lo, hi;
    if (!(is >> lo >> hi)) throw ParseError("grain text: expected 'lo hi c...'");
    if (hi < lo) throw ParseError("grain text: hi < lo");
    GrainField f;
    f.lo = lo;
    for (Site i = lo; i <= hi; ++i) {
        long long c;
        if (!(is >> c) || c < 0) throw ParseError("grain text: bad count at site " + std::to_string(i));
        f.counts.push_back(static_cast<std::uint64_t>(c));
    }
    return f;
}

namespace {

std::vector<std::uint64_t> initial_grain_heights(long n, const GrainField& field) {
    if (field.lo > -n || field.hi() < n)
        throw InsufficientWindow("grain field does not cover the volume [-n, n]");
    std::vector<std::uint64_t> g(static_cast<std::size_t>(2 * n + 1));
    for (Site i = -n; i <= n; ++i) {
        const std::uint64_t c = field.at(i);
        if (c == 0)
            throw InvalidGrainField("count 0 at site " + std::to_string(i) +
                                    "; the stabilizer adds count-1 grains on top of ones");
        g[static_cast<std::size_t>(i + n)] = c;
    }
    return g;
}

HeightConfig heights_to_config(long n, const std::vector<std::uint64_t>& g) {
    std::vector<std::uint8_t> h(g.size());
    for (std::size_t k = 0; k < g.size(); ++k) h[k] = static_cast<std::uint8_t>(g[k]);
    return HeightConfig(-n, std::move(h), Tail::AllOnes);
}

}  // namespace

HeightConfig stabilize(long n, const GrainField& field) {
    std::vector<std::uint64_t> g = initial_grain_heights(n, field);
    const std::size_t m = g.size();

    // Batched relaxation: a site at height h sheds floor((h-1)/2) pairs at
    // once. Order is irrelevant by the abelian property; grains pushed past
    // the boundary vanish.
    std::vector<std::size_t> queue;
    std::vector<std::uint8_t> queued(m, 0);
    for (std::size_t k = 0; k < m; ++k)
        if (g[k] > 2) {
            queue.push_back(k);
            queued[k] = 1;
        }
    while (!queue.empty()) {
        const std::size_t k = queue.back();
        queue.pop_back();
        queued[k] = 0;
        if (g[k] <= 2) continue;
        const std::uint64_t pairs = (g[k] - 1) / 2;
        g[k] -= 2 * pairs;
        if (k > 0) {
            g[k - 1] += pairs;
            if (g[k - 1] > 2 && !queued[k - 1]) {
                queue.push_back(k - 1);
                queued[k - 1] = 1;
            }
        }
        if (k + 1 < m) {
            g[k + 1] += pairs;
            if (g[k + 1] > 2 && !queued[k + 1]) {
                queue.push_back(k + 1);
                queued[k + 1] = 1;
            }
        }
    }
    return heights_to_config(n, g);
}

HeightConfig stabilize_bruteforce(long n, const GrainField& field, std::uint64_t seed) {
    std::vector<std::uint64_t> g = initial_grain_heights(n, field);
    const std::size_t m = g.size();
    Rng rng(seed);

    std::vector<std::size_t> unstable;
    for (std::size_t k = 0; k < m; ++k)
        if (g[k] > 2) unstable.push_back(k);

    while (!unstable.empty()) {
        const std::size_t pick = rng.below(unstable.size());
        const std::size_t k = unstable[pick];
        // One single toppling: two grains leave, one to each neighbour.
        g[k] -= 2;
        if (k > 0 && ++g[k - 1] == 3) unstable.push_back(k - 1);
        if (k + 1 < m && ++g[k + 1] == 3) unstable.push_back(k + 1);
        if (g[k] <= 2) {
            unstable[pick] = unstable.back();
            unstable.pop_back();
        }
    }
    return heights_to_config(n, g);
}

}  // namespace sandlab
