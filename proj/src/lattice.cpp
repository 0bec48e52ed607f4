#include "sandlab/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

namespace sandlab {

const char* tail_name(Tail t) {
    switch (t) {
        case Tail::AllOnes: return "ones";
        case Tail::AllTwos: return "twos";
        default: return "unspec";
    }
}

Tail tail_from_name(const std::string& s) {
    if (s == "ones") return Tail::AllOnes;
    if (s == "twos") return Tail::AllTwos;
    if (s == "unspec") return Tail::Unspecified;
    throw ParseError("unknown tail '" + s + "' (expected ones|twos|unspec)");
}

namespace {

void validate_heights(const std::vector<std::uint8_t>& h) {
    for (std::uint8_t v : h)
        if (v != 1 && v != 2) throw ParseError("height " + std::to_string(v) + " outside {1,2}");
}

// First one at or right of `start` (dir=+1), resp. at or left of (dir=-1).
// Tail ones terminate the scan; an all-twos tail ahead of the scan means no
// one exists, while all-twos tail behind just gets skipped over.
Site scan_for_one(const detail::Lattice& lat, Site start, int dir) {
    Site i = start;
    for (;;) {
        if (!lat.inside(i)) {
            if (lat.tail == Tail::AllOnes) return i;
            if (lat.tail == Tail::Unspecified)
                throw InsufficientWindow("scan for a one left the window (unspecified tail)");
            const bool ahead = dir > 0 ? i > lat.hi() : i < lat.lo;
            if (ahead) throw InsufficientWindow("no one exists in scan direction (all-twos tail)");
            i = dir > 0 ? lat.lo : lat.hi();
            continue;
        }
        if (lat.at(i) == 1) return i;
        i += dir;
    }
}

std::vector<Site> resolve_ones_impl(const detail::Lattice& lat, long j_lo, long j_hi) {
    if (j_hi < j_lo) throw ParseError("interval range empty");
    const Site x0 = scan_for_one(lat, 0, +1);

    std::vector<Site> xs(static_cast<std::size_t>(j_hi - j_lo + 2));
    auto put = [&](long j, Site v) {
        if (j >= j_lo - 1 && j <= j_hi) xs[static_cast<std::size_t>(j - (j_lo - 1))] = v;
    };

    put(0, x0);
    Site cur = x0;
    for (long j = 1; j <= j_hi; ++j) {
        cur = scan_for_one(lat, cur + 1, +1);
        put(j, cur);
    }
    cur = x0;
    for (long j = -1; j >= j_lo - 1; --j) {
        cur = scan_for_one(lat, cur - 1, -1);
        put(j, cur);
    }
    return xs;
}

}  // namespace

namespace detail {

std::vector<Site> resolve_ones(const Lattice& lat, long j_lo, long j_hi) {
    return resolve_ones_impl(lat, j_lo, j_hi);
}

}  // namespace detail

HeightConfig::HeightConfig(Site lo, std::vector<std::uint8_t> heights, Tail tail) {
    if (heights.empty()) throw ParseError("empty height window");
    validate_heights(heights);
    lat_.lo = lo;
    lat_.h = std::move(heights);
    lat_.tail = tail;
}

HeightConfig::HeightConfig(detail::Lattice lat) : lat_(std::move(lat)) {
    if (lat_.h.empty()) throw ParseError("empty height window");
    validate_heights(lat_.h);
}

bool HeightConfig::operator==(const HeightConfig& other) const {
    if (tail() != other.tail()) return false;
    if (tail() == Tail::Unspecified && (lo() != other.lo() || hi() != other.hi()))
        return false;  // incomparable windows
    const Site a = std::min(lo(), other.lo());
    const Site b = std::max(hi(), other.hi());
    for (Site i = a; i <= b; ++i)
        if (at(i) != other.at(i)) return false;
    return true;
}

std::string HeightConfig::to_text() const {
    std::ostringstream os;
    os << lo() << ' ' << hi() << ' ' << tail_name(tail());
    for (Site i = lo(); i <= hi(); ++i) os << ' ' << at(i);
    return os.str();
}

HeightConfig HeightConfig::from_text(const std::string& text) {
    std::istringstream is(text);
    Site lo, hi;
    std::string tail;
    if (!(is >> lo >> hi >> tail)) throw ParseError("config text: expected 'lo hi tail h...'");
    if (hi < lo) throw ParseError("config text: hi < lo");
    std::vector<std::uint8_t> h;
    h.reserve(static_cast<std::size_t>(hi - lo + 1));
    for (Site i = lo; i <= hi; ++i) {
        int v;
        if (!(is >> v)) throw ParseError("config text: missing height for site " + std::to_string(i));
        h.push_back(static_cast<std::uint8_t>(v));
    }
    int extra;
    if (is >> extra) throw ParseError("config text: trailing values beyond hi");
    return HeightConfig(lo, std::move(h), tail_from_name(tail));
}

bool leq_everywhere(const HeightConfig& lower, const HeightConfig& upper) {
    // Outside both windows the comparison is decided by the tails alone.
    if (lower.tail() == Tail::AllTwos && upper.tail() != Tail::AllTwos) return false;
    if (lower.tail() == Tail::Unspecified || upper.tail() == Tail::Unspecified) {
        if (lower.tail() != upper.tail() || lower.lo() != upper.lo() || lower.hi() != upper.hi())
            throw InsufficientWindow("ordering undecidable with unspecified tails on unequal windows");
    }
    const Site a = std::min(lower.lo(), upper.lo());
    const Site b = std::max(lower.hi(), upper.hi());
    for (Site i = a; i <= b; ++i)
        if (lower.at(i) > upper.at(i)) return false;
    return true;
}

CriticalSet::CriticalSet(std::vector<Site> sites) : sites_(std::move(sites)) {
    std::sort(sites_.begin(), sites_.end());
    sites_.erase(std::unique(sites_.begin(), sites_.end()), sites_.end());
}

bool CriticalSet::contains(Site i) const {
    return std::binary_search(sites_.begin(), sites_.end(), i);
}

HeightConfig from_critical_set(const CriticalSet& a) {
    if (a.empty()) return HeightConfig(0, {1}, Tail::AllOnes);
    const Site lo = a.sites().front() - 1;
    const Site hi = a.sites().back() + 1;
    std::vector<std::uint8_t> h(static_cast<std::size_t>(hi - lo + 1), 1);
    for (Site s : a.sites()) h[static_cast<std::size_t>(s - lo)] = 2;
    return HeightConfig(lo, std::move(h), Tail::AllOnes);
}

CriticalSet critical_set_of(const HeightConfig& eta) {
    if (eta.tail() != Tail::AllOnes)
        throw InsufficientWindow("critical set is finite only for an all-ones tail");
    std::vector<Site> sites;
    for (Site i = eta.lo(); i <= eta.hi(); ++i)
        if (eta.at(i) == 2) sites.push_back(i);
    return CriticalSet(std::move(sites));
}

IntervalDecomposition::IntervalDecomposition(long j_lo, long j_hi, std::vector<Site> xs)
    : j_lo_(j_lo), j_hi_(j_hi), xs_(std::move(xs)) {
    if (j_hi_ < j_lo_ || xs_.size() != static_cast<std::size_t>(j_hi_ - j_lo_ + 2))
        throw ParseError("interval decomposition: inconsistent index range");
    for (std::size_t k = 1; k < xs_.size(); ++k)
        if (xs_[k] <= xs_[k - 1]) throw ParseError("interval decomposition: ones not increasing");
}

Site IntervalDecomposition::one_position(long j) const {
    if (j < j_lo_ - 1 || j > j_hi_)
        throw InsufficientWindow("one position X_" + std::to_string(j) + " not resolved");
    return xs_[static_cast<std::size_t>(j - (j_lo_ - 1))];
}

IntervalDecomposition interval_decomposition(const HeightConfig& eta, long j_lo, long j_hi) {
    return IntervalDecomposition(j_lo, j_hi, resolve_ones_impl(eta.lattice(), j_lo, j_hi));
}

DecencyReport decency_report(const HeightConfig& eta, long n_max) {
    if (n_max < 1) throw ParseError("decency report needs n_max >= 1");
    const IntervalDecomposition dec = interval_decomposition(eta, -n_max, n_max);

    DecencyReport rep;
    rep.partial_a.reserve(static_cast<std::size_t>(n_max));
    for (long n = 1; n <= n_max; ++n)
        rep.partial_a.push_back(static_cast<double>(dec.size_sum(-n, n)) / (2.0 * n));

    // The limit superior is not computable from a window; take the maximum of
    // the stabilized tail half of the running averages.
    const long half = (n_max + 1) / 2;
    double a = 0.0;
    for (long n = half; n <= n_max; ++n)
        a = std::max(a, rep.partial_a[static_cast<std::size_t>(n - 1)]);
    rep.a_estimate = a;

    // Independent density estimate: fraction of ones over the resolved span.
    const Site span_first = dec.one_position(-n_max - 1) + 1;
    const Site span_last = dec.one_position(n_max);
    rep.rho_estimate = static_cast<double>(2 * n_max + 1) /
                       static_cast<double>(span_last - span_first + 1);

    rep.radius = 1.0 / (4.0 * std::exp(1.0) * rep.a_estimate);
    return rep;
}

std::ostream& operator<<(std::ostream& os, const HeightConfig& cfg) {
    return os << cfg.to_text();
}

}  // namespace sandlab
