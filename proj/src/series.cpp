#include "sandlab/series.hpp"

#include <cmath>
#include <cstring>
#include <limits>
#include <unordered_map>

#include "sandlab/toppling.hpp"

namespace sandlab {

LocalFunction occupancy_at_origin() {
    return {"occ0", 0, 1.0,
            [](const HeightConfig& c) { return static_cast<double>(c.at(0) - 1); }};
}

LocalFunction pair_indicator() {
    return {"pair01", 1, 1.0, [](const HeightConfig& c) {
                return c.at(0) == 2 && c.at(1) == 2 ? 1.0 : 0.0;
            }};
}

LocalFunction interval_length(long k, double cap) {
    return {"interval-len:" + std::to_string(k), std::labs(k), cap,
            [k, cap](const HeightConfig& c) {
                const auto dec = interval_decomposition(c, k, k);
                return std::min(static_cast<double>(dec.interval_size(k)), cap);
            }};
}

LocalFunction builtin_observable(const std::string& name) {
    if (name == "occ0") return occupancy_at_origin();
    if (name == "pair01") return pair_indicator();
    const std::string prefix = "interval-len:";
    if (name.rfind(prefix, 0) == 0) {
        const long k = std::stol(name.substr(prefix.size()));
        return interval_length(k);
    }
    throw ParseError("unknown observable '" + name + "' (occ0|pair01|interval-len:<k>)");
}

namespace {

using detail::Lattice;

// Interval-sum growth data: S(k) = |I_{-N-k}| + ... + |I_{N+k}|, exact up to
// k_res and linearly majorized beyond. The slope is exact (two unit
// intervals per order) for all-ones tails; for a bare window it assumes
// unseen intervals are no longer than the longest resolved one.
struct Growth {
    std::vector<double> exact_s;  // S(0) .. S(k_res)
    double slope = 2.0;
    bool surrogate = false;

    double S(long k) const {
        const long k_res = static_cast<long>(exact_s.size()) - 1;
        if (k <= k_res) return exact_s[static_cast<std::size_t>(k)];
        return exact_s.back() + slope * static_cast<double>(k - k_res);
    }
};

Growth growth_for(const LocalFunction& f, const Lattice& lat) {
    const long n = f.locality;
    long j_need;
    if (lat.tail == Tail::AllOnes) {
        // Resolve until both span ends are past the stored window; beyond it
        // every interval is a unit (X_j >= j and X_{-j} <= -j).
        j_need = n + std::max({lat.hi() + 1, -lat.lo, Site{1}}) + 3;
    } else {
        // Count the ones actually present: sites < 0 carry X_{-1}..X_{-left},
        // sites >= 0 carry X_0..X_{right-1}.
        long left = 0, right = 0;
        for (Site i = lat.lo; i <= lat.hi(); ++i)
            if (lat.at(i) == 1) (i < 0 ? left : right) += 1;
        if (right == 0)
            throw InsufficientWindow("no one at a nonnegative site in the window");
        const long j_left = left;           // X_{-1}..X_{-left} resolvable
        const long j_right = right - 1;     // X_1..X_{right-1} past the anchor
        const long k_res = std::min(j_left - n - 1, j_right - n);
        if (k_res < 0)
            throw InsufficientWindow("window does not resolve the locality neighbourhood");
        j_need = n + k_res;
    }

    const auto xs = detail::resolve_ones(lat, -j_need, j_need);
    auto x_of = [&](long j) { return xs[static_cast<std::size_t>(j + j_need + 1)]; };

    Growth g;
    double lmax = 0.0;
    for (std::size_t p = 1; p < xs.size(); ++p)
        lmax = std::max(lmax, static_cast<double>(xs[p] - xs[p - 1]));
    for (long k = 0; n + k <= j_need; ++k)
        g.exact_s.push_back(static_cast<double>(x_of(n + k) - x_of(-(n + k) - 1)));
    if (lat.tail == Tail::AllOnes) {
        g.slope = 2.0;
        g.surrogate = false;
    } else {
        g.slope = 2.0 * lmax;
        g.surrogate = true;
    }
    return g;
}

// Remainder of sum_k t^k (2 S(k))^k / k! past order K, closed with a
// geometric bound once the uniform ratio estimate drops below one.
double tail_from_growth(const Growth& g, double sup_norm, double t, int K) {
    if (t == 0.0) return 0.0;
    const double ln_t = std::log(t);
    auto y = [&](long k) {
        const double s = g.S(k);
        return sup_norm * std::exp(static_cast<double>(k) * (ln_t + std::log(2.0 * s)) -
                                   std::lgamma(static_cast<double>(k) + 1.0));
    };
    const double b = g.slope;
    const double efac = std::exp(b / 2.0);  // majorizes (S(k+1)/S(k))^k, as S(k) >= 2k+1
    double total = 0.0;
    for (long k = K + 1; k <= K + 200000; ++k) {
        const double yk = y(k);
        total += yk;
        // Uniform ratio bound for all orders past k.
        const double limit_ratio = 2.0 * t * b * efac;
        const double here_ratio = 2.0 * t * g.S(k + 1) * efac / static_cast<double>(k + 1);
        const double rho = std::max(here_ratio, limit_ratio);
        if (rho < 0.98) return total + yk * rho / (1.0 - rho);
    }
    return std::numeric_limits<double>::infinity();
}

// Pattern-keyed evaluation of the iterated generator. A value of order m at
// a configuration depends only on the heights over the span of its
// 2(N+m)+1 central intervals, so that span (with its absolute position) is
// the cache key. Children are trimmed to the parent span, which stays valid
// at every deeper order because each toppling removes exactly one interior
// one.
class Evaluator {
public:
    Evaluator(const LocalFunction& f, bool memoize) : f_(f), memoize_(memoize) {}

    double eval(const Lattice& cur, int m) {
        if (m == 0) return f_.eval(HeightConfig(cur));

        const long reach = f_.locality + m;
        const auto xs = detail::resolve_ones(cur, -reach, reach);
        const Site span_lo = xs.front();  // X_{-reach-1}: left edge, exclusive
        const Site span_hi = xs.back();   // X_{reach}

        std::string key;
        if (memoize_) {
            key = make_key(cur, m, span_lo, span_hi);
            const auto hit = memo_.find(key);
            if (hit != memo_.end()) return hit->second;
        }

        const double base = eval(cur, m - 1);
        double total = 0.0;
        long terms = 0;
        for (Site i = span_lo + 1; i <= span_hi; ++i) {
            Lattice child = trim(cur, span_lo, span_hi);
            detail::topple_add_inplace(child, i);
            total += eval(child, m - 1);
            ++terms;
        }
        const double value = total - static_cast<double>(terms) * base;
        if (memoize_) memo_[key] = value;
        return value;
    }

    std::size_t cache_size() const { return memo_.size(); }

private:
    static Lattice trim(const Lattice& src, Site lo, Site hi) {
        Lattice out;
        out.lo = lo;
        out.tail = Tail::Unspecified;
        out.h.resize(static_cast<std::size_t>(hi - lo + 1));
        for (Site s = lo; s <= hi; ++s)
            out.h[static_cast<std::size_t>(s - lo)] = static_cast<std::uint8_t>(src.at(s));
        return out;
    }

    static std::string make_key(const Lattice& cur, int m, Site span_lo, Site span_hi) {
        std::string key;
        key.reserve(static_cast<std::size_t>(span_hi - span_lo) + 12);
        key.push_back(static_cast<char>(m));
        for (int b = 0; b < 8; ++b)
            key.push_back(static_cast<char>((span_lo >> (8 * b)) & 0xff));
        for (Site s = span_lo + 1; s <= span_hi; ++s)
            key.push_back(static_cast<char>(cur.at(s)));
        return key;
    }

    const LocalFunction& f_;
    bool memoize_;
    std::unordered_map<std::string, double> memo_;
};

}  // namespace

ApplyResult apply_L(const LocalFunction& f, const HeightConfig& eta) {
    const long reach = f.locality + 1;
    const auto dec = interval_decomposition(eta, -reach, reach);
    ApplyResult out;
    out.range_first = dec.one_position(-reach - 1) + 1;
    out.range_last = dec.one_position(reach);
    const double base = f.eval(eta);
    for (Site i = out.range_first; i <= out.range_last; ++i) {
        out.value += f.eval(topple_add(i, eta).config) - base;
        ++out.terms;
    }
    return out;
}

double iterate_Ln(const LocalFunction& f, const HeightConfig& eta, int n,
                  const SeriesOptions& opts) {
    if (n < 0) throw Error("negative generator order");
    if (n > opts.depth_cap)
        throw DepthLimit("order " + std::to_string(n) + " beyond the configured cap " +
                         std::to_string(opts.depth_cap));
    Evaluator ev(f, opts.memoize);
    return ev.eval(eta.lattice(), n);
}

std::vector<double> iterate_all(const LocalFunction& f, const HeightConfig& eta, int k_max,
                                const SeriesOptions& opts) {
    if (k_max < 0) throw Error("negative generator order");
    if (k_max > opts.depth_cap)
        throw DepthLimit("order " + std::to_string(k_max) + " beyond the configured cap " +
                         std::to_string(opts.depth_cap));
    Evaluator ev(f, opts.memoize);
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(k_max) + 1);
    for (int k = 0; k <= k_max; ++k) out.push_back(ev.eval(eta.lattice(), k));
    return out;
}

double bound_Ln(const LocalFunction& f, const HeightConfig& eta, int n) {
    if (n < 0) throw Error("negative generator order");
    if (n == 0) return f.sup_norm;
    const long reach = f.locality + n;
    const auto dec = interval_decomposition(eta, -reach, reach);
    const double s = static_cast<double>(dec.size_sum(-reach, reach));
    return std::pow(2.0 * s, static_cast<double>(n)) * f.sup_norm;
}

double radius(const HeightConfig& eta, long n_max) {
    return decency_report(eta, n_max).radius;
}

double series_tail_bound(const LocalFunction& f, const HeightConfig& eta, double t, int K) {
    return tail_from_growth(growth_for(f, eta.lattice()), f.sup_norm, t, K);
}

SeriesResult taylor_semigroup(const LocalFunction& f, const HeightConfig& eta, double t,
                              double tol, const SeriesOptions& opts) {
    if (t < 0.0) throw Error("negative time");
    if (tol <= 0.0) throw Error("tolerance must be positive");

    SeriesResult res;
    res.t = t;
    res.radius = radius(eta, opts.radius_n_max);
    if (t >= res.radius)
        throw RadiusExceeded("t=" + std::to_string(t) + " is outside the convergence radius " +
                             std::to_string(res.radius));

    const Growth growth = growth_for(f, eta.lattice());
    int needed = 0;
    double tail = tail_from_growth(growth, f.sup_norm, t, 0);
    while (tail >= tol && needed < opts.depth_cap) {
        ++needed;
        tail = tail_from_growth(growth, f.sup_norm, t, needed);
    }
    res.depth_limited = tail >= tol;
    res.truncation_K = needed;
    res.tail_bound = tail;

    const std::vector<double> terms = iterate_all(f, eta, needed, opts);
    double factorial = 1.0;
    double tk = 1.0;
    for (int k = 0; k <= needed; ++k) {
        if (k > 0) {
            factorial *= static_cast<double>(k);
            tk *= t;
        }
        res.value += tk * terms[static_cast<std::size_t>(k)] / factorial;
    }
    return res;
}

}  // namespace sandlab
