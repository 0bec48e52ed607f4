#include "sandlab/exact.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "sandlab/rng.hpp"

namespace sandlab {

StateSpace::StateSpace(long n, long n_cap) : n_(n) {
    if (n < 0) throw InvalidSite("volume parameter must be nonnegative");
    if (n > n_cap)
        throw SizeLimit("state space for n=" + std::to_string(n) + " exceeds the cap n=" +
                        std::to_string(n_cap));
}

HeightConfig StateSpace::config(std::size_t index) const {
    const int w = 2 * static_cast<int>(n_) + 1;
    std::vector<std::uint8_t> h(static_cast<std::size_t>(w));
    for (int p = 0; p < w; ++p)
        h[static_cast<std::size_t>(p)] =
            static_cast<std::uint8_t>(1 + ((index >> (w - 1 - p)) & 1));
    return HeightConfig(-n_, std::move(h), Tail::AllOnes);
}

std::size_t StateSpace::index_of(const HeightConfig& cfg) const {
    const int w = 2 * static_cast<int>(n_) + 1;
    std::size_t idx = 0;
    for (int p = 0; p < w; ++p)
        idx = (idx << 1) | static_cast<std::size_t>(cfg.at(-n_ + p) - 1);
    return idx;
}

int StateSpace::ones_count(std::size_t index) const {
    const int w = 2 * static_cast<int>(n_) + 1;
    int ones = 0;
    for (int p = 0; p < w; ++p)
        if (((index >> p) & 1) == 0) ++ones;
    return ones;
}

double Distribution::total_variation(const Distribution& other) const {
    double s = 0.0;
    for (std::size_t k = 0; k < weights.size(); ++k)
        s += std::abs(weights[k] - (k < other.weights.size() ? other.weights[k] : 0.0));
    return 0.5 * s;
}

std::vector<std::size_t> recurrent_set(long n) {
    const StateSpace space(n);
    std::vector<std::size_t> rec;
    for (std::size_t s = 0; s < space.size(); ++s)
        if (space.ones_count(s) <= 1) rec.push_back(s);
    return rec;
}

bool is_recurrent_config(long n, const HeightConfig& cfg) {
    long deficit = 0;
    for (Site i = -n; i <= n; ++i) deficit += 2 - cfg.at(i);
    return deficit <= 1;
}

RateMatrix build_generator(long n, long n_cap) {
    const StateSpace space(n, n_cap);
    const std::size_t m = space.size();
    RateMatrix rm;
    rm.size = m;
    rm.q.assign(m * m, 0.0);
    for (std::size_t s = 0; s < m; ++s) {
        const HeightConfig cfg = space.config(s);
        for (Site i = -n; i <= n; ++i) {
            const std::size_t t = space.index_of(topple_add_finite(n, i, cfg));
            rm.q[s * m + t] += 1.0;
        }
        rm.q[s * m + s] -= static_cast<double>(2 * n + 1);
    }
    return rm;
}

namespace {

// Least-squares solve of the overdetermined system A x = b by Householder QR.
// A is (rows x cols) row-major with rows >= cols and full column rank.
std::vector<double> householder_lstsq(std::vector<double> a, std::vector<double> b,
                                      std::size_t rows, std::size_t cols) {
    for (std::size_t k = 0; k < cols; ++k) {
        double norm = 0.0;
        for (std::size_t i = k; i < rows; ++i) norm += a[i * cols + k] * a[i * cols + k];
        norm = std::sqrt(norm);
        if (norm == 0.0) throw Error("rank-deficient system in stationary solve");
        if (a[k * cols + k] > 0) norm = -norm;
        // v = x - norm * e_k, applied implicitly
        std::vector<double> v(rows - k);
        for (std::size_t i = k; i < rows; ++i) v[i - k] = a[i * cols + k];
        v[0] -= norm;
        double vtv = 0.0;
        for (double x : v) vtv += x * x;
        if (vtv == 0.0) continue;
        for (std::size_t j = k; j < cols; ++j) {
            double dot = 0.0;
            for (std::size_t i = k; i < rows; ++i) dot += v[i - k] * a[i * cols + j];
            const double f = 2.0 * dot / vtv;
            for (std::size_t i = k; i < rows; ++i) a[i * cols + j] -= f * v[i - k];
        }
        double dotb = 0.0;
        for (std::size_t i = k; i < rows; ++i) dotb += v[i - k] * b[i];
        const double fb = 2.0 * dotb / vtv;
        for (std::size_t i = k; i < rows; ++i) b[i] -= fb * v[i - k];
    }
    std::vector<double> x(cols);
    for (std::size_t k = cols; k-- > 0;) {
        double s = b[k];
        for (std::size_t j = k + 1; j < cols; ++j) s -= a[k * cols + j] * x[j];
        x[k] = s / a[k * cols + k];
    }
    return x;
}

}  // namespace

Distribution stationary_of(const RateMatrix& rm) {
    const std::size_t m = rm.size;
    // Rows 0..m-1: (q^T pi)_s = 0; final row: sum pi = 1.
    std::vector<double> a((m + 1) * m);
    std::vector<double> b(m + 1, 0.0);
    for (std::size_t s = 0; s < m; ++s)
        for (std::size_t t = 0; t < m; ++t) a[s * m + t] = rm.q[t * m + s];
    for (std::size_t t = 0; t < m; ++t) a[m * m + t] = 1.0;
    b[m] = 1.0;
    std::vector<double> pi = householder_lstsq(std::move(a), std::move(b), m + 1, m);
    // Clip solver noise; weights must form a distribution to 1e-12.
    double sum = 0.0;
    for (double& w : pi) {
        if (w < 0.0 && w > -1e-12) w = 0.0;
        sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw Error("stationary solve failed to normalize");
    for (double& w : pi) w /= sum;
    return Distribution{std::move(pi)};
}

Distribution stationary_distribution(long n, long n_cap) {
    return stationary_of(build_generator(n, n_cap));
}

std::pair<double, double> check_reversibility(long n, const std::vector<double>& f,
                                              const std::vector<double>& g) {
    const RateMatrix rm = build_generator(n);
    const Distribution mu = stationary_of(rm);
    const std::size_t m = rm.size;
    if (f.size() != m || g.size() != m) throw Error("observable size mismatch");
    auto apply = [&](const std::vector<double>& h, std::size_t s) {
        double v = 0.0;
        for (std::size_t t = 0; t < m; ++t) v += rm.q[s * m + t] * h[t];
        return v;
    };
    double lhs = 0.0, rhs = 0.0;
    for (std::size_t s = 0; s < m; ++s) {
        lhs += mu.weights[s] * apply(f, s) * g[s];
        rhs += mu.weights[s] * f[s] * apply(g, s);
    }
    return {lhs, rhs};
}

BijectionReport check_unique_toppling_bijection(long n) {
    const StateSpace space(n);
    const RateMatrix rm = build_generator(n);
    const Distribution mu = stationary_of(rm);
    const std::vector<std::size_t> rec = recurrent_set(n);

    // Precompute toppling targets for recurrent sources.
    std::vector<std::vector<std::size_t>> target(rec.size());
    for (std::size_t a = 0; a < rec.size(); ++a) {
        const HeightConfig cfg = space.config(rec[a]);
        for (Site i = -n; i <= n; ++i)
            target[a].push_back(space.index_of(topple_add_finite(n, i, cfg)));
    }

    BijectionReport rep;
    rep.n = n;
    for (std::size_t a = 0; a < rec.size(); ++a) {
        for (std::size_t b = 0; b < rec.size(); ++b) {
            if (a == b) continue;
            int hits = 0;
            for (std::size_t k = 0; k < target[a].size(); ++k)
                if (target[a][k] == rec[b]) ++hits;
            ++rep.pairs_checked;
            if (hits != 1) {
                rep.ok = false;
                rep.counterexamples.emplace_back(rec[a], rec[b]);
            }
        }
    }

    // Pushforward of mu through each single-site toppling map.
    const std::size_t m = space.size();
    for (Site i = -n; i <= n; ++i) {
        std::vector<double> push(m, 0.0);
        for (std::size_t s = 0; s < m; ++s) {
            const std::size_t t = space.index_of(topple_add_finite(n, i, space.config(s)));
            push[t] += mu.weights[s];
        }
        for (std::size_t s = 0; s < m; ++s)
            rep.max_pushforward_deviation =
                std::max(rep.max_pushforward_deviation, std::abs(push[s] - mu.weights[s]));
    }
    if (rep.max_pushforward_deviation > 1e-10) rep.ok = false;
    return rep;
}

Distribution transient_of(const RateMatrix& rm, std::size_t s0, double t, double tol) {
    const std::size_t m = rm.size;
    if (s0 >= m) throw InvalidSite("initial state index out of range");
    if (t < 0.0) throw Error("negative time");

    double lambda = 0.0;
    for (std::size_t s = 0; s < m; ++s) lambda = std::max(lambda, -rm.q[s * m + s]);
    if (lambda == 0.0 || t == 0.0) {
        Distribution d{std::vector<double>(m, 0.0)};
        d.weights[s0] = 1.0;
        return d;
    }

    // P = I + q / lambda, iterated against Poisson(lambda t) weights until
    // the accumulated mass leaves a tail below tol.
    const double lt = lambda * t;
    std::vector<double> v(m, 0.0), next(m);
    v[s0] = 1.0;
    Distribution out{std::vector<double>(m, 0.0)};
    double cum = 0.0;
    const std::size_t k_max = static_cast<std::size_t>(lt + 60.0 * std::sqrt(lt) + 60.0);
    for (std::size_t k = 0; k <= k_max; ++k) {
        const double logw = -lt + static_cast<double>(k) * std::log(lt) -
                            std::lgamma(static_cast<double>(k) + 1.0);
        const double w = logw < -745.0 ? 0.0 : std::exp(logw);
        if (w > 0.0) {
            for (std::size_t s = 0; s < m; ++s) out.weights[s] += w * v[s];
            cum += w;
        }
        if (cum >= 1.0 - tol) return out;
        // v <- v P
        std::fill(next.begin(), next.end(), 0.0);
        for (std::size_t s = 0; s < m; ++s) {
            const double vs = v[s];
            if (vs == 0.0) continue;
            const double* row = &rm.q[s * m];
            for (std::size_t u = 0; u < m; ++u) next[u] += vs * row[u] / lambda;
            next[s] += vs;
        }
        v.swap(next);
    }
    throw Error("uniformization failed to reach the Poisson tail bound");
}

Distribution transient_distribution(long n, std::size_t s0, double t, double tol, long n_cap) {
    return transient_of(build_generator(n, n_cap), s0, t, tol);
}

ExcessReport check_lemma_excess(long n, int trials, std::uint64_t seed) {
    if (n < 2) throw Error("central-mass check needs n >= 2");
    ExcessReport rep;
    rep.n = n;
    rep.trials = trials;
    Rng rng(seed);
    const long c = n / 2;
    for (int trial = 0; trial < trials; ++trial) {
        GrainField f;
        f.lo = -n;
        f.counts.assign(static_cast<std::size_t>(2 * n + 1), 1);
        // Sprinkle a little noise everywhere, then pile mass onto the
        // central half until the hypothesis holds.
        for (auto& count : f.counts) count += rng.below(3);
        std::uint64_t central = 0;
        for (Site i = -c; i <= c; ++i) central += f.at(i);
        const std::uint64_t target = static_cast<std::uint64_t>(12 * n) + rng.below(6 * n);
        while (central < target) {
            f.counts[static_cast<std::size_t>(rng.pick(-c, c) + n)] += 1;
            ++central;
        }
        if (!is_recurrent_config(n, stabilize(n, f))) {
            rep.ok = false;
            rep.violations.push_back(f);
        }
    }
    return rep;
}

std::string distribution_csv(long n, const Distribution& d) {
    const StateSpace space(n);
    std::ostringstream os;
    os << "state_index,heights,weight\n";
    char buf[64];
    for (std::size_t s = 0; s < d.weights.size(); ++s) {
        const HeightConfig cfg = space.config(s);
        os << s << ',';
        for (Site i = -n; i <= n; ++i) os << cfg.at(i);
        std::snprintf(buf, sizeof buf, "%.17g", d.weights[s]);
        os << ',' << buf << '\n';
    }
    return os.str();
}

std::string generator_csv(const RateMatrix& q) {
    std::ostringstream os;
    os << "row,col,rate\n";
    char buf[64];
    for (std::size_t s = 0; s < q.size; ++s)
        for (std::size_t t = 0; t < q.size; ++t)
            if (q.at(s, t) != 0.0) {
                std::snprintf(buf, sizeof buf, "%.17g", q.at(s, t));
                os << s << ',' << t << ',' << buf << '\n';
            }
    return os.str();
}

}  // namespace sandlab
