#include "sandlab/ctmc.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <json.hpp>

namespace sandlab {

const char* event_kind_name(EventKind k) {
    switch (k) {
        case EventKind::Avalanche: return "avalanche";
        case EventKind::Birth: return "birth";
        default: return "coupled";
    }
}

std::string Trajectory::to_jsonl() const {
    std::ostringstream os;
    for (const auto& ev : events) {
        nlohmann::ordered_json line;
        line["t"] = ev.t;
        line["site"] = ev.site;
        line["kind"] = event_kind_name(ev.kind);
        nlohmann::ordered_json delta;
        auto pack = [](const std::vector<SiteChange>& cs) {
            nlohmann::ordered_json arr = nlohmann::ordered_json::array();
            for (const auto& c : cs) arr.push_back({c.site, c.new_height});
            return arr;
        };
        delta["upper"] = pack(ev.upper_changes);
        if (initial_lower.has_value()) delta["lower"] = pack(ev.lower_changes);
        line["delta"] = delta;
        os << line.dump() << '\n';
    }
    return os.str();
}

namespace {

HeightConfig replay(const HeightConfig& initial,
                    const std::vector<TrajectoryEvent>& events, bool lower) {
    detail::Lattice lat = initial.lattice();
    for (const auto& ev : events)
        for (const auto& c : lower ? ev.lower_changes : ev.upper_changes) {
            lat.ensure(c.site);
            lat.set(c.site, c.new_height);
        }
    return HeightConfig(std::move(lat));
}

}  // namespace

HeightConfig replay_upper(const Trajectory& traj) { return replay(traj.initial, traj.events, false); }

HeightConfig replay_lower(const Trajectory& traj) {
    if (!traj.initial_lower.has_value()) throw Error("trajectory has no lower component");
    return replay(*traj.initial_lower, traj.events, true);
}

AvalancheSetState::AvalancheSetState(const CriticalSet& a0) : sites_(a0.sites()) {
    if (sites_.empty()) throw Error("avalanche chain needs a nonempty critical set");
}

bool AvalancheSetState::contains(Site i) const {
    return std::binary_search(sites_.begin(), sites_.end(), i);
}

bool AvalancheSetState::is_interval_minus_point() const {
    const Site span = sites_.back() - sites_.front() + 1;
    return span - static_cast<Site>(sites_.size()) <= 1;
}

AvalancheSetState::Jump AvalancheSetState::fire(std::size_t index) {
    const Site i = sites_[index];
    std::size_t r = index;
    while (r + 1 < sites_.size() && sites_[r + 1] == sites_[r] + 1) ++r;
    std::size_t l = index;
    while (l > 0 && sites_[l - 1] == sites_[l] - 1) --l;
    const Site right = sites_[r] + 1;  // first one past the critical run
    const Site left = sites_[l] - 1;
    const Site hole = right + left - i;

    // One erase and two inserts keep the vector sorted: the hole lies inside
    // the run, the new sites flank it.
    sites_.erase(std::lower_bound(sites_.begin(), sites_.end(), hole));
    sites_.insert(std::lower_bound(sites_.begin(), sites_.end(), left), left);
    sites_.insert(std::lower_bound(sites_.begin(), sites_.end(), right), right);
    return {i, left, right, hole};
}

Trajectory simulate_avalanche_chain(const CriticalSet& a0, double horizon, std::uint64_t seed,
                                    long max_events) {
    if (!std::isfinite(horizon) && max_events < 0)
        throw Error("either a finite horizon or an event cap is required");
    AvalancheSetState state(a0);
    Rng rng(seed);

    Trajectory traj;
    traj.initial = from_critical_set(a0);
    traj.horizon = horizon;
    double t = 0.0;
    while (max_events < 0 || static_cast<long>(traj.events.size()) < max_events) {
        t += rng.exponential(static_cast<double>(state.size()));
        if (t > horizon) break;
        const auto jump = state.fire(rng.below(state.size()));
        TrajectoryEvent ev;
        ev.t = t;
        ev.site = jump.fired;
        ev.kind = EventKind::Avalanche;
        ev.upper_changes = {{jump.left, 2}, {jump.right, 2}, {jump.hole, 1}};
        traj.events.push_back(std::move(ev));
    }
    return traj;
}

namespace {

void sorted_insert(std::vector<Site>& v, Site s) {
    v.insert(std::lower_bound(v.begin(), v.end(), s), s);
}

void sorted_erase(std::vector<Site>& v, Site s) {
    const auto it = std::lower_bound(v.begin(), v.end(), s);
    if (it == v.end() || *it != s) throw Error("internal: erasing absent critical site");
    v.erase(it);
}

// Mutable configuration state with its critical-site index for the
// window-birth dynamics.
struct LnState {
    detail::Lattice lat;
    std::vector<Site> crit;
    long n = 0;
    long crit_in_window = 0;

    LnState(long n_, const HeightConfig& eta0) : n(n_) {
        if (eta0.tail() != Tail::AllOnes)
            throw InvalidSite("window-birth dynamics needs a finite-critical initial state");
        lat = eta0.lattice();
        lat.ensure(-n - 1);
        lat.ensure(n + 1);
        for (Site i = lat.lo; i <= lat.hi(); ++i)
            if (lat.at(i) == 2) {
                crit.push_back(i);
                if (std::labs(i) <= n) ++crit_in_window;
            }
    }

    long ones_in_window() const { return 2 * n + 1 - crit_in_window; }

    Site kth_window_one(long k) const {  // k-th site of [-n, n] at height one
        for (Site i = -n; i <= n; ++i)
            if (lat.at(i) == 1 && k-- == 0) return i;
        throw Error("internal: window one index out of range");
    }

    std::vector<SiteChange> apply_topple(Site i) {
        const detail::ToppleResult r = detail::topple_add_inplace(lat, i);
        std::vector<SiteChange> changes;
        if (r.case_id == ToppleCase::Birth) {
            changes = {{i, 2}};
        } else if (r.case_id == ToppleCase::Interior) {
            changes = {{i - r.k_minus.value(), 2}, {i + r.k_plus.value(), 2}, {*r.hole, 1}};
        } else {
            throw Error("internal: escape case in finite-critical dynamics");
        }
        for (const auto& c : changes) {
            if (c.new_height == 2) {
                sorted_insert(crit, c.site);
                if (std::labs(c.site) <= n) ++crit_in_window;
            } else {
                sorted_erase(crit, c.site);
                if (std::labs(c.site) <= n) --crit_in_window;
            }
        }
        return changes;
    }
};

void run_Ln(LnState& state, double horizon, Rng& rng, Trajectory* record) {
    double t = 0.0;
    for (;;) {
        const long total = static_cast<long>(state.crit.size()) + state.ones_in_window();
        t += rng.exponential(static_cast<double>(total));
        if (t > horizon) break;
        const long r = static_cast<long>(rng.below(static_cast<std::uint64_t>(total)));
        TrajectoryEvent ev;
        ev.t = t;
        if (r < static_cast<long>(state.crit.size())) {
            ev.site = state.crit[static_cast<std::size_t>(r)];
            ev.kind = EventKind::Avalanche;
            ev.upper_changes = state.apply_topple(ev.site);
        } else {
            ev.site = state.kth_window_one(r - static_cast<long>(state.crit.size()));
            ev.kind = EventKind::Birth;
            ev.upper_changes = state.apply_topple(ev.site);
        }
        if (record) record->events.push_back(std::move(ev));
    }
}

// Fixed-volume state on [-n, n]: additions topple with absorbing boundary.
struct FvspState {
    detail::Lattice lat;
    long n;

    FvspState(long n_, const HeightConfig& eta0) : n(n_) {
        lat.lo = -n;
        lat.tail = Tail::AllOnes;
        lat.h.resize(static_cast<std::size_t>(2 * n + 1));
        for (Site i = -n; i <= n; ++i)
            lat.h[static_cast<std::size_t>(i + n)] = static_cast<std::uint8_t>(eta0.at(i));
    }

    std::vector<SiteChange> add_grain(Site i) {
        const detail::ToppleResult r = detail::topple_add_inplace(lat, i);
        std::vector<SiteChange> changes;
        if (r.case_id == ToppleCase::Birth) {
            changes = {{i, 2}};
        } else if (r.case_id == ToppleCase::Interior) {
            for (const SiteChange& c : std::initializer_list<SiteChange>{
                     {i - r.k_minus.value(), 2}, {i + r.k_plus.value(), 2}, {*r.hole, 1}})
                if (std::labs(c.site) <= n) changes.push_back(c);
        } else {
            throw Error("internal: escape case inside the volume");
        }
        // Drop the at most one cell grown on each side.
        while (lat.lo < -n) {
            lat.h.erase(lat.h.begin());
            ++lat.lo;
        }
        while (lat.hi() > n) lat.h.pop_back();
        return changes;
    }
};

}  // namespace

Trajectory simulate_Ln(long n, const HeightConfig& eta0, double horizon, std::uint64_t seed) {
    LnState state(n, eta0);
    Rng rng(seed);
    Trajectory traj;
    traj.initial = eta0;
    traj.horizon = horizon;
    run_Ln(state, horizon, rng, &traj);
    return traj;
}

Trajectory simulate_fvsp_poisson(long n, const HeightConfig& eta0, double horizon,
                                 std::uint64_t seed) {
    if (eta0.tail() != Tail::AllOnes)
        throw InvalidSite("finite-volume initial state must have an all-ones tail");
    for (Site i = eta0.lo(); i <= eta0.hi(); ++i)
        if (std::labs(i) > n && eta0.at(i) != 1)
            throw InvalidSite("finite-volume initial state must be ones outside [-n, n]");

    FvspState state(n, eta0);
    Rng rng(seed);
    Trajectory traj;
    traj.initial = HeightConfig(state.lat);
    traj.horizon = horizon;
    double t = 0.0;
    const double rate = static_cast<double>(2 * n + 1);
    for (;;) {
        t += rng.exponential(rate);
        if (t > horizon) break;
        const Site i = -n + static_cast<Site>(rng.below(static_cast<std::uint64_t>(2 * n + 1)));
        TrajectoryEvent ev;
        ev.t = t;
        ev.site = i;
        ev.kind = state.lat.at(i) == 2 ? EventKind::Avalanche : EventKind::Birth;
        ev.upper_changes = state.add_grain(i);
        traj.events.push_back(std::move(ev));
    }
    return traj;
}

namespace {

struct CoupledEngine {
    detail::Lattice up, low;
    std::vector<Site> up_crit;
    long n = 0;
    CouplingKind kind;
    long low_ones_in_window = 0;

    CoupledEngine(CouplingKind kind_, long n_, const HeightConfig& upper0,
                  const HeightConfig& lower0)
        : n(n_), kind(kind_) {
        if (upper0.tail() != Tail::AllOnes || lower0.tail() != Tail::AllOnes)
            throw InvalidSite("coupled dynamics needs finite-critical initial states");
        if (!leq_everywhere(lower0, upper0))
            throw NotOrdered("coupled dynamics needs lower <= upper pointwise");
        up = upper0.lattice();
        low = lower0.lattice();
        const Site lo_cover = std::min({up.lo, low.lo, static_cast<Site>(-n - 2)});
        const Site hi_cover = std::max({up.hi(), low.hi(), static_cast<Site>(n + 2)});
        for (detail::Lattice* l : {&up, &low}) {
            l->ensure(lo_cover);
            l->ensure(hi_cover);
        }
        for (Site i = up.lo; i <= up.hi(); ++i)
            if (up.at(i) == 2) up_crit.push_back(i);
        if (kind != CouplingKind::AvalancheOnly)
            for (Site i = -n; i <= n; ++i)
                if (low.at(i) == 1) ++low_ones_in_window;
    }

    long boundary_births() const {
        if (kind != CouplingKind::WindowPlusOne) return 0;
        return (up.at(-n - 1) == 1 ? 1 : 0) + (up.at(n + 1) == 1 ? 1 : 0);
    }

    long total_rate() const {
        long total = static_cast<long>(up_crit.size());
        if (kind != CouplingKind::AvalancheOnly) total += low_ones_in_window;
        total += boundary_births();
        return total;
    }

    std::vector<SiteChange> topple_upper(Site i) {
        const detail::ToppleResult r = detail::topple_add_inplace(up, i);
        std::vector<SiteChange> changes;
        if (r.case_id == ToppleCase::Birth) {
            changes = {{i, 2}};
        } else if (r.case_id == ToppleCase::Interior) {
            changes = {{i - r.k_minus.value(), 2}, {i + r.k_plus.value(), 2}, {*r.hole, 1}};
        } else {
            throw Error("internal: escape case in coupled dynamics");
        }
        for (const auto& c : changes) {
            if (c.new_height == 2)
                sorted_insert(up_crit, c.site);
            else
                sorted_erase(up_crit, c.site);
        }
        return changes;
    }

    std::vector<SiteChange> topple_lower(Site i) {
        const detail::ToppleResult r = detail::topple_add_inplace(low, i);
        std::vector<SiteChange> changes;
        if (r.case_id == ToppleCase::Birth) {
            changes = {{i, 2}};
        } else if (r.case_id == ToppleCase::Interior) {
            changes = {{i - r.k_minus.value(), 2}, {i + r.k_plus.value(), 2}, {*r.hole, 1}};
        } else {
            throw Error("internal: escape case in coupled dynamics");
        }
        if (kind != CouplingKind::AvalancheOnly)
            for (const auto& c : changes)
                if (std::labs(c.site) <= n) low_ones_in_window += c.new_height == 2 ? -1 : 1;
        return changes;
    }

    Site kth_lower_window_one(long k) const {
        for (Site i = -n; i <= n; ++i)
            if (low.at(i) == 1 && k-- == 0) return i;
        throw Error("internal: lower window one index out of range");
    }

    TrajectoryEvent fire(long r, double t) {
        TrajectoryEvent ev;
        ev.t = t;
        if (r < static_cast<long>(up_crit.size())) {
            // Avalanche clock: the upper topples; the lower follows at the
            // unique site whose toppling recreates the same hole, if any.
            const Site i = up_crit[static_cast<std::size_t>(r)];
            const Site hole =
                i + detail::scan_k_plus(up, i).value() - detail::scan_k_minus(up, i).value();
            ev.site = i;
            ev.upper_changes = topple_upper(i);
            if (low.at(hole) == 2) {
                const Site j = hole + detail::scan_k_plus(low, hole).value() -
                               detail::scan_k_minus(low, hole).value();
                ev.lower_changes = topple_lower(j);
                ev.kind = EventKind::CoupledPair;
            } else {
                ev.kind = EventKind::Avalanche;
            }
            return ev;
        }
        r -= static_cast<long>(up_crit.size());
        if (r < low_ones_in_window) {
            // Birth clock inside the window: both components gain the grain
            // when the upper site is flat, otherwise only the lower does.
            const Site i = kth_lower_window_one(r);
            ev.site = i;
            if (up.at(i) == 1) {
                ev.upper_changes = topple_upper(i);
                ev.lower_changes = topple_lower(i);
                ev.kind = EventKind::CoupledPair;
            } else {
                ev.lower_changes = topple_lower(i);
                ev.kind = EventKind::Birth;
            }
            return ev;
        }
        r -= low_ones_in_window;
        // Boundary birth of the wider upper window: the lower has no clock
        // at +-(n+1), so only the upper moves.
        for (Site i : {-n - 1, n + 1}) {
            if (up.at(i) != 1) continue;
            if (r-- == 0) {
                ev.site = i;
                ev.kind = EventKind::Birth;
                ev.upper_changes = topple_upper(i);
                return ev;
            }
        }
        throw Error("internal: coupled clock index out of range");
    }

    long check_order(const TrajectoryEvent& ev) const {
        long violations = 0;
        auto look = [&](const std::vector<SiteChange>& cs) {
            for (const auto& c : cs)
                if (low.at(c.site) > up.at(c.site)) ++violations;
        };
        look(ev.upper_changes);
        look(ev.lower_changes);
        return violations;
    }
};

CoupledOutcome run_coupled(CouplingKind kind, long n, const HeightConfig& upper0,
                           const HeightConfig& lower0, double horizon, std::uint64_t seed) {
    CoupledEngine engine(kind, n, upper0, lower0);
    Rng rng(seed);
    CoupledOutcome out;
    out.trajectory.initial = upper0;
    out.trajectory.initial_lower = lower0;
    out.trajectory.horizon = horizon;
    double t = 0.0;
    for (;;) {
        const long total = engine.total_rate();
        if (total == 0) break;  // no enabled clock (avalanche-only from flat states)
        t += rng.exponential(static_cast<double>(total));
        if (t > horizon) break;
        TrajectoryEvent ev = engine.fire(static_cast<long>(rng.below(static_cast<std::uint64_t>(total))), t);
        out.order_violations += engine.check_order(ev);
        out.trajectory.events.push_back(std::move(ev));
    }
    return out;
}

}  // namespace

CoupledOutcome simulate_coupled_avalanche(const HeightConfig& upper0, const HeightConfig& lower0,
                                          double horizon, std::uint64_t seed) {
    return run_coupled(CouplingKind::AvalancheOnly, 0, upper0, lower0, horizon, seed);
}

CoupledOutcome simulate_coupled_n(long n, const HeightConfig& upper0, const HeightConfig& lower0,
                                  double horizon, std::uint64_t seed) {
    return run_coupled(CouplingKind::SameWindow, n, upper0, lower0, horizon, seed);
}

CoupledOutcome simulate_coupled_n1_n(long n, const HeightConfig& upper0,
                                     const HeightConfig& lower0, double horizon,
                                     std::uint64_t seed) {
    return run_coupled(CouplingKind::WindowPlusOne, n, upper0, lower0, horizon, seed);
}

HeightConfig truncate_to_ones(const HeightConfig& eta, long m) {
    std::vector<std::uint8_t> h(static_cast<std::size_t>(2 * m + 1));
    for (Site i = -m; i <= m; ++i) h[static_cast<std::size_t>(i + m)] = static_cast<std::uint8_t>(eta.at(i));
    return HeightConfig(-m, std::move(h), Tail::AllOnes);
}

namespace {

EstimatorResult summarize(const std::vector<double>& xs, std::uint64_t seed,
                          std::map<std::string, std::string> params) {
    EstimatorResult res;
    res.samples = static_cast<long>(xs.size());
    res.seed = seed;
    res.params = std::move(params);
    double sum = 0.0;
    for (double x : xs) sum += x;
    res.mean = sum / static_cast<double>(xs.size());
    if (xs.size() > 1) {
        double ss = 0.0;
        for (double x : xs) ss += (x - res.mean) * (x - res.mean);
        res.stderr_ = std::sqrt(ss / static_cast<double>(xs.size() - 1)) /
                      std::sqrt(static_cast<double>(xs.size()));
    }
    return res;
}

}  // namespace

EstimatorResult estimate_semigroup(const std::function<double(const HeightConfig&)>& f,
                                   const HeightConfig& eta, double t, long n, long m,
                                   long samples, std::uint64_t seed) {
    if (samples < 1) throw Error("estimator needs at least one sample");
    const HeightConfig start = truncate_to_ones(eta, m);
    std::vector<double> xs(static_cast<std::size_t>(samples));
    for (long s = 0; s < samples; ++s) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(s)));
        LnState state(n, start);
        run_Ln(state, t, rng, nullptr);
        xs[static_cast<std::size_t>(s)] = f(HeightConfig(state.lat));
    }
    return summarize(xs, seed,
                     {{"t", std::to_string(t)},
                      {"n", std::to_string(n)},
                      {"m", std::to_string(m)},
                      {"samples", std::to_string(samples)}});
}

EstimatorResult estimate_absorption(long n, double t, long samples, std::uint64_t seed) {
    if (samples < 1) throw Error("estimator needs at least one sample");
    std::vector<double> xs(static_cast<std::size_t>(samples));
    for (long s = 0; s < samples; ++s) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(s)));
        GrainField f;
        f.lo = -n;
        f.counts.resize(static_cast<std::size_t>(2 * n + 1));
        for (auto& c : f.counts) c = 1 + rng.poisson(t);
        xs[static_cast<std::size_t>(s)] = stabilize(n, f).at(0) == 1 ? 1.0 : 0.0;
    }
    return summarize(xs, seed,
                     {{"t", std::to_string(t)},
                      {"n", std::to_string(n)},
                      {"samples", std::to_string(samples)}});
}

namespace {

CriticalSet full_interval(long n) {
    std::vector<Site> sites;
    for (Site i = -n; i <= n; ++i) sites.push_back(i);
    return CriticalSet(std::move(sites));
}

}  // namespace

EstimatorResult estimate_hole_at_time(long n, double t, long samples, std::uint64_t seed) {
    if (samples < 1) throw Error("estimator needs at least one sample");
    const CriticalSet a0 = full_interval(n);
    std::vector<double> xs(static_cast<std::size_t>(samples));
    for (long s = 0; s < samples; ++s) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(s)));
        AvalancheSetState state(a0);
        double tcur = rng.exponential(static_cast<double>(state.size()));
        while (tcur <= t) {
            state.fire(rng.below(state.size()));
            tcur += rng.exponential(static_cast<double>(state.size()));
        }
        xs[static_cast<std::size_t>(s)] = state.contains(0) ? 0.0 : 1.0;
    }
    return summarize(xs, seed,
                     {{"t", std::to_string(t)},
                      {"n", std::to_string(n)},
                      {"samples", std::to_string(samples)}});
}

EstimatorResult estimate_growth(const CriticalSet& a0, double t, long samples,
                                std::uint64_t seed) {
    if (samples < 1) throw Error("estimator needs at least one sample");
    std::vector<double> xs(static_cast<std::size_t>(samples));
    for (long s = 0; s < samples; ++s) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(s)));
        AvalancheSetState state(a0);
        double tcur = rng.exponential(static_cast<double>(state.size()));
        while (tcur <= t) {
            state.fire(rng.below(state.size()));
            tcur += rng.exponential(static_cast<double>(state.size()));
        }
        xs[static_cast<std::size_t>(s)] = static_cast<double>(state.size());
    }
    return summarize(xs, seed,
                     {{"t", std::to_string(t)}, {"samples", std::to_string(samples)}});
}

HoleLawResult estimate_hole_law(const CriticalSet& a0, int k_max, long samples,
                                std::uint64_t seed) {
    if (samples < 1 || k_max < 1) throw Error("hole-law estimate needs samples and jumps");
    HoleLawResult res;
    res.samples = samples;
    std::vector<long> miss(static_cast<std::size_t>(k_max), 0);
    for (long s = 0; s < samples; ++s) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(s)));
        AvalancheSetState state(a0);
        // The embedded jump chain suffices: firing sites are uniform over
        // the current set, so event times need not be drawn.
        for (int k = 0; k < k_max; ++k) {
            state.fire(rng.below(state.size()));
            if (!state.contains(0)) ++miss[static_cast<std::size_t>(k)];
            if (!state.is_interval_minus_point()) ++res.structural_violations;
        }
    }
    for (int k = 0; k < k_max; ++k) {
        const double p = static_cast<double>(miss[static_cast<std::size_t>(k)]) /
                         static_cast<double>(samples);
        res.p_hat.push_back(p);
        const double var = p * (1.0 - p) * static_cast<double>(samples) /
                           std::max(1.0, static_cast<double>(samples - 1));
        res.stderr_.push_back(std::sqrt(var / static_cast<double>(samples)));
    }
    return res;
}

HeightConfig discrete_time_fvsp(long n, long steps, const HeightConfig& eta0,
                                std::uint64_t seed) {
    if (steps < 0) throw Error("negative step count");
    FvspState state(n, eta0);
    Rng rng(seed);
    for (long s = 0; s < steps; ++s) state.add_grain(rng.pick(-n, n));
    return HeightConfig(state.lat);
}

}  // namespace sandlab
