#include "sandlab/scenario.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "sandlab/ctmc.hpp"
#include "sandlab/exact.hpp"
#include "sandlab/lattice.hpp"
#include "sandlab/rng.hpp"
#include "sandlab/series.hpp"
#include "sandlab/toppling.hpp"

namespace sandlab {

namespace {

using nlohmann::ordered_json;

const std::vector<std::string> kCommands = {"stabilize", "avalanche", "couple",
                                            "fvsp",      "exact",     "series",
                                            "theorem51", "prop51",    "discrete"};

bool known_command(const std::string& c) {
    for (const auto& k : kCommands)
        if (k == c) return true;
    return false;
}

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double param_double(const Scenario& sc, const std::string& key, double fallback,
                    bool* present = nullptr) {
    const auto it = sc.params.find(key);
    if (present) *present = it != sc.params.end();
    if (it == sc.params.end()) return fallback;
    std::size_t pos = 0;
    const double v = std::stod(it->second, &pos);
    if (pos != it->second.size()) throw ParseError("parameter '" + key + "' is not a number");
    return v;
}

long param_long(const Scenario& sc, const std::string& key, long fallback,
                bool* present = nullptr) {
    const auto it = sc.params.find(key);
    if (present) *present = it != sc.params.end();
    if (it == sc.params.end()) return fallback;
    std::size_t pos = 0;
    const long v = std::stol(it->second, &pos);
    if (pos != it->second.size()) throw ParseError("parameter '" + key + "' is not an integer");
    return v;
}

std::string param_string(const Scenario& sc, const std::string& key, const std::string& fallback) {
    const auto it = sc.params.find(key);
    return it == sc.params.end() ? fallback : it->second;
}

std::vector<long> param_long_list(const Scenario& sc, const std::string& key,
                                  const std::string& fallback) {
    std::string text = param_string(sc, key, fallback);
    std::vector<long> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(std::stol(item));
    }
    if (out.empty()) throw ParseError("parameter '" + key + "' needs a comma-separated list");
    return out;
}

HeightConfig param_config(const Scenario& sc, const std::string& key,
                          const std::string& fallback_text) {
    const std::string text = param_string(sc, key, fallback_text);
    if (text.rfind("file:", 0) == 0) {
        std::ifstream in(text.substr(5));
        if (!in) throw ParseError("cannot open config file " + text.substr(5));
        std::stringstream buf;
        buf << in.rdbuf();
        return HeightConfig::from_text(trim(buf.str()));
    }
    return HeightConfig::from_text(text);
}

}  // namespace

Scenario parse_scenario_text(const std::string& text) {
    Scenario sc;
    const std::string body = trim(text);
    if (!body.empty() && body.front() == '{') {
        const auto j = nlohmann::json::parse(body);
        auto as_string = [](const nlohmann::json& v) {
            if (v.is_string()) return v.get<std::string>();
            if (v.is_number_integer()) return std::to_string(v.get<long long>());
            if (v.is_number_float()) return format_double(v.get<double>());
            if (v.is_boolean()) return std::string(v.get<bool>() ? "1" : "0");
            throw ParseError("scenario values must be scalars");
        };
        for (const auto& [key, value] : j.items()) {
            if (key == "command") sc.command = as_string(value);
            else if (key == "name") sc.name = as_string(value);
            else if (key == "out") sc.output_path = as_string(value);
            else if (key == "seed") sc.seed = value.get<std::uint64_t>();
            else if (key == "params") {
                for (const auto& [pk, pv] : value.items()) sc.params[pk] = as_string(pv);
            } else {
                sc.params[key] = as_string(value);
            }
        }
    } else {
        std::istringstream is(body);
        std::string line;
        while (std::getline(is, line)) {
            const auto hash = line.find('#');
            if (hash != std::string::npos) line = line.substr(0, hash);
            line = trim(line);
            if (line.empty()) continue;
            const auto eq = line.find('=');
            if (eq == std::string::npos)
                throw ParseError("scenario line without '=': " + line);
            const std::string key = trim(line.substr(0, eq));
            const std::string value = trim(line.substr(eq + 1));
            if (key == "command") sc.command = value;
            else if (key == "name") sc.name = value;
            else if (key == "out") sc.output_path = value;
            else if (key == "seed") sc.seed = std::stoull(value);
            else sc.params[key] = value;
        }
    }
    if (sc.name.empty()) sc.name = sc.command;
    return sc;
}

Scenario load_scenario_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open scenario file " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_scenario_text(buf.str());
}

std::string scenario_hash(const Scenario& sc) {
    std::ostringstream os;
    os << "command=" << sc.command << '\n' << "name=" << sc.name << '\n'
       << "seed=" << sc.seed << '\n';
    for (const auto& [k, v] : sc.params) os << k << '=' << v << '\n';
    const std::string canon = os.str();
    char buf[32];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(fnv1a(canon.data(), canon.size())));
    return buf;
}

ValidationReport validate_scenario(const Scenario& sc) {
    ValidationReport rep;
    auto fail = [&](const std::string& msg) {
        rep.ok = false;
        rep.errors.push_back(msg);
    };
    if (!known_command(sc.command)) {
        fail("command: unknown value '" + sc.command + "'");
        return rep;
    }
    try {
        if (sc.command == "stabilize") {
            const long n = param_long(sc, "n", -1);
            if (n < 0) fail("n: required nonnegative volume");
            if (sc.params.find("grains") == sc.params.end()) {
                fail("grains: required (text 'lo hi c...')");
            } else {
                GrainField::from_text(sc.params.at("grains"));
            }
        } else if (sc.command == "avalanche") {
            if (param_double(sc, "horizon", -1) < 0 && param_long(sc, "max-events", -1) < 0)
                fail("horizon or max-events: one positive bound required");
            if (sc.params.find("a0") == sc.params.end() && param_long(sc, "interval", -1) < 0)
                fail("a0 or interval: initial critical set required");
        } else if (sc.command == "couple") {
            const std::string kind = param_string(sc, "kind", "");
            if (kind != "a" && kind != "n" && kind != "n1n")
                fail("kind: expected a|n|n1n");
            if (kind != "a" && param_long(sc, "n", -1) < 0) fail("n: required for windowed couplings");
            if (param_double(sc, "horizon", -1) <= 0) fail("horizon: required positive");
            param_config(sc, "upper", "0 0 ones 1");
            param_config(sc, "lower", "0 0 ones 1");
        } else if (sc.command == "fvsp") {
            if (param_long(sc, "n", -1) < 0) fail("n: required nonnegative volume");
            if (param_double(sc, "horizon", -1) < 0) fail("horizon: required nonnegative");
        } else if (sc.command == "exact") {
            const long n = param_long(sc, "n", -1);
            if (n < 0) fail("n: required nonnegative volume");
            if (n > 6) fail("n: enumeration cap is 6");
            const std::string check = param_string(sc, "check", "all");
            if (check != "all" && check != "stationary" && check != "reversibility" &&
                check != "bijection" && check != "transient")
                fail("check: expected all|stationary|reversibility|bijection|transient");
        } else if (sc.command == "series") {
            builtin_observable(param_string(sc, "f", "occ0"));
            const double t = param_double(sc, "t", 0.0);
            const double tol = param_double(sc, "tol", 1e-8);
            if (t < 0) fail("t: must be nonnegative");
            if (tol <= 0) fail("tol: must be positive");
            const HeightConfig eta = param_config(sc, "eta", "0 0 ones 1");
            try {
                const double r = radius(eta, 50);
                if (t >= r)
                    rep.warnings.push_back("t=" + format_double(t) +
                                           " is at or beyond the convergence radius " +
                                           format_double(r) + "; the run would fail");
            } catch (const Error& e) {
                rep.warnings.push_back(std::string("radius not computable: ") + e.what());
            }
        } else if (sc.command == "theorem51") {
            param_long_list(sc, "n", "25,50,100");
            if (param_double(sc, "t", 14.0) < 0) fail("t: must be nonnegative");
            if (param_long(sc, "samples", 10000) < 1) fail("samples: must be positive");
            const double delta = param_double(sc, "delta", 0.5);
            if (delta <= 0 || delta >= 1) fail("delta: must lie in (0,1)");
        } else if (sc.command == "prop51") {
            if (param_long(sc, "n", -1) < 0) fail("n: required interval radius");
            if (param_long(sc, "k", -1) < 1) fail("k: required jump count");
            if (param_long(sc, "samples", 10000) < 1) fail("samples: must be positive");
        } else if (sc.command == "discrete") {
            if (param_long(sc, "n", -1) < 0) fail("n: required nonnegative volume");
            if (param_long(sc, "steps", -1) < 0) fail("steps: required nonnegative");
        }
    } catch (const std::exception& e) {
        fail(e.what());
    }
    return rep;
}

namespace {

struct Outputs {
    std::filesystem::path dir;
    std::string stem;
    std::vector<std::string> files;

    std::string write(const std::string& suffix, const std::string& content) {
        std::filesystem::create_directories(dir);
        const std::filesystem::path p = dir / (stem + suffix);
        std::ofstream out(p, std::ios::binary);
        out << content;
        files.push_back(p.string());
        return p.string();
    }
};

ordered_json estimator_json(const EstimatorResult& r) {
    ordered_json j;
    j["mean"] = r.mean;
    j["stderr"] = r.stderr_;
    j["samples"] = r.samples;
    return j;
}

ordered_json run_command(const Scenario& sc, Outputs& out) {
    ordered_json results;

    if (sc.command == "stabilize") {
        const long n = param_long(sc, "n", 0);
        const GrainField grains = GrainField::from_text(sc.params.at("grains"));
        const HeightConfig cfg = stabilize(n, grains);
        results["final"] = cfg.to_text();
        results["recurrent"] = is_recurrent_config(n, cfg);
        if (param_long(sc, "oracle", 1) != 0) {
            const HeightConfig check = stabilize_bruteforce(n, grains, sc.seed);
            results["oracle_match"] = check == cfg;
        }

    } else if (sc.command == "avalanche") {
        CriticalSet a0;
        if (sc.params.find("a0") != sc.params.end()) {
            std::vector<Site> sites;
            for (long v : param_long_list(sc, "a0", "")) sites.push_back(v);
            a0 = CriticalSet(sites);
        } else {
            const long n = param_long(sc, "interval", 0);
            std::vector<Site> sites;
            for (Site i = -n; i <= n; ++i) sites.push_back(i);
            a0 = CriticalSet(sites);
        }
        const double horizon = param_double(sc, "horizon", kNoHorizon);
        const long max_events = param_long(sc, "max-events", -1);
        const Trajectory traj = simulate_avalanche_chain(a0, horizon, sc.seed, max_events);
        out.write(".jsonl", traj.to_jsonl());
        results["events"] = traj.events.size();
        results["initial_size"] = a0.size();
        results["final_size"] = a0.size() + traj.events.size();
        results["final"] = replay_upper(traj).to_text();

    } else if (sc.command == "couple") {
        const std::string kind = param_string(sc, "kind", "a");
        const long n = param_long(sc, "n", 0);
        const HeightConfig upper = param_config(sc, "upper", "0 0 ones 1");
        const HeightConfig lower = param_config(sc, "lower", "0 0 ones 1");
        const double horizon = param_double(sc, "horizon", 1.0);
        CoupledOutcome res;
        if (kind == "a") res = simulate_coupled_avalanche(upper, lower, horizon, sc.seed);
        else if (kind == "n") res = simulate_coupled_n(n, upper, lower, horizon, sc.seed);
        else res = simulate_coupled_n1_n(n, upper, lower, horizon, sc.seed);
        out.write(".jsonl", res.trajectory.to_jsonl());
        results["events"] = res.trajectory.events.size();
        results["order_violations"] = res.order_violations;
        results["final_upper"] = replay_upper(res.trajectory).to_text();
        results["final_lower"] = replay_lower(res.trajectory).to_text();

    } else if (sc.command == "fvsp") {
        const long n = param_long(sc, "n", 0);
        const HeightConfig eta = param_config(sc, "eta", truncate_to_ones(HeightConfig(0, {1}, Tail::AllOnes), n).to_text());
        const double horizon = param_double(sc, "horizon", 1.0);
        const Trajectory traj = simulate_fvsp_poisson(n, eta, horizon, sc.seed);
        out.write(".jsonl", traj.to_jsonl());
        results["events"] = traj.events.size();
        results["final"] = replay_upper(traj).to_text();

    } else if (sc.command == "exact") {
        const long n = param_long(sc, "n", 1);
        const std::string check = param_string(sc, "check", "all");
        const auto rec = recurrent_set(n);
        results["states"] = std::size_t{1} << (2 * n + 1);
        results["recurrent_states"] = rec.size();
        if (check == "all" || check == "stationary") {
            const Distribution pi = stationary_distribution(n);
            double dev = 0.0;
            std::vector<bool> is_rec(pi.weights.size(), false);
            for (std::size_t idx : rec) is_rec[idx] = true;
            const double uniform = 1.0 / static_cast<double>(rec.size());
            for (std::size_t s = 0; s < pi.weights.size(); ++s)
                dev = std::max(dev, std::abs(pi.weights[s] - (is_rec[s] ? uniform : 0.0)));
            results["stationary_uniform_weight"] = uniform;
            results["stationary_max_deviation"] = dev;
            out.write("_stationary.csv", distribution_csv(n, pi));
        }
        if (check == "all" || check == "reversibility") {
            Rng rng(sc.seed);
            const std::size_t m = std::size_t{1} << (2 * n + 1);
            double worst = 0.0;
            for (int rep = 0; rep < 100; ++rep) {
                std::vector<double> f(m), g(m);
                for (auto& v : f) v = rng.unit() * 2.0 - 1.0;
                for (auto& v : g) v = rng.unit() * 2.0 - 1.0;
                const auto [lhs, rhs] = check_reversibility(n, f, g);
                worst = std::max(worst, std::abs(lhs - rhs));
            }
            results["reversibility_max_deviation"] = worst;
        }
        if (check == "all" || check == "bijection") {
            const BijectionReport rep = check_unique_toppling_bijection(n);
            results["bijection_ok"] = rep.ok;
            results["bijection_pairs"] = rep.pairs_checked;
            results["pushforward_max_deviation"] = rep.max_pushforward_deviation;
        }
        if (check == "all" || check == "transient") {
            const double t = param_double(sc, "t", 0.5);
            const std::size_t s0 =
                static_cast<std::size_t>(param_long(sc, "s0", 0));
            const Distribution d = transient_distribution(n, s0, t);
            out.write("_transient.csv", distribution_csv(n, d));
            double mass = 0.0;
            for (double w : d.weights) mass += w;
            results["transient_t"] = t;
            results["transient_mass"] = mass;
        }
        out.write("_generator.csv", generator_csv(build_generator(n)));

    } else if (sc.command == "series") {
        const LocalFunction f = builtin_observable(param_string(sc, "f", "occ0"));
        const HeightConfig eta = param_config(sc, "eta", "0 0 ones 1");
        const double t = param_double(sc, "t", 0.02);
        const double tol = param_double(sc, "tol", 1e-8);
        SeriesOptions opts;
        opts.depth_cap = static_cast<int>(param_long(sc, "depth-cap", opts.depth_cap));
        const SeriesResult res = taylor_semigroup(f, eta, t, tol, opts);
        results["value"] = res.value;
        results["truncation_K"] = res.truncation_K;
        results["tail_bound"] = res.tail_bound;
        results["radius"] = res.radius;
        results["depth_limited"] = res.depth_limited;

    } else if (sc.command == "theorem51") {
        const double t = param_double(sc, "t", 14.0);
        const double delta = param_double(sc, "delta", 0.5);
        const long samples = param_long(sc, "samples", 10000);
        const std::vector<long> ns = param_long_list(sc, "n", "25,50,100");
        std::ostringstream csv;
        csv << "n,estimate,stderr,first_term,split_bound_delta\n";
        ordered_json rows = ordered_json::array();
        double prev = 1.0;
        bool nonincreasing = true;
        for (std::size_t i = 0; i < ns.size(); ++i) {
            const long n = ns[i];
            const EstimatorResult est =
                estimate_absorption(n, t, samples, derive_seed(sc.seed, i));
            const double first = 1.0 / static_cast<double>(2 * n + 1);
            const double bound =
                first + std::pow(1.0 - std::exp(-delta), static_cast<double>(2 * n + 1));
            csv << n << ',' << format_double(est.mean) << ',' << format_double(est.stderr_)
                << ',' << format_double(first) << ',' << format_double(bound) << '\n';
            ordered_json row = estimator_json(est);
            row["n"] = n;
            row["first_term"] = first;
            rows.push_back(row);
            if (i > 0 && est.mean > prev + 3.0 * est.stderr_) nonincreasing = false;
            prev = est.mean;
        }
        out.write(".csv", csv.str());
        results["t"] = t;
        results["rows"] = rows;
        results["nonincreasing"] = nonincreasing;

    } else if (sc.command == "prop51") {
        const long n = param_long(sc, "n", 5);
        const int k_max = static_cast<int>(param_long(sc, "k", 10));
        const long samples = param_long(sc, "samples", 100000);
        std::vector<Site> sites;
        for (Site i = -n; i <= n; ++i) sites.push_back(i);
        const HoleLawResult res = estimate_hole_law(CriticalSet(sites), k_max, samples, sc.seed);
        std::ostringstream csv;
        csv << "k,empirical,stderr,stated_formula,refill_recursion\n";
        double q = 1.0 / static_cast<double>(2 * n + 1);
        for (int k = 1; k <= k_max; ++k) {
            const double stated = 1.0 / static_cast<double>(2 * n + 1 + k - 1);
            csv << k << ',' << format_double(res.p_hat[static_cast<std::size_t>(k - 1)]) << ','
                << format_double(res.stderr_[static_cast<std::size_t>(k - 1)]) << ','
                << format_double(stated) << ',' << format_double(q) << '\n';
            q = (1.0 - q) / static_cast<double>(2 * n + 1 + k);
        }
        out.write(".csv", csv.str());
        results["samples"] = samples;
        results["structural_violations"] = res.structural_violations;

    } else if (sc.command == "discrete") {
        const long n = param_long(sc, "n", 2);
        const long steps = param_long(sc, "steps", 100);
        const HeightConfig eta = param_config(sc, "eta", "0 0 ones 1");
        const long samples = param_long(sc, "samples", 0);
        if (samples > 0) {
            const StateSpace space(n);
            std::vector<double> counts(space.size(), 0.0);
            for (long s = 0; s < samples; ++s) {
                const HeightConfig final =
                    discrete_time_fvsp(n, steps, eta, derive_seed(sc.seed, static_cast<std::uint64_t>(s)));
                counts[space.index_of(final)] += 1.0;
            }
            for (auto& c : counts) c /= static_cast<double>(samples);
            const Distribution emp{counts};
            results["tv_to_stationary"] = emp.total_variation(stationary_distribution(n));
            out.write("_law.csv", distribution_csv(n, emp));
        } else {
            results["final"] = discrete_time_fvsp(n, steps, eta, sc.seed).to_text();
        }
    } else {
        throw ParseError("unknown command '" + sc.command + "'");
    }
    return results;
}

}  // namespace

RunResult run_scenario(const Scenario& sc) {
    const auto start = std::chrono::steady_clock::now();
    const ValidationReport val = validate_scenario(sc);
    RunResult rr;
    if (!val.ok) {
        ordered_json err;
        err["version"] = kToolVersion;
        err["name"] = sc.name;
        err["command"] = sc.command;
        err["errors"] = val.errors;
        rr.exit_code = 2;
        rr.record = err.dump(2) + "\n";
        return rr;
    }

    Outputs out;
    out.dir = sc.output_path.empty() ? "." : sc.output_path;
    out.stem = sc.name.empty() ? sc.command : sc.name;

    ordered_json record;
    record["version"] = kToolVersion;
    record["name"] = out.stem;
    record["command"] = sc.command;
    record["scenario_hash"] = scenario_hash(sc);
    record["seed"] = sc.seed;
    ordered_json params;
    for (const auto& [k, v] : sc.params) params[k] = v;
    record["params"] = params;

    try {
        record["results"] = run_command(sc, out);
    } catch (const std::exception& e) {
        record["error"] = e.what();
        rr.exit_code = 1;
    }

    rr.record = record.dump(2) + "\n";
    out.write(".json", rr.record);
    rr.files_written = out.files;
    rr.wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
            .count();
    return rr;
}

}  // namespace sandlab
