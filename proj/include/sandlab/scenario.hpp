#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace sandlab {

inline constexpr const char* kToolVersion = "0.1.0";

// A reproducible run description: one command, its parameters, a seed and an
// output directory. Identical scenarios produce byte-identical output files.
struct Scenario {
    std::string name;     // defaults to the command
    std::string command;  // stabilize|avalanche|couple|fvsp|exact|series|theorem51|prop51|discrete
    std::map<std::string, std::string> params;
    std::uint64_t seed = 0;
    std::string output_path = ".";
};

// Accepts either flat `key = value` lines (# comments allowed) or a JSON
// object {command, seed, name, out, params{...}}.
Scenario parse_scenario_text(const std::string& text);
Scenario load_scenario_file(const std::string& path);

// FNV-1a over the canonical key=value rendering; stamped into every record.
std::string scenario_hash(const Scenario& sc);

struct ValidationReport {
    bool ok = true;
    std::vector<std::string> errors;
    std::vector<std::string> warnings;
};

ValidationReport validate_scenario(const Scenario& sc);

struct RunResult {
    int exit_code = 0;
    std::string record;  // the canonical JSON result record
    std::vector<std::string> files_written;
    double wall_ms = 0.0;  // reported on stdout by the CLI, never in files
};

// Executes the scenario, writes `<out>/<name>.json` plus any command-specific
// CSV or JSONL side files, and returns the record.
RunResult run_scenario(const Scenario& sc);

}  // namespace sandlab
