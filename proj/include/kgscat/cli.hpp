#pragma once

#include "kgscat/dynamics.hpp"
#include "kgscat/graf.hpp"
#include "kgscat/profiles.hpp"

#include <nlohmann/json.hpp>
#include <yaml-cpp/yaml.h>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace kgscat {

// Scenario problems; the message starts with the dotted key that is wrong.
struct ValidationError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

enum ExitCode { exit_ok = 0, exit_validation = 2, exit_guard = 3, exit_nonconvergence = 4 };

struct PacketSpec {
    double p_center = 0.0;
    double p_width = 0.3;
    double x0 = 0.0;
};

struct IntervalSpec {
    double lo = 0.0, hi = 1.0, transition = 0.05;
    Cutoff cutoff() const { return Cutoff::interval(lo, hi, transition); }
};

struct Scenario {
    int d = 1;
    int n = 256;
    double L = 200.0;
    double m = 1.0;
    std::vector<PacketSpec> packets;

    std::string source = "none";  // none | gaussian
    double lambda = 0.0;
    double sigma = 0.5;

    IntervalSpec h1{0.075, 1.5, 0.05};
    IntervalSpec h2{-1.5, -0.075, 0.05};

    // K = pieces minus the diagonal tube
    double region_r_in = 1.0, region_r_out = 2.0, region_tube = 0.5, region_delta = 0.05;

    RadiusDefaults graf_radii;
    double graf_cells = 4.0;
    int graf_v_refinement = 8;
    int graf_table_stride = 8;

    EvolutionConfig evolution;

    std::vector<std::string> diagnostics;
    double lv_r = 1.6, lv_rp = 3.0, lv_eps = 0.3;
    double tail_tol = 0.05;
    double a3_tol = 1e-2;
    int ensemble_draws = 20;
    double ensemble_T = 100.0;

    double limits_tol = 1e-2;
    double cook_tail_threshold = 3e-2;

    std::string output_dir = "run";
    std::uint64_t seed = 1;

    std::vector<std::string> warnings;  // consistency notes found at load, not echoed

    RegionSpec region() const;
    SourceModel source_model() const;
};

// KEY=VALUE with a dotted key; VALUE is parsed as YAML.
void apply_override(YAML::Node root, const std::string& assignment);
Scenario scenario_from_yaml(const YAML::Node& root);
// Reads a scenario file, or the scenario echo inside a run manifest.
Scenario load_scenario(const std::filesystem::path& path, const std::vector<std::string>& overrides = {});
nlohmann::json scenario_to_json(const Scenario& s);

ComplexField2P initial_state(const Scenario& s);

struct RunContext {
    std::filesystem::path out;
    int jobs = 1;
    std::ostream* log = nullptr;
};

int cmd_simulate(const Scenario& s, const RunContext& ctx);
int cmd_graf_check(const Scenario& s, const RunContext& ctx);
int cmd_limits(const Scenario& s, const RunContext& ctx);
int cmd_estimates(const Scenario& s, const RunContext& ctx);

std::string code_version();

}  // namespace kgscat
