#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include <json.hpp>

namespace fbmctrl::cli {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// One batch scenario. Parses from flat "key = value" text (with '#'
// comments) or from an equivalent JSON object; both forms reach the same
// canonical state, so the config hash is format-independent.
struct ScenarioConfig {
    std::string scenario;  // fbm-stats | isometry | consumption | lq | verify
    double h = 0.75;
    double t_end = 1.0;
    double delta = 0.4;
    int n_steps_per_delay = 4;
    long n_paths = 20000;
    std::uint64_t seed = 1;

    double xi1 = 1.0;
    double x0 = 1.0;
    std::string beta = "const:0";    // consumption diffusion
    std::string beta1 = "const:0.5"; // LQ delayed drift gain
    std::string beta2 = "const:1";   // LQ diffusion
    double picard_damping = 0.5;
    double picard_tol = 1e-3;
    int picard_max_iter = 25;
    int lsmc_degree = 2;
    double lsmc_ridge = 1e-8;
    int dump_paths = 0;  // fbm-stats: number of paths to dump (0 = none)

    static ScenarioConfig parse_file(const std::string& path);
    static ScenarioConfig parse_text(const std::string& text);
    static ScenarioConfig parse_json(const nlohmann::json& j);

    void validate() const;          // throws ConfigError
    int n_steps() const;            // derived from delta / n_steps_per_delay
    std::string canonical() const;  // canonical key=value form
    std::uint64_t hash() const;     // FNV-1a over canonical()
};

// Runs one scenario, writing its outputs under out_dir. Returns 0 when all
// internal gates pass, 1 otherwise; numerical failures propagate as
// exceptions. Prints one PASS/FAIL line per gate unless quiet.
int run_scenario(const ScenarioConfig& cfg, const std::string& out_dir, bool quiet);

}  // namespace fbmctrl::cli
