#include <CLI11.hpp>

#include <cstdint>
#include <iostream>

#include "fbmctrl/scenario.hpp"
#include "fbmctrl/version.hpp"

int main(int argc, char** argv) {
    CLI::App app{"fbmctrl: mean-field delayed stochastic control driven by fractional "
                 "Brownian motion"};
    app.set_version_flag("--version", FBMCTRL_VERSION);

    std::string config_path;
    std::string out_dir = "out";
    std::uint64_t seed_override = 0;
    bool has_seed = false;
    bool quiet = false;

    CLI::App* run = app.add_subcommand("run", "run one scenario from a config file");
    run->add_option("config", config_path, "config file (key = value text, or JSON)")
        ->required();
    run->add_option("--out", out_dir, "output directory");
    run->add_option("--seed", seed_override, "override the config seed")
        ->each([&](const std::string&) { has_seed = true; });
    run->add_flag("--quiet", quiet, "suppress per-gate output");
    app.require_subcommand(1);

    CLI11_PARSE(app, argc, argv);

    try {
        fbmctrl::cli::ScenarioConfig cfg = fbmctrl::cli::ScenarioConfig::parse_file(config_path);
        if (has_seed) cfg.seed = seed_override;
        cfg.validate();
        return fbmctrl::cli::run_scenario(cfg, out_dir, quiet);
    } catch (const fbmctrl::cli::ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return 3;
    }
}
