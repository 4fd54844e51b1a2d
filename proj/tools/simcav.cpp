#include "simcav/config.hpp"
#include "simcav/scenarios.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>

namespace {

int run_command(const std::string& path, const std::string& output_override) {
    std::optional<simcav::RunConfig> config;
    try {
        config = simcav::load_config(path);
    } catch (const simcav::Error& e) {
        std::cerr << "invalid config " << path << ": " << e.what() << '\n';
        return 2;
    }
    if (!output_override.empty()) {
        config->output = output_override;
        config->echo["output"] = output_override;
    }
    return simcav::run(*config, std::cout, std::cerr);
}

int validate_command(const std::string& path) {
    try {
        const simcav::RunConfig config = simcav::load_config(path);
        simcav::validate_config(config);
        std::cout << path << ": ok (" << simcav::to_string(config.scenario) << ", " << config.grid.n_points()
                  << " points, " << config.grid.n_steps() << " steps, dt " << config.grid.dt() << ")\n";
        return 0;
    } catch (const simcav::Error& e) {
        std::cerr << "invalid config " << path << ": " << e.what() << '\n';
        return 2;
    }
}

int scenarios_command() {
    for (const auto s : simcav::all_scenarios()) {
        std::cout << simcav::to_string(s) << "\t" << simcav::describe(s) << '\n';
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"simcav: atom-cavity wave-packet scenarios"};
    app.set_version_flag("--version", std::string(SIMCAV_VERSION));
    app.require_subcommand(1);

    std::string config_path;
    std::string output;
    auto* run = app.add_subcommand("run", "Run a scenario and write CSV files and manifest.json");
    run->add_option("config", config_path, "Config JSON file")->required();
    run->add_option("-o,--output", output, "Override the output directory");

    std::string validate_path;
    auto* validate = app.add_subcommand("validate", "Check a config without running it");
    validate->add_option("config", validate_path, "Config JSON file")->required();

    auto* list = app.add_subcommand("scenarios", "List the available scenarios");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    if (*run) return run_command(config_path, output);
    if (*validate) return validate_command(validate_path);
    if (*list) return scenarios_command();
    return 2;
}
