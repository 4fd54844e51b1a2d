#pragma once

#include "simcav/core_model.hpp"
#include "simcav/errors.hpp"
#include "simcav/propagator.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace simcav {

// Config rejected; `field()` names the offending key ("<json>" for syntax errors).
class ConfigError : public InvalidArgument {
public:
    ConfigError(std::string field, const std::string& message);
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

enum class Scenario { Identities, Rabi, Decoupling, Scattering, AdiabaticSweep, BasisEquivalence };

std::string_view to_string(Scenario scenario) noexcept;
Scenario scenario_from_string(std::string_view name);
std::string_view describe(Scenario scenario) noexcept;
const std::vector<Scenario>& all_scenarios();

struct SweepAxis {
    std::string param;
    std::vector<double> values;
};

// Scalar fields a sweep axis may reference.
const std::vector<std::string>& sweepable_fields();

struct RunConfig {
    Scenario scenario;
    SystemParams params;
    ModeProfile profile;
    Grid grid;
    InitialCondition initial;
    std::filesystem::path output;
    std::size_t snapshot_stride = 1;
    bool interaction_picture = false;
    std::optional<SweepAxis> sweep;
    // Sweep points run for travel_distance * M / |p0| when > 0, else grid.n_steps().
    double travel_distance = 0.0;
    double cleared_threshold = 0.01;
    double tolerance = 1e-6;
    // Normalized echo of the parsed document (every key, defaults filled in).
    nlohmann::json echo;
};

// Flat JSON with kebab-case keys. Unknown keys, missing required keys
// (scenario, mass, detuning, coupling) and type errors raise ConfigError.
RunConfig parse_config(const nlohmann::json& document);
RunConfig parse_config_text(std::string_view text);
RunConfig load_config(const std::filesystem::path& path);

// Rebuild the config with one scalar field replaced (used by sweeps).
RunConfig with_field(const RunConfig& config, const std::string& field, double value);

// Cross-field checks that need no time stepping: packet placement, grid
// resolution, sector weights, dressed-frame definability where the scenario
// needs one. Throws ConfigError / GridTooCoarse / DegenerateFrame.
void validate_config(const RunConfig& config);

}  // namespace simcav
