#pragma once

#include "simcav/config.hpp"
#include "simcav/csv.hpp"
#include "simcav/observables.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace simcav {

struct ScenarioOutcome {
    std::string assertion;
    bool passed = false;
    std::string detail;
    nlohmann::json results = nlohmann::json::object();
    std::vector<std::string> files;
};

// Closed-form inversion for a uniform mode (mesa or zero) and one sector.
double uniform_mode_inversion(const SystemParams& sector_params, const ModeProfile& profile, Preparation prep,
                              double t);

// Detuning ratios Delta/lambda: 100 log-spaced magnitudes in [1e-3, 1e3] of each sign, plus 0.
std::vector<double> identity_detuning_ratios();

struct IdentityResiduals {
    double tan_relative = 0.0;
    double pythagorean = 0.0;
    double double_angle = 0.0;
    double eigen = 0.0;
    std::size_t points = 0;
};

// Residuals of the closed-form identities at f = 1 for every (ratio, n).
// `table`, when given, receives one row per point.
IdentityResiduals evaluate_identities(double coupling, const std::vector<double>& ratios, int max_n,
                                      Table* table = nullptr);

// Term-by-term description of the coupled dressed-amplitude equations the
// Crank-Nicolson integrator solves; written into basis-equivalence manifests.
nlohmann::json dressed_equation_notes();

// Max deviation from the first snapshot. The relative energy drift divides by
// |E(0)| (by 1 when E(0) vanishes).
struct ConservationStats {
    double norm_drift = 0.0;
    double energy_drift_absolute = 0.0;
    double energy_drift_relative = 0.0;
};
ConservationStats conservation(const ObservableSeries& series);

// Worker cap from SIMCAV_THREADS (hardware concurrency when unset).
// Throws ConfigError on a malformed value.
unsigned worker_threads_from_env();

ScenarioOutcome run_scenario(const RunConfig& config, const std::filesystem::path& out_dir, unsigned threads);

// Full CLI run: validate, execute, write CSVs and manifest.json into
// config.output. Returns 0 on success, 2 on validation failure, 3 on a
// numerical failure or a failed built-in assertion.
int run(const RunConfig& config, std::ostream& log, std::ostream& err);

}  // namespace simcav
