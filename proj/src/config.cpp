#include "simcav/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace simcav {

using nlohmann::json;

ConfigError::ConfigError(std::string field, const std::string& message)
    : InvalidArgument("config field '" + field + "': " + message), field_(std::move(field)) {}

namespace {

const std::vector<std::pair<Scenario, std::string_view>>& scenario_names() {
    static const std::vector<std::pair<Scenario, std::string_view>> names{
        {Scenario::Identities, "identities"},
        {Scenario::Rabi, "rabi"},
        {Scenario::Decoupling, "decoupling"},
        {Scenario::Scattering, "scattering"},
        {Scenario::AdiabaticSweep, "adiabatic-sweep"},
        {Scenario::BasisEquivalence, "basis-equivalence"},
    };
    return names;
}

const std::set<std::string>& known_keys() {
    static const std::set<std::string> keys{
        "scenario",       "output",         "mass",          "detuning",          "field-freq",
        "coupling",       "photon-n",       "profile",       "z-on",              "z-off",
        "width",          "half-periods",   "z-min",         "z-max",             "n-points",
        "dt",             "n-steps",        "z0",            "sigma-z",           "p0",
        "internal",       "sector-weights", "coherent-mean", "coherent-truncation", "snapshot-stride",
        "interaction-picture", "sweep-param", "sweep-values", "travel-distance",  "cleared-threshold",
        "tolerance",
    };
    return keys;
}

double number(const json& doc, const char* key) {
    if (!doc.contains(key)) throw ConfigError(key, "required field is missing");
    const json& v = doc.at(key);
    if (!v.is_number()) throw ConfigError(key, "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ConfigError(key, "must be finite");
    return d;
}

double number_or(const json& doc, const char* key, double fallback) {
    return doc.contains(key) ? number(doc, key) : fallback;
}

long long integer_or(const json& doc, const char* key, long long fallback) {
    if (!doc.contains(key)) return fallback;
    const json& v = doc.at(key);
    if (!v.is_number_integer()) throw ConfigError(key, "expected an integer");
    return v.get<long long>();
}

std::string string_or(const json& doc, const char* key, const std::string& fallback) {
    if (!doc.contains(key)) return fallback;
    const json& v = doc.at(key);
    if (!v.is_string()) throw ConfigError(key, "expected a string");
    return v.get<std::string>();
}

bool bool_or(const json& doc, const char* key, bool fallback) {
    if (!doc.contains(key)) return fallback;
    const json& v = doc.at(key);
    if (!v.is_boolean()) throw ConfigError(key, "expected true or false");
    return v.get<bool>();
}

// Re-tag library validation errors with the config key they came from.
template <class F>
auto tagged(const char* key, F&& make) {
    try {
        return make();
    } catch (const ConfigError&) {
        throw;
    } catch (const InvalidArgument& e) {
        throw ConfigError(key, e.what());
    }
}

std::size_t line_of(std::string_view text, std::size_t byte) {
    byte = std::min(byte, text.size());
    return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<long>(byte), '\n'));
}

}  // namespace

std::string_view to_string(Scenario scenario) noexcept {
    for (const auto& [s, name] : scenario_names()) {
        if (s == scenario) return name;
    }
    return "unknown";
}

Scenario scenario_from_string(std::string_view name) {
    for (const auto& [s, n] : scenario_names()) {
        if (n == name) return s;
    }
    throw ConfigError("scenario", "unknown scenario '" + std::string(name) + "'");
}

std::string_view describe(Scenario scenario) noexcept {
    switch (scenario) {
        case Scenario::Identities:
            return "closed-form tan/double-angle/eigenpair identities over a (detuning, n) grid";
        case Scenario::Rabi:
            return "bare-basis run with inversion compared to the detuned Rabi formula";
        case Scenario::Decoupling:
            return "dressed-branch cross population in both integrators (zero for a uniform mode)";
        case Scenario::Scattering:
            return "packet traversal with final reflection/transmission probabilities";
        case Scenario::AdiabaticSweep:
            return "nonadiabatic branch transfer across a swept parameter";
        case Scenario::BasisEquivalence:
            return "dressed Crank-Nicolson run checked against the bare split-operator run";
    }
    return "";
}

const std::vector<Scenario>& all_scenarios() {
    static const std::vector<Scenario> all = [] {
        std::vector<Scenario> v;
        for (const auto& [s, name] : scenario_names()) v.push_back(s);
        return v;
    }();
    return all;
}

const std::vector<std::string>& sweepable_fields() {
    static const std::vector<std::string> fields{"mass", "detuning", "field-freq", "coupling",
                                                 "p0",   "z0",       "sigma-z",    "width"};
    return fields;
}

RunConfig parse_config(const json& doc) {
    if (!doc.is_object()) throw ConfigError("<json>", "top level must be an object");
    for (const auto& [key, value] : doc.items()) {
        if (!known_keys().contains(key)) throw ConfigError(key, "unknown key");
    }

    if (!doc.contains("scenario")) throw ConfigError("scenario", "required field is missing");
    const Scenario scenario = scenario_from_string(string_or(doc, "scenario", ""));

    const double mass = number(doc, "mass");
    const double detuning = number(doc, "detuning");
    const double coupling = number(doc, "coupling");
    const double field_freq = number_or(doc, "field-freq", 0.0);
    const long long photon_n = integer_or(doc, "photon-n", 0);
    if (mass <= 0.0) throw ConfigError("mass", "must be > 0");
    if (coupling <= 0.0) throw ConfigError("coupling", "must be > 0");
    if (field_freq < 0.0) throw ConfigError("field-freq", "must be >= 0");
    if (photon_n < 0 || photon_n > 1000000) throw ConfigError("photon-n", "must be in [0, 1e6]");
    SystemParams params(mass, detuning, field_freq, coupling, static_cast<int>(photon_n));

    const std::string profile_name = string_or(doc, "profile", "mesa");
    const ProfileKind kind = tagged("profile", [&] { return profile_kind_from_string(profile_name); });
    std::optional<ModeProfile> profile;
    double z_on = 0.0;
    double z_off = 0.0;
    double width = 0.0;
    long long half_periods = 1;
    if (kind == ProfileKind::Mesa) {
        if (doc.contains("z-on") || doc.contains("z-off")) {
            z_on = number(doc, "z-on");
            z_off = number(doc, "z-off");
            profile = tagged("z-on", [&] { return ModeProfile::mesa(z_on, z_off); });
        } else {
            profile = ModeProfile::mesa();
        }
    } else {
        z_on = number(doc, "z-on");
        z_off = number(doc, "z-off");
        if (kind == ProfileKind::Zero) {
            profile = tagged("z-on", [&] { return ModeProfile::zero(z_on, z_off); });
        } else if (kind == ProfileKind::SineSquared) {
            half_periods = integer_or(doc, "half-periods", 1);
            if (half_periods < 1 || half_periods > 100000) throw ConfigError("half-periods", "must be >= 1");
            profile = tagged("z-on", [&] {
                return ModeProfile::sine_squared(z_on, z_off, static_cast<int>(half_periods));
            });
        } else {
            width = number(doc, "width");
            if (width <= 0.0) throw ConfigError("width", "must be > 0");
            profile = tagged("z-on", [&] { return ModeProfile::gaussian(z_on, z_off, width); });
        }
    }

    InitialCondition initial;
    initial.z0 = number_or(doc, "z0", 0.0);
    initial.sigma_z = number_or(doc, "sigma-z", 1.0);
    initial.p0 = number_or(doc, "p0", 0.0);
    if (initial.sigma_z <= 0.0) throw ConfigError("sigma-z", "must be > 0");
    initial.preparation = tagged("internal", [&] {
        return preparation_from_string(string_or(doc, "internal", "bare-excited"));
    });
    if (doc.contains("sector-weights") && doc.contains("coherent-mean")) {
        throw ConfigError("sector-weights", "give either sector-weights or coherent-mean, not both");
    }
    if (doc.contains("sector-weights")) {
        const json& w = doc.at("sector-weights");
        if (!w.is_array() || w.empty()) throw ConfigError("sector-weights", "expected a non-empty list of [n, weight]");
        for (const auto& entry : w) {
            if (!entry.is_array() || entry.size() != 2 || !entry[0].is_number_integer() || !entry[1].is_number()) {
                throw ConfigError("sector-weights", "each entry must be [integer n, weight]");
            }
            initial.sectors.push_back({entry[0].get<int>(), entry[1].get<double>()});
        }
    } else if (doc.contains("coherent-mean")) {
        const double mean = number(doc, "coherent-mean");
        const long long trunc = integer_or(doc, "coherent-truncation", 24);
        if (trunc < 1 || trunc > 100000) throw ConfigError("coherent-truncation", "must be >= 1");
        initial.sectors = tagged("coherent-mean", [&] {
            return coherent_sector_weights(mean, static_cast<int>(trunc));
        });
    }

    const double z_min = number_or(doc, "z-min", -50.0);
    const double z_max = number_or(doc, "z-max", 50.0);
    const long long n_points = integer_or(doc, "n-points", 1024);
    const long long n_steps = integer_or(doc, "n-steps", 1000);
    if (n_points < 0) throw ConfigError("n-points", "must be a power of two >= 64");
    if (n_steps < 0) throw ConfigError("n-steps", "must be >= 0");
    const double dt = doc.contains("dt") ? number(doc, "dt") : recommended_time_step(params, initial);
    if (dt <= 0.0) throw ConfigError("dt", "must be > 0");
    Grid grid = tagged("n-points", [&] {
        return Grid(z_min, z_max, static_cast<std::size_t>(n_points), dt, static_cast<std::size_t>(n_steps));
    });

    const long long stride = integer_or(doc, "snapshot-stride", 1);
    if (stride < 1) throw ConfigError("snapshot-stride", "must be >= 1");

    std::optional<SweepAxis> sweep;
    if (doc.contains("sweep-param") || doc.contains("sweep-values")) {
        SweepAxis axis;
        axis.param = string_or(doc, "sweep-param", "");
        const auto& fields = sweepable_fields();
        if (std::find(fields.begin(), fields.end(), axis.param) == fields.end()) {
            throw ConfigError("sweep-param", "'" + axis.param + "' is not a sweepable scalar field");
        }
        if (!doc.contains("sweep-values")) throw ConfigError("sweep-values", "required with sweep-param");
        const json& values = doc.at("sweep-values");
        if (!values.is_array() || values.empty()) throw ConfigError("sweep-values", "expected a non-empty number list");
        for (const auto& v : values) {
            if (!v.is_number() || !std::isfinite(v.get<double>())) {
                throw ConfigError("sweep-values", "expected finite numbers");
            }
            axis.values.push_back(v.get<double>());
        }
        sweep = std::move(axis);
    }
    if (scenario == Scenario::AdiabaticSweep && !sweep) {
        throw ConfigError("sweep-param", "adiabatic-sweep needs sweep-param and sweep-values");
    }

    const double travel = number_or(doc, "travel-distance", 0.0);
    if (travel < 0.0) throw ConfigError("travel-distance", "must be >= 0");
    const double cleared = number_or(doc, "cleared-threshold", 0.01);
    if (cleared <= 0.0 || cleared >= 1.0) throw ConfigError("cleared-threshold", "must be in (0, 1)");
    const double tolerance = number_or(doc, "tolerance", 1e-6);
    if (tolerance <= 0.0) throw ConfigError("tolerance", "must be > 0");

    RunConfig cfg{scenario, params, *profile, grid, initial, string_or(doc, "output", "simcav-out"),
                  static_cast<std::size_t>(stride), bool_or(doc, "interaction-picture", false), sweep, travel,
                  cleared, tolerance, json::object()};

    json& echo = cfg.echo;
    echo["scenario"] = std::string(to_string(scenario));
    echo["output"] = cfg.output.string();
    echo["mass"] = mass;
    echo["detuning"] = detuning;
    echo["field-freq"] = field_freq;
    echo["coupling"] = coupling;
    echo["photon-n"] = photon_n;
    echo["profile"] = std::string(to_string(kind));
    if (std::isfinite(cfg.profile.z_on())) {
        echo["z-on"] = cfg.profile.z_on();
        echo["z-off"] = cfg.profile.z_off();
    }
    if (kind == ProfileKind::Gaussian) echo["width"] = width;
    if (kind == ProfileKind::SineSquared) echo["half-periods"] = half_periods;
    echo["z-min"] = z_min;
    echo["z-max"] = z_max;
    echo["n-points"] = n_points;
    echo["dt"] = dt;
    echo["n-steps"] = n_steps;
    echo["z0"] = initial.z0;
    echo["sigma-z"] = initial.sigma_z;
    echo["p0"] = initial.p0;
    echo["internal"] = std::string(to_string(initial.preparation));
    if (!initial.sectors.empty()) {
        json w = json::array();
        for (const auto& s : initial.sectors) w.push_back(json::array({s.photon_n, s.weight}));
        echo["sector-weights"] = w;
    }
    echo["snapshot-stride"] = stride;
    echo["interaction-picture"] = cfg.interaction_picture;
    if (sweep) {
        echo["sweep-param"] = sweep->param;
        echo["sweep-values"] = sweep->values;
    }
    if (travel > 0.0) echo["travel-distance"] = travel;
    echo["cleared-threshold"] = cleared;
    echo["tolerance"] = tolerance;
    return cfg;
}

RunConfig parse_config_text(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError("<json>", "syntax error at line " + std::to_string(line_of(text, e.byte)) + ": " + e.what());
    }
    return parse_config(doc);
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("<file>", "cannot read " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

RunConfig with_field(const RunConfig& config, const std::string& field, double value) {
    const auto& fields = sweepable_fields();
    if (std::find(fields.begin(), fields.end(), field) == fields.end()) {
        throw ConfigError(field, "not a sweepable scalar field");
    }
    json doc = config.echo;
    doc[field] = value;
    // A derived dt would silently change with the swept field; keep the parsed one.
    doc["dt"] = config.grid.dt();
    return parse_config(doc);
}

void validate_config(const RunConfig& config) {
    tagged("z0", [&] {
        config.initial.validate(config.grid);
        return 0;
    });
    check_resolution(config.initial, config.grid);

    const bool needs_frame = config.scenario == Scenario::Decoupling ||
                             config.scenario == Scenario::BasisEquivalence ||
                             config.scenario == Scenario::AdiabaticSweep ||
                             config.initial.preparation == Preparation::DressedPlus ||
                             config.initial.preparation == Preparation::DressedMinus;
    if (config.scenario == Scenario::Identities || !needs_frame) return;

    for (const auto& sector : run_sectors(config.initial, config.params)) {
        const DressedFrame frame(config.params.with_photon_n(sector.photon_n), config.profile);
        for (std::size_t i = 0; i < config.grid.n_points(); ++i) frame.theta(config.grid.z(i));
    }
    if ((config.scenario == Scenario::Decoupling || config.scenario == Scenario::AdiabaticSweep) &&
        config.initial.preparation != Preparation::DressedPlus &&
        config.initial.preparation != Preparation::DressedMinus) {
        throw ConfigError("internal", "this scenario needs a dressed-plus or dressed-minus preparation");
    }
}

}  // namespace simcav
