#include "simcav/config.hpp"
#include "simcav/csv.hpp"
#include "simcav/scenarios.hpp"

#include <catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

using namespace simcav;
using nlohmann::json;

namespace {

std::filesystem::path scratch_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / ("simcav-test-" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json base_config() {
    return {{"scenario", "rabi"}, {"mass", 1e6},      {"detuning", 1.0}, {"coupling", 1.0},
            {"n-points", 128},    {"z-min", -20.0},   {"z-max", 20.0},   {"dt", 0.01},
            {"n-steps", 100},     {"snapshot-stride", 10}};
}

}  // namespace

TEST_CASE("config: required fields are named") {
    for (const char* key : {"mass", "detuning", "coupling", "scenario"}) {
        json doc = base_config();
        doc.erase(key);
        try {
            parse_config(doc);
            FAIL("expected ConfigError");
        } catch (const ConfigError& e) {
            CHECK(e.field() == key);
            CHECK(std::string(e.what()).find(key) != std::string::npos);
        }
    }
}

TEST_CASE("config: unknown keys, bad types and bad values are rejected") {
    json doc = base_config();
    doc["mas"] = 1.0;
    CHECK_THROWS_AS(parse_config(doc), ConfigError);

    doc = base_config();
    doc["mass"] = "heavy";
    CHECK_THROWS_AS(parse_config(doc), ConfigError);

    doc = base_config();
    doc["scenario"] = "teleport";
    CHECK_THROWS_AS(parse_config(doc), ConfigError);

    doc = base_config();
    doc["profile"] = "box";
    CHECK_THROWS_AS(parse_config(doc), ConfigError);

    doc = base_config();
    doc["n-points"] = 100;
    CHECK_THROWS_AS(parse_config(doc), ConfigError);

    doc = base_config();
    doc["sweep-param"] = "photon-n";
    doc["sweep-values"] = {1, 2};
    CHECK_THROWS_AS(parse_config(doc), ConfigError);
}

TEST_CASE("config: syntax errors carry a line number") {
    try {
        parse_config_text("{\n  \"scenario\": \"rabi\",\n  \"mass\": ,\n}");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
}

TEST_CASE("config: defaults, echo and profile construction") {
    json doc = base_config();
    doc["profile"] = "gaussian";
    doc["z-on"] = -4.0;
    doc["z-off"] = 4.0;
    doc["width"] = 1.5;
    doc.erase("dt");
    const RunConfig c = parse_config(doc);
    CHECK(c.scenario == Scenario::Rabi);
    CHECK(c.profile.kind() == ProfileKind::Gaussian);
    CHECK(c.profile.width() == 1.5);
    CHECK(c.grid.dt() == recommended_time_step(c.params, c.initial));
    CHECK(c.echo.at("dt").get<double>() == c.grid.dt());
    CHECK(c.echo.at("internal") == "bare-excited");
    const RunConfig again = parse_config(c.echo);
    CHECK(again.echo == c.echo);
}

TEST_CASE("config: coherent sector weights") {
    json doc = base_config();
    doc["coherent-mean"] = 4.0;
    doc["coherent-truncation"] = 10;
    const RunConfig c = parse_config(doc);
    CHECK(c.initial.sectors.size() == 10);

    doc = base_config();
    doc["sector-weights"] = {{0, 0.25}, {3, 0.75}};
    const RunConfig d = parse_config(doc);
    REQUIRE(d.initial.sectors.size() == 2);
    CHECK(d.initial.sectors[1].photon_n == 3);
}

TEST_CASE("config: sweep field replacement") {
    json doc = base_config();
    doc["scenario"] = "adiabatic-sweep";
    doc["internal"] = "dressed-plus";
    doc["sweep-param"] = "p0";
    doc["sweep-values"] = {2.0, 1.0};
    const RunConfig c = parse_config(doc);
    REQUIRE(c.sweep.has_value());
    const RunConfig point = with_field(c, "p0", 1.0);
    CHECK(point.initial.p0 == 1.0);
    CHECK(point.grid.dt() == c.grid.dt());
    CHECK_THROWS_AS(with_field(c, "photon-n", 1.0), ConfigError);
}

TEST_CASE("config validation") {
    json doc = base_config();
    doc["z0"] = -15.0;
    CHECK_THROWS_AS(validate_config(parse_config(doc)), InvalidArgument);

    doc = base_config();
    doc["p0"] = 20.0;
    doc["mass"] = 1.0;
    CHECK_THROWS_AS(validate_config(parse_config(doc)), GridTooCoarse);

    doc = base_config();
    doc["scenario"] = "decoupling";
    CHECK_THROWS_AS(validate_config(parse_config(doc)), ConfigError);
    doc["internal"] = "dressed-plus";
    CHECK_NOTHROW(validate_config(parse_config(doc)));
}

TEST_CASE("csv: shortest round-trip formatting") {
    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(1.0) == "1");
    CHECK(format_double(-2.5e-12) == "-2.5e-12");
    CHECK(format_double(std::numeric_limits<double>::quiet_NaN()) == "nan");
    CHECK(format_double(-std::numeric_limits<double>::infinity()) == "-inf");
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(-1e3, 1e3);
    for (int i = 0; i < 1000; ++i) {
        const double x = u(rng) * std::pow(10.0, static_cast<int>(rng() % 40) - 20);
        CHECK(std::stod(format_double(x)) == x);
    }
}

TEST_CASE("csv: header, row count and exact round trip") {
    const auto dir = scratch_dir("csv");
    ObservableSeries one;
    for (auto* v : {&one.times, &one.norm, &one.inversion, &one.pop_plus, &one.pop_minus, &one.mean_z, &one.mean_p,
                    &one.reflect, &one.transmit, &one.inside, &one.energy}) {
        v->push_back(0.125);
    }
    emit_csv(one, dir / "one.csv");
    const std::string text = slurp(dir / "one.csv");
    CHECK(text == std::string(kSeriesHeader) + "\n0.125,0.125,0.125,0.125,0.125,0.125,0.125,0.125,0.125\n");
    CHECK(text.find('\r') == std::string::npos);

    CHECK_THROWS_AS(emit_csv(ObservableSeries{}, dir / "empty.csv"), InvalidArgument);
    try {
        emit_csv(one, dir / "missing" / "x.csv");
        FAIL("expected IoError");
    } catch (const IoError& e) {
        CHECK(std::string(e.what()).find("missing") != std::string::npos);
    }

    const Grid g(-20, 20, 128, 0.01, 100);
    EvolveOptions o;
    o.stride = 10;
    const auto series = record_series(InitialCondition{}, SystemParams(1e6, 0.5, 0.0, 1.0, 1), ModeProfile::mesa(),
                                      g, BasisMode::Bare, o);
    emit_csv(series, dir / "rabi.csv");
    const auto back = read_series_csv(dir / "rabi.csv");
    REQUIRE(back.size() == 11);
    CHECK(back.times == series.times);
    CHECK(back.norm == series.norm);
    CHECK(back.inversion == series.inversion);
    CHECK(back.pop_plus == series.pop_plus);
    CHECK(back.pop_minus == series.pop_minus);
    CHECK(back.mean_z == series.mean_z);
    CHECK(back.mean_p == series.mean_p);
    CHECK(back.reflect == series.reflect);
    CHECK(back.transmit == series.transmit);
}

TEST_CASE("identity evaluation over the default grid") {
    const auto ratios = identity_detuning_ratios();
    CHECK(ratios.size() == 201);
    CHECK(ratios[100] == 0.0);
    CHECK(ratios.front() == -1e3);
    CHECK(ratios.back() == 1e3);
    const auto r = evaluate_identities(1.0, ratios, 50);
    CHECK(r.points == 201 * 51);
    CHECK(r.tan_relative <= 1e-12);
    CHECK(r.pythagorean <= 1e-14);
    CHECK(r.double_angle <= 1e-12);
    CHECK(r.eigen <= 1e-12);
}

TEST_CASE("uniform mode closed form") {
    const SystemParams p(1e6, 1.0, 0.0, 1.0, 3);
    const double r = std::sqrt(0.25 + 4.0);
    const double t = 0.7;
    const double s = std::sin(r * t);
    CHECK_THAT(uniform_mode_inversion(p, ModeProfile::mesa(), Preparation::BareExcited, t),
               Catch::Matchers::WithinAbs(1 - 2 * 4.0 / (r * r) * s * s, 1e-15));
    CHECK_THROWS_AS(uniform_mode_inversion(p, ModeProfile::gaussian(-1, 1, 1), Preparation::BareExcited, t),
                    InvalidArgument);
}

TEST_CASE("conservation statistics") {
    ObservableSeries s;
    s.times = {0, 1, 2};
    s.norm = {1.0, 1.0 + 2e-12, 1.0 - 1e-12};
    s.energy = {2.0, 2.0 + 1e-9, 2.0 - 4e-9};
    const auto c = conservation(s);
    CHECK_THAT(c.norm_drift, Catch::Matchers::WithinRel(2e-12, 1e-3));
    CHECK_THAT(c.energy_drift_relative, Catch::Matchers::WithinRel(2e-9, 1e-3));
}

TEST_CASE("run: manifest and byte-identical outputs") {
    json doc = base_config();
    const auto dir_a = scratch_dir("run-a");
    const auto dir_b = scratch_dir("run-b");
    doc["output"] = dir_a.string();
    RunConfig a = parse_config(doc);
    doc["output"] = dir_b.string();
    RunConfig b = parse_config(doc);
    b.echo["output"] = a.echo["output"];

    std::ostringstream log, err;
    REQUIRE(run(a, log, err) == 0);
    REQUIRE(run(b, log, err) == 0);
    CHECK(slurp(dir_a / "series.csv") == slurp(dir_b / "series.csv"));

    json ma = json::parse(slurp(dir_a / "manifest.json"));
    json mb = json::parse(slurp(dir_b / "manifest.json"));
    CHECK(ma.at("assertion").at("passed") == true);
    CHECK(ma.at("code-version") == SIMCAV_VERSION);
    CHECK(ma.at("wall-time-s").is_number());
    CHECK(ma.at("config").at("mass") == 1e6);
    ma.erase("wall-time-s");
    mb.erase("wall-time-s");
    CHECK(ma.dump() == mb.dump());
}

TEST_CASE("run: exit codes") {
    std::ostringstream log, err;
    json doc = base_config();
    doc["output"] = scratch_dir("run-bad").string();
    doc["z0"] = -15.0;
    CHECK(run(parse_config(doc), log, err) == 2);

    doc = base_config();
    doc["scenario"] = "scattering";
    doc["output"] = scratch_dir("run-mesa").string();
    CHECK(run(parse_config(doc), log, err) == 2);
    CHECK(err.str().find("profile") != std::string::npos);

    // Packet still inside the interaction region at the end.
    doc = base_config();
    doc["scenario"] = "scattering";
    doc["profile"] = "gaussian";
    doc["z-on"] = -3.0;
    doc["z-off"] = 3.0;
    doc["width"] = 1.0;
    doc["output"] = scratch_dir("run-stuck").string();
    err.str("");
    CHECK(run(parse_config(doc), log, err) == 3);
    CHECK(err.str().find("packet-cleared") != std::string::npos);
}
