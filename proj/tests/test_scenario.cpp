#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "qsim/json_io.hpp"
#include "qsim/scenario.hpp"
#include "qsim/units.hpp"

using namespace qsim;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

json tiny_custom(const std::string& out) {
    // 2-atom blockaded pair, short resonant pulse, exact mode
    return json{
        {"schema", 1},
        {"scenario", "custom"},
        {"register", {{"atoms", {{0.0, 0.0}, {6.0, 0.0}}}}},
        {"schedule",
         {{"omega", {{0.0, 0.0}, {0.1, 2.0}, {0.9, 2.0}, {1.0, 0.0}}},
          {"delta", {{0.0, -1.0}, {1.0, 1.0}}}}},
        {"dt", 0.01},
        {"out", out},
    };
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    return std::string(std::istreambuf_iterator<char>(in), {});
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
        fs::remove_all(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("custom scenario resolves, runs, and writes its artifact set") {
    TempDir tmp("qsim_t_custom");
    auto cfg = scenario_from_json(tiny_custom(tmp.path.string()));
    CHECK(cfg.scenario == "custom");
    CHECK(cfg.reg.size() == 2);
    CHECK(cfg.drive.total_time == doctest::Approx(1.0));
    CHECK(cfg.shots == 0);

    auto art = run_scenario(cfg);
    CHECK(fs::exists(tmp.path / "config.json"));
    CHECK(fs::exists(tmp.path / "results.json"));
    CHECK(fs::exists(tmp.path / "metadata.json"));
    CHECK(fs::exists(tmp.path / "hist_000.json"));
    CHECK(fs::exists(tmp.path / "plotdata_density.csv"));
    CHECK(fs::exists(tmp.path / "plotdata_ranked.csv"));

    auto results = read_json_file((tmp.path / "results.json").string());
    CHECK(results["n_atoms"] == 2);
    CHECK(results["points"].size() == 1);
    CHECK(results["points"][0]["file"] == "hist_000.json");
    CHECK(results["scenario"] == "custom");
    // exact histogram probabilities sum to ~1
    auto h = histogram_from_json(read_json_file((tmp.path / "hist_000.json").string()));
    CHECK(h.total() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(art.results == results);
}

TEST_CASE("same config and seed produce byte-identical results") {
    TempDir a("qsim_t_rep_a"), b("qsim_t_rep_b");
    auto doc = tiny_custom(a.path.string());
    doc["shots"] = 500;
    doc["seed"] = 77;
    run_scenario(scenario_from_json(doc));
    doc["out"] = b.path.string();
    run_scenario(scenario_from_json(doc));

    auto ra = slurp(a.path / "results.json"), rb = slurp(b.path / "results.json");
    CHECK(ra == rb);
    CHECK_FALSE(ra.empty());
    CHECK(slurp(a.path / "hist_000.json") == slurp(b.path / "hist_000.json"));

    // a different seed changes sampled outcomes
    TempDir c("qsim_t_rep_c");
    doc["out"] = c.path.string();
    doc["seed"] = 78;
    run_scenario(scenario_from_json(doc));
    CHECK(slurp(c.path / "hist_000.json") != slurp(a.path / "hist_000.json"));
}

TEST_CASE("parallel execution does not change results") {
    TempDir a("qsim_t_par_a"), b("qsim_t_par_b");
    json doc = {{"schema", 1}, {"scenario", "bell"}, {"shots", 400},
                {"seed", 5},   {"jobs", 1},          {"out", a.path.string()}};
    run_scenario(scenario_from_json(doc));
    doc["jobs"] = 3;
    doc["out"] = b.path.string();
    run_scenario(scenario_from_json(doc));
    CHECK(slurp(a.path / "results.json") == slurp(b.path / "results.json"));
    CHECK(slurp(a.path / "hist_005.json") == slurp(b.path / "hist_005.json"));
}

TEST_CASE("mitigation adds corrected artifacts and leaves raw histograms alone") {
    TempDir a("qsim_t_mit_a"), b("qsim_t_mit_b");
    auto doc = tiny_custom(a.path.string());
    doc["shots"] = 800;
    run_scenario(scenario_from_json(doc));

    doc["out"] = b.path.string();
    doc["mitigate"] = 0.05;
    auto cfg = scenario_from_json(doc);
    CHECK(cfg.mitigate);
    CHECK(cfg.mitigate_eps == doctest::Approx(0.05));
    run_scenario(cfg);

    CHECK(slurp(a.path / "hist_000.json") == slurp(b.path / "hist_000.json"));
    CHECK_FALSE(fs::exists(a.path / "hist_000_mitigated.json"));
    CHECK(fs::exists(b.path / "hist_000_mitigated.json"));
    auto mit = histogram_from_json(read_json_file((b.path / "hist_000_mitigated.json").string()));
    CHECK(mit.exact());
    CHECK(mit.total() == doctest::Approx(1.0).epsilon(1e-9));

    // boolean form picks the default epsilon
    auto cfg2 = scenario_from_json(json{{"schema", 1}, {"scenario", "bell"}, {"mitigate", true}});
    CHECK(cfg2.mitigate);
    CHECK(cfg2.mitigate_eps == doctest::Approx(0.01));
}

TEST_CASE("rabi preset wires the sweep, fit and csv payloads") {
    TempDir tmp("qsim_t_rabi");
    json doc = {{"schema", 1}, {"scenario", "rabi"}, {"out", tmp.path.string()}};
    auto cfg = scenario_from_json(doc);
    CHECK(cfg.sweep.size() == 60);
    auto art = run_scenario(cfg);
    CHECK(fs::exists(tmp.path / "plotdata_population.csv"));
    CHECK(fs::exists(tmp.path / "hist_059.json"));
    const auto& fit = art.results["fit"];
    CHECK(fit["omega"].get<double>() == doctest::Approx(1.8).epsilon(1e-4));
    CHECK(fit["tau_unbounded"].get<bool>());
    // csv has header plus one row per sweep point
    const auto csv = slurp(tmp.path / "plotdata_population.csv");
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 61);
}

TEST_CASE("config validation failures throw invalid_argument") {
    CHECK_THROWS_AS(scenario_from_json(json{{"scenario", "rabi"}}), std::invalid_argument);
    CHECK_THROWS_AS(scenario_from_json(json{{"schema", 2}, {"scenario", "rabi"}}),
                    std::invalid_argument);
    CHECK_THROWS_AS(scenario_from_json(json{{"schema", 1}, {"scenario", "unknown"}}),
                    std::invalid_argument);
    // custom requires inline register and schedule
    CHECK_THROWS_AS(scenario_from_json(json{{"schema", 1}, {"scenario", "custom"}}),
                    std::invalid_argument);
    // schedule violating the device profile is rejected at resolution time
    auto doc = tiny_custom("/tmp/qsim_t_never");
    doc["schedule"]["omega"] = {{0.0, 0.0}, {0.1, 99.0}, {1.0, 0.0}};
    CHECK_THROWS_AS(scenario_from_json(doc), std::invalid_argument);
    // atoms too close together
    auto doc2 = tiny_custom("/tmp/qsim_t_never");
    doc2["register"]["atoms"] = {{0.0, 0.0}, {1.0, 0.0}};
    CHECK_THROWS_AS(scenario_from_json(doc2), std::invalid_argument);
    // sweep override only applies to sweep scenarios
    auto doc3 = tiny_custom("/tmp/qsim_t_never");
    doc3["sweep"] = {0.5, 1.0};
    CHECK_THROWS_AS(scenario_from_json(doc3), std::invalid_argument);
}

TEST_CASE("unwritable output directory raises io_error") {
    auto doc = tiny_custom("/proc/qsim_t_nowrite");
    auto cfg = scenario_from_json(doc);
    CHECK_THROWS_AS(run_scenario(cfg), io_error);
}

TEST_CASE("optimize scenario writes before/after artifacts on a tiny problem") {
    TempDir tmp("qsim_t_opt");
    json doc = {{"schema", 1},
                {"scenario", "custom"},
                {"register", {{"atoms", {{0.0, 0.0}, {6.0, 0.0}}}}},
                {"schedule",
                 {{"omega", {{0.0, 0.0}, {0.1, 2.0}, {0.9, 2.0}, {1.0, 0.0}}},
                  {"delta", {{0.0, -1.0}, {1.0, 1.0}}}}},
                {"dt", 0.02},
                {"out", tmp.path.string()},
                {"optimize", {{"target", "10"}, {"maxiter", 25}, {"method", "cobyla"}}}};
    auto cfg = scenario_from_json(doc);
    CHECK(cfg.target == "10");
    CHECK(cfg.maxiter == 25);
    // custom optimize runs shape the pulse over the drive's total time
    CHECK(cfg.param.total_time == doctest::Approx(1.0));

    auto art = run_optimize_scenario(cfg);
    for (const char* f :
         {"config.json", "results.json", "hist_before.json", "hist_after.json",
          "schedule_optimized.json", "plotdata_drive.csv", "plotdata_ranked_after.csv"})
        CHECK(fs::exists(tmp.path / f));
    CHECK(art.results["after_p"].get<double>() >= art.results["before_p"].get<double>());
    CHECK(art.results["improvement"].get<double>() ==
          doctest::Approx(art.results["after_p"].get<double>() /
                          art.results["before_p"].get<double>())
              .epsilon(1e-9));
    CHECK(art.results["optimization"]["iterations"].get<int>() <= 25);

    // the optimized schedule file round-trips and respects the device profile
    auto s = schedule_from_json(read_json_file((tmp.path / "schedule_optimized.json").string()));
    auto rep = validate_schedule(s, active_profile());
    CHECK(rep.ok);
}
