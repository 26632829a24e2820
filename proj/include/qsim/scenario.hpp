#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "qsim/json_io.hpp"
#include "qsim/pulse_opt.hpp"
#include "qsim/register.hpp"
#include "qsim/schedule.hpp"

namespace qsim {

struct ScenarioConfig {
    std::string scenario = "custom";
    AtomRegister reg;
    PulseSchedule drive;
    std::vector<double> sweep;  // total-time sweep (rabi/bell); empty = single run
    std::uint64_t shots = 0;    // 0 = exact probabilities
    std::uint64_t seed = 1;
    bool mitigate = false;
    double mitigate_eps = 0.01;
    std::string out_dir;
    int jobs = 1;
    double dt = 0.004;
    std::string target;  // optimization target; empty for plain runs
    ScheduleParameterization param;
    std::vector<double> x0;
    std::string method = "cobyla";
    int maxiter = 150;
    nlohmann::json echo;  // raw config document, embedded in artifacts
};

// Resolve a config document: preset defaults filled in, inline overrides
// applied, register/schedule validated against the active device profile.
ScenarioConfig scenario_from_json(const nlohmann::json& doc);

struct RunArtifact {
    std::string out_dir;
    nlohmann::json results;  // echo of results.json
    std::vector<std::string> files;
};

// Sweep or single-point run: evolve, sample, optionally mitigate; writes
// config.json, results.json, per-point hist_*.json and plotdata_*.csv.
// Same config and seed give byte-identical results.json (wall-clock data
// goes to metadata.json).
RunArtifact run_scenario(const ScenarioConfig& cfg);

// Optimization run: linear-drive baseline, optimizer, before/after artifacts
// and the optimized schedule file.
RunArtifact run_optimize_scenario(const ScenarioConfig& cfg);

}  // namespace qsim
