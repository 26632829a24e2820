#include "qsim/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <thread>

#include "qsim/fit.hpp"
#include "qsim/graph.hpp"
#include "qsim/hamiltonian.hpp"
#include "qsim/histogram.hpp"
#include "qsim/interactions.hpp"
#include "qsim/integrator.hpp"
#include "qsim/json_io.hpp"
#include "qsim/mitigation.hpp"
#include "qsim/presets.hpp"
#include "qsim/version.hpp"

namespace qsim {

namespace {

void write_text_file(const std::string& path, const std::string& body) {
    std::ofstream out(path);
    if (!out) throw io_error("cannot write " + path);
    out << body;
    if (!out) throw io_error("write failed for " + path);
}

std::string format_g(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

std::string point_name(std::size_t i, const char* suffix) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "hist_%03zu%s.json", i, suffix);
    return buf;
}

// Config echo without execution-environment keys, so results.json is
// byte-identical across output locations and worker counts.
nlohmann::json portable_echo(const nlohmann::json& echo) {
    nlohmann::json j = echo;
    j.erase("out");
    j.erase("jobs");
    return j;
}

void require_valid(const ScenarioConfig& cfg) {
    const DeviceProfile prof = active_profile();
    const auto reg_rep = validate_register(cfg.reg, prof);
    if (!reg_rep.ok)
        throw std::invalid_argument("config: register invalid: " +
                                    reg_rep.violations.front().message);
    const auto sch_rep = validate_schedule(cfg.drive, prof);
    if (!sch_rep.ok)
        throw std::invalid_argument("config: schedule invalid: " +
                                    sch_rep.violations.front().message);
    if (!cfg.target.empty() && cfg.target.size() != cfg.reg.size())
        throw std::invalid_argument("config: target length does not match register size");
    if (!cfg.sweep.empty() && cfg.scenario != "rabi" && cfg.scenario != "bell")
        throw std::invalid_argument("config: sweep is only defined for rabi/bell");
}

// Evolve every sweep point (or the single fixed drive) concurrently up to
// cfg.jobs threads; slot-indexed outputs keep the run deterministic.
std::vector<BitstringHistogram> evolve_points(const ScenarioConfig& cfg,
                                              const std::vector<PulseSchedule>& schedules) {
    const std::size_t npts = schedules.size();
    std::vector<BitstringHistogram> measured(npts);
    std::vector<std::exception_ptr> errors(npts);
    IntegratorConfig icfg;
    icfg.dt = cfg.dt;

    const DiagonalCache cache =
        diagonal_energies(interaction_table(cfg.reg, active_profile().c6));
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= npts) return;
            try {
                const QuantumState psi = evolve(cache, schedules[i], icfg);
                BitstringHistogram h = probabilities(psi);
                if (cfg.shots > 0) h = sample_shots(h, cfg.shots, cfg.seed + 1000003 * i);
                measured[i] = std::move(h);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const int nthreads = std::max(1, std::min<int>(cfg.jobs, static_cast<int>(npts)));
    if (nthreads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
    return measured;
}

nlohmann::json ranked_outcomes(const BitstringHistogram& h, std::size_t top) {
    std::vector<std::pair<std::uint64_t, double>> rows(h.entries.begin(), h.entries.end());
    const double norm = h.exact() ? 1.0 : static_cast<double>(h.shots);
    std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
        return a.second != b.second ? a.second > b.second : a.first < b.first;
    });
    if (rows.size() > top) rows.resize(top);
    nlohmann::json out = nlohmann::json::array();
    for (const auto& [b, v] : rows)
        out.push_back({{"bitstring", bitstring_to_string(b, h.n)},
                       {"p", round_sig(v / norm)}});
    return out;
}

std::string ranked_csv(const nlohmann::json& ranked) {
    std::string csv = "rank,bitstring,p\n";
    int r = 1;
    for (const auto& row : ranked)
        csv += std::to_string(r++) + "," + row["bitstring"].get<std::string>() + "," +
               format_g(row["p"].get<double>()) + "\n";
    return csv;
}

std::string density_csv(const std::vector<double>& density) {
    std::string csv = "atom,density\n";
    for (std::size_t j = 0; j < density.size(); ++j)
        csv += std::to_string(j) + "," + format_g(density[j]) + "\n";
    return csv;
}

nlohmann::json density_json(const std::vector<double>& density) {
    nlohmann::json out = nlohmann::json::array();
    for (double v : density) out.push_back(round_sig(v));
    return out;
}

}  // namespace

ScenarioConfig scenario_from_json(const nlohmann::json& doc) {
    if (doc.value("schema", 0) != 1)
        throw std::invalid_argument("config: expected \"schema\": 1");
    ScenarioConfig cfg;
    cfg.echo = doc;
    cfg.scenario = doc.value("scenario", std::string{"custom"});

    const bool is_preset = cfg.scenario != "custom";
    if (is_preset) {
        const Preset p = make_preset(cfg.scenario);  // throws on unknown id
        cfg.reg = p.reg;
        cfg.drive = p.drive;
        cfg.sweep = p.sweep_T;
        cfg.dt = p.dt;
        cfg.target = p.target;
        cfg.param = p.param;
        cfg.x0 = p.linear_x0;
    }
    if (doc.contains("register")) cfg.reg = register_from_json(doc["register"]);
    if (doc.contains("schedule")) cfg.drive = schedule_from_json(doc["schedule"]);
    if (!is_preset && (cfg.reg.positions.empty() || cfg.drive.omega.empty()))
        throw std::invalid_argument("config: custom scenario needs register and schedule");
    if (doc.contains("sweep")) cfg.sweep = doc["sweep"].get<std::vector<double>>();
    cfg.shots = doc.value("shots", cfg.shots);
    cfg.seed = doc.value("seed", cfg.seed);
    cfg.dt = doc.value("dt", cfg.dt);
    cfg.jobs = doc.value("jobs", cfg.jobs);
    cfg.out_dir = doc.value("out", std::string{"qsim_"} + cfg.scenario);
    if (doc.contains("mitigate")) {
        const auto& m = doc["mitigate"];
        if (m.is_boolean()) {
            cfg.mitigate = m.get<bool>();
        } else {
            cfg.mitigate = true;
            cfg.mitigate_eps = m.get<double>();
        }
    }
    if (doc.contains("optimize")) {
        const auto& o = doc["optimize"];
        cfg.target = o.value("target", cfg.target);
        cfg.maxiter = o.value("maxiter", cfg.maxiter);
        cfg.method = o.value("method", cfg.method);
    }
    if (!cfg.target.empty() && cfg.target.size() != cfg.reg.size())
        throw std::invalid_argument("config: target length does not match atom count");
    if (!is_preset && !cfg.target.empty()) {
        // parameterize over the custom drive's window, shrinking the default
        // ramps if they do not fit, and start from the drive's own detuning
        cfg.param.total_time = cfg.drive.total_time;
        const double needed = cfg.param.t_up + cfg.param.t_down + cfg.param.min_plateau;
        if (cfg.drive.total_time < needed) {
            const double avail = cfg.drive.total_time - cfg.param.min_plateau;
            if (avail < 2.0 * cfg.param.ramp_min)
                throw std::invalid_argument("config: drive too short to parameterize");
            const double scale = avail / (cfg.param.t_up + cfg.param.t_down);
            cfg.param.t_up = std::max(cfg.param.ramp_min, cfg.param.t_up * scale);
            cfg.param.t_down = std::max(cfg.param.ramp_min, cfg.param.t_down * scale);
        }
        cfg.x0.clear();
        for (double t : cfg.param.knot_times(cfg.param.t_up, cfg.param.t_down))
            cfg.x0.push_back(std::clamp(interp_track(cfg.drive.delta, t), cfg.param.delta_min,
                                        cfg.param.delta_max));
    }
    if (cfg.mitigate && (cfg.mitigate_eps < 0.0 || cfg.mitigate_eps >= 1.0))
        throw std::invalid_argument("config: mitigation epsilon outside [0, 1)");
    if (cfg.jobs < 1) throw std::invalid_argument("config: jobs must be >= 1");
    if (cfg.dt <= 0.0) throw std::invalid_argument("config: dt must be positive");

    // the sweep rebuilds trapezoids per point; constructing each one now
    // surfaces invalid sweep values as config errors
    if (!cfg.sweep.empty()) {
        Preset shape;
        shape.id = cfg.scenario;
        for (double T : cfg.sweep) cfg.drive = sweep_schedule(shape, T);
    }
    require_valid(cfg);
    return cfg;
}

RunArtifact run_scenario(const ScenarioConfig& cfg) {
    const auto t_start = std::chrono::steady_clock::now();
    std::error_code ec;
    std::filesystem::create_directories(cfg.out_dir, ec);
    if (ec) throw io_error("cannot create " + cfg.out_dir);

    RunArtifact art;
    art.out_dir = cfg.out_dir;
    auto emit_json = [&](const std::string& name, const nlohmann::json& j) {
        write_json_file(cfg.out_dir + "/" + name, j);
        art.files.push_back(name);
    };
    auto emit_text = [&](const std::string& name, const std::string& body) {
        write_text_file(cfg.out_dir + "/" + name, body);
        art.files.push_back(name);
    };
    emit_json("config.json", cfg.echo);

    std::vector<PulseSchedule> schedules;
    Preset shape;
    shape.id = cfg.scenario;
    if (cfg.sweep.empty())
        schedules.push_back(cfg.drive);
    else
        for (double T : cfg.sweep) schedules.push_back(sweep_schedule(shape, T));

    const std::vector<BitstringHistogram> measured = evolve_points(cfg, schedules);
    std::vector<BitstringHistogram> analyzed = measured;
    if (cfg.mitigate) {
        const ReadoutModel model(cfg.mitigate_eps);
        for (auto& h : analyzed) h = mitigate_exact(h, model);
    }

    nlohmann::json results;
    results["version"] = version;
    results["config"] = portable_echo(cfg.echo);
    results["scenario"] = cfg.scenario;
    results["n_atoms"] = cfg.reg.size();

    nlohmann::json points = nlohmann::json::array();
    for (std::size_t i = 0; i < measured.size(); ++i) {
        nlohmann::json pt;
        if (!cfg.sweep.empty()) pt["T"] = cfg.sweep[i];
        pt["file"] = point_name(i, "");
        emit_json(point_name(i, ""), histogram_to_json(measured[i]));
        if (cfg.mitigate) {
            pt["mitigated_file"] = point_name(i, "_mitigated");
            emit_json(point_name(i, "_mitigated"), histogram_to_json(analyzed[i]));
        }
        points.push_back(std::move(pt));
    }
    results["points"] = std::move(points);

    if (cfg.scenario == "rabi") {
        std::vector<double> pop(analyzed.size());
        for (std::size_t i = 0; i < analyzed.size(); ++i)
            pop[i] = rydberg_density(analyzed[i])[0];
        const std::vector<double> sigma =
            cfg.shots > 0 ? binomial_errors(pop, cfg.shots)
                          : std::vector<double>(pop.size(), 0.01);
        std::string csv = "T,p,sigma\n";
        for (std::size_t i = 0; i < pop.size(); ++i)
            csv += format_g(cfg.sweep[i]) + "," + format_g(pop[i]) + "," +
                   format_g(sigma[i]) + "\n";
        emit_text("plotdata_population.csv", csv);
        results["fit"] = fit_to_json(fit_damped_sinusoid(cfg.sweep, pop, sigma));
    } else if (cfg.scenario == "bell") {
        std::string csv = "T,p00,p11,podd\n";
        nlohmann::json series = nlohmann::json::array();
        for (std::size_t i = 0; i < analyzed.size(); ++i) {
            const double p00 = analyzed[i].probability(0);
            const double p11 = analyzed[i].probability(3);
            const double podd = analyzed[i].probability(1) + analyzed[i].probability(2);
            csv += format_g(cfg.sweep[i]) + "," + format_g(p00) + "," + format_g(p11) +
                   "," + format_g(podd) + "\n";
            series.push_back({{"T", cfg.sweep[i]},
                              {"p00", round_sig(p00)},
                              {"p11", round_sig(p11)},
                              {"podd", round_sig(podd)}});
        }
        emit_text("plotdata_bell.csv", csv);
        results["bell"] = std::move(series);
    } else {
        const auto& h = analyzed.back();
        const std::vector<double> density = rydberg_density(h);
        const nlohmann::json ranked = ranked_outcomes(h, 10);
        emit_text("plotdata_density.csv", density_csv(density));
        emit_text("plotdata_ranked.csv", ranked_csv(ranked));
        results["density"] = density_json(density);
        results["ranked"] = ranked;
        if (cfg.scenario == "misloop") {
            const double rb = blockade_radius(2.5 * two_pi, 0.0, active_profile().c6);
            const auto cls = classify_histogram(unit_disk_graph(cfg.reg, rb), h);
            nlohmann::json mis;
            for (const auto& [label, mass] : cls.mass_per_label)
                mis[to_string(label)] = round_sig(mass);
            results["mis"] = std::move(mis);
        }
    }

    emit_json("results.json", results);
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    emit_json("metadata.json", {{"wall_seconds", wall}});
    art.results = std::move(results);
    return art;
}

RunArtifact run_optimize_scenario(const ScenarioConfig& cfg) {
    if (cfg.target.empty())
        throw std::invalid_argument("config: optimization needs a target bitstring");
    const auto t_start = std::chrono::steady_clock::now();
    std::error_code ec;
    std::filesystem::create_directories(cfg.out_dir, ec);
    if (ec) throw io_error("cannot create " + cfg.out_dir);

    RunArtifact art;
    art.out_dir = cfg.out_dir;
    auto emit_json = [&](const std::string& name, const nlohmann::json& j) {
        write_json_file(cfg.out_dir + "/" + name, j);
        art.files.push_back(name);
    };
    auto emit_text = [&](const std::string& name, const std::string& body) {
        write_text_file(cfg.out_dir + "/" + name, body);
        art.files.push_back(name);
    };
    emit_json("config.json", cfg.echo);

    OptimizerConfig ocfg;
    ocfg.method = cfg.method;
    ocfg.maxiter = cfg.maxiter;
    ocfg.mode.exact = cfg.shots == 0;
    ocfg.mode.shots = cfg.shots > 0 ? cfg.shots : ocfg.mode.shots;
    ocfg.mode.seed = cfg.seed;
    ocfg.integrator.dt = cfg.dt;

    const OptimizationResult opt = optimize(cfg.param, cfg.reg, cfg.target, cfg.x0, ocfg);
    const PulseSchedule before = build_detuning_schedule(cfg.x0, cfg.param);

    IntegratorConfig icfg;
    icfg.dt = cfg.dt;
    const BitstringHistogram h_before = probabilities(evolve(cfg.reg, before, icfg));
    const BitstringHistogram h_after =
        probabilities(evolve(cfg.reg, opt.final_schedule, icfg));
    const std::uint64_t target_bits = bitstring_from_string(cfg.target);
    const double p_before = h_before.probability(target_bits);
    const double p_after = h_after.probability(target_bits);

    emit_json("hist_before.json", histogram_to_json(h_before));
    emit_json("hist_after.json", histogram_to_json(h_after));
    emit_json("schedule_optimized.json", schedule_to_json(opt.final_schedule));
    emit_text("plotdata_ranked_before.csv", ranked_csv(ranked_outcomes(h_before, 10)));
    emit_text("plotdata_ranked_after.csv", ranked_csv(ranked_outcomes(h_after, 10)));
    emit_text("plotdata_density_before.csv", density_csv(rydberg_density(h_before)));
    emit_text("plotdata_density_after.csv", density_csv(rydberg_density(h_after)));

    // detuning comparison on a uniform grid for plotting
    std::string drive_csv = "t,delta_linear,delta_optimized\n";
    const int samples = 200;
    // ramp sums can undershoot the nominal T by an ulp; clamp the right edge
    auto at = [](const PulseSchedule& s, double t) {
        return schedule_value_at(s, std::min(t, s.total_time));
    };
    for (int i = 0; i <= samples; ++i) {
        const double t = cfg.param.total_time * i / samples;
        drive_csv += format_g(t) + "," + format_g(at(before, t).delta / two_pi) + "," +
                     format_g(at(opt.final_schedule, t).delta / two_pi) + "\n";
    }
    emit_text("plotdata_drive.csv", drive_csv);

    nlohmann::json results;
    results["version"] = version;
    results["config"] = portable_echo(cfg.echo);
    results["scenario"] = cfg.scenario;
    results["n_atoms"] = cfg.reg.size();
    results["target"] = cfg.target;
    results["optimization"] = optimization_to_json(opt);
    results["before_p"] = round_sig(p_before);
    results["after_p"] = round_sig(p_after);
    results["improvement"] = round_sig(p_before > 0.0 ? p_after / p_before : 0.0);
    results["density_before"] = density_json(rydberg_density(h_before));
    results["density_after"] = density_json(rydberg_density(h_after));
    results["ranked_after"] = ranked_outcomes(h_after, 10);
    emit_json("results.json", results);

    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    emit_json("metadata.json", {{"wall_seconds", wall}});
    art.results = std::move(results);
    return art;
}

}  // namespace qsim
