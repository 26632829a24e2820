#include <cstdio>
#include <exception>
#include <functional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "qsim/fit.hpp"
#include "qsim/json_io.hpp"
#include "qsim/scenario.hpp"
#include "qsim/version.hpp"

namespace {

constexpr int exit_validation = 2;
constexpr int exit_numerical = 3;
constexpr int exit_io = 4;

struct CommonFlags {
    int jobs = 0;             // 0 = keep config value
    long long seed = -1;      // -1 = keep config value
    bool exact = false;
    long long shots = -1;
    std::string mitigate;     // "", "default", or an epsilon
    std::string out;

    void add(CLI::App* cmd) {
        cmd->add_option("--jobs", jobs, "concurrent sweep jobs");
        cmd->add_option("--seed", seed, "sampling seed");
        cmd->add_flag("--exact", exact, "exact probabilities (no sampling)");
        cmd->add_option("--shots", shots, "sample this many shots per point");
        cmd->add_option("--mitigate", mitigate, "readout mitigation, optional epsilon")
            ->expected(0, 1)
            ->default_str("default");
        cmd->add_option("--out", out, "artifact directory");
    }

    void apply(qsim::ScenarioConfig& cfg) const {
        if (jobs > 0) cfg.jobs = jobs;
        if (seed >= 0) cfg.seed = static_cast<std::uint64_t>(seed);
        if (shots >= 0) cfg.shots = static_cast<std::uint64_t>(shots);
        if (exact) cfg.shots = 0;
        if (!mitigate.empty()) {
            cfg.mitigate = true;
            if (mitigate != "default") cfg.mitigate_eps = std::stod(mitigate);
        }
        if (!out.empty()) cfg.out_dir = out;
    }
};

qsim::ScenarioConfig load_config(const std::string& path, const CommonFlags& flags) {
    qsim::ScenarioConfig cfg = qsim::scenario_from_json(qsim::read_json_file(path));
    flags.apply(cfg);
    return cfg;
}

// t,p[,sigma] rows with an optional header line.
void load_csv(const std::string& path, std::vector<double>& t, std::vector<double>& p,
              std::vector<double>& sigma) {
    std::FILE* f = std::fopen(path.c_str(), "r");
    if (f == nullptr) throw qsim::io_error("cannot open " + path);
    char line[512];
    while (std::fgets(line, sizeof line, f) != nullptr) {
        double a, b, c;
        const int got = std::sscanf(line, "%lf%*[,; \t]%lf%*[,; \t]%lf", &a, &b, &c);
        if (got < 2) continue;  // header or blank
        t.push_back(a);
        p.push_back(b);
        sigma.push_back(got >= 3 ? c : 0.01);
    }
    std::fclose(f);
    if (t.empty()) throw std::invalid_argument("csv: no data rows in " + path);
}

int dispatch(const std::string& what, const std::function<int()>& body) {
    try {
        return body();
    } catch (const qsim::io_error& e) {
        std::fprintf(stderr, "qsim %s: io error: %s\n", what.c_str(), e.what());
        return exit_io;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "qsim %s: invalid input: %s\n", what.c_str(), e.what());
        return exit_validation;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "qsim %s: failed: %s\n", what.c_str(), e.what());
        return exit_numerical;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"analog neutral-atom simulator and pulse-design toolkit"};
    app.set_version_flag("--version", qsim::version);
    app.require_subcommand(1);

    std::string config_path, csv_path;
    CommonFlags run_flags, opt_flags, val_flags;

    CLI::App* run = app.add_subcommand("run", "run a scenario config");
    run->add_option("config", config_path, "config JSON")->required();
    run_flags.add(run);

    CLI::App* fit = app.add_subcommand("fit", "fit a damped sinusoid to t,p[,sigma] CSV");
    fit->add_option("csv", csv_path, "input CSV")->required();
    std::string fit_out;
    fit->add_option("--out", fit_out, "output JSON path");

    CLI::App* opt = app.add_subcommand("optimize", "optimize a drive toward a target");
    opt->add_option("config", config_path, "config JSON")->required();
    opt_flags.add(opt);

    CLI::App* val = app.add_subcommand("validate", "validate a config and exit");
    val->add_option("config", config_path, "config JSON")->required();
    val_flags.add(val);

    CLI11_PARSE(app, argc, argv);

    if (run->parsed())
        return dispatch("run", [&] {
            const auto art = qsim::run_scenario(load_config(config_path, run_flags));
            std::printf("wrote %zu files to %s\n", art.files.size(), art.out_dir.c_str());
            return 0;
        });
    if (fit->parsed())
        return dispatch("fit", [&] {
            std::vector<double> t, p, sigma;
            load_csv(csv_path, t, p, sigma);
            const qsim::FitResult r = qsim::fit_damped_sinusoid(t, p, sigma);
            const auto j = qsim::fit_to_json(r);
            if (!fit_out.empty()) qsim::write_json_file(fit_out, j);
            std::printf("%s\n", j.dump(2).c_str());
            return 0;
        });
    if (opt->parsed())
        return dispatch("optimize", [&] {
            const auto art = qsim::run_optimize_scenario(load_config(config_path, opt_flags));
            std::printf("improvement %.4g (p %.6g -> %.6g), wrote %zu files to %s\n",
                        art.results["improvement"].get<double>(),
                        art.results["before_p"].get<double>(),
                        art.results["after_p"].get<double>(), art.files.size(),
                        art.out_dir.c_str());
            return 0;
        });
    return dispatch("validate", [&] {
        load_config(config_path, val_flags);
        std::printf("ok\n");
        return 0;
    });
}
