#include "qsim/pulse_opt.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "qsim/cobyla.hpp"
#include "qsim/histogram.hpp"

namespace qsim {

std::vector<double> ScheduleParameterization::knot_times(double up, double down) const {
    if (n_knots < 2) throw std::invalid_argument("knot_times: need at least 2 knots");
    const double a = up, b = total_time - down;
    if (!(b > a)) throw std::invalid_argument("knot_times: ramps leave no plateau");
    std::vector<double> ts(n_knots);
    for (int i = 0; i < n_knots; ++i) ts[i] = a + (b - a) * i / (n_knots - 1);
    return ts;
}

PulseSchedule build_detuning_schedule(const std::vector<double>& params,
                                      const ScheduleParameterization& spec) {
    if (static_cast<int>(params.size()) != spec.n_params())
        throw std::invalid_argument("build_detuning_schedule: wrong parameter count");
    const double up = spec.optimize_ramps ? params[spec.n_knots] : spec.t_up;
    const double down = spec.optimize_ramps ? params[spec.n_knots + 1] : spec.t_down;
    const auto ts = spec.knot_times(up, down);
    std::vector<Knot> delta(spec.n_knots);
    for (int i = 0; i < spec.n_knots; ++i) delta[i] = {ts[i], params[i]};
    return make_ramp_plateau_ramp(spec.omega_max, up, spec.total_time - up - down, down,
                                  std::move(delta));
}

std::vector<double> linear_drive_params(const ScheduleParameterization& spec, double delta_start,
                                        double delta_end) {
    std::vector<double> p(spec.n_knots);
    for (int i = 0; i < spec.n_knots; ++i)
        p[i] = delta_start + (delta_end - delta_start) * i / (spec.n_knots - 1);
    if (spec.optimize_ramps) {
        p.push_back(spec.t_up);
        p.push_back(spec.t_down);
    }
    return p;
}

namespace {

// Box bounds for each parameter slot, in physical units.
void param_box(const ScheduleParameterization& spec, std::vector<double>& lo,
               std::vector<double>& hi) {
    lo.assign(spec.n_params(), spec.delta_min);
    hi.assign(spec.n_params(), spec.delta_max);
    if (spec.optimize_ramps) {
        lo[spec.n_knots] = lo[spec.n_knots + 1] = spec.ramp_min;
        hi[spec.n_knots] = hi[spec.n_knots + 1] = spec.ramp_max;
    }
}

// Clip a physical parameter vector into the box, then force a positive
// plateau so the schedule is always constructible.
std::vector<double> clip_physical(std::vector<double> p, const ScheduleParameterization& spec,
                                  const std::vector<double>& lo, const std::vector<double>& hi) {
    for (size_t i = 0; i < p.size(); ++i) p[i] = std::clamp(p[i], lo[i], hi[i]);
    if (spec.optimize_ramps) {
        double& up = p[spec.n_knots];
        double& down = p[spec.n_knots + 1];
        const double excess = up + down - (spec.total_time - 0.01);
        if (excess > 0.0) {
            const double scale = (spec.total_time - 0.01) / (up + down);
            up *= scale;
            down *= scale;
        }
    }
    return p;
}

}  // namespace

double objective_target_probability(const std::vector<double>& params,
                                    const ScheduleParameterization& spec, const AtomRegister& reg,
                                    const std::string& target, const ObjectiveMode& mode,
                                    const IntegratorConfig& integrator) {
    if (target.size() != reg.size())
        throw std::invalid_argument("objective_target_probability: target length != atom count");
    const std::uint64_t key = bitstring_from_string(target);
    const PulseSchedule sched = build_detuning_schedule(params, spec);
    const QuantumState psi = evolve(reg, sched, integrator);
    const BitstringHistogram exact = probabilities(psi);
    if (mode.exact) return exact.probability(key);
    const BitstringHistogram sampled = sample_shots(exact, mode.shots, mode.seed);
    return sampled.probability(key);
}

OptimizationResult optimize(const ScheduleParameterization& spec, const AtomRegister& reg,
                            const std::string& target, std::vector<double> x0,
                            const OptimizerConfig& config) {
    const int np = spec.n_params();
    if (static_cast<int>(x0.size()) != np)
        throw std::invalid_argument("optimize: wrong initial parameter count");

    std::vector<double> lo, hi;
    param_box(spec, lo, hi);
    for (int i = 0; i < np; ++i) {
        if (!(hi[i] > lo[i])) throw std::invalid_argument("optimize: empty parameter box");
        if (x0[i] < lo[i] - 1e-12 || x0[i] > hi[i] + 1e-12)
            throw std::invalid_argument("optimize: initial point outside bounds");
    }

    auto to_physical = [&](const std::vector<double>& u) {
        std::vector<double> p(np);
        for (int i = 0; i < np; ++i) p[i] = lo[i] + u[i] * (hi[i] - lo[i]);
        return clip_physical(std::move(p), spec, lo, hi);
    };

    std::vector<std::vector<double>> eval_params;  // clipped physical, per evaluation
    std::vector<double> trace;
    eval_params.reserve(config.maxiter);
    trace.reserve(config.maxiter);

    OptProblem problem;
    problem.objective = [&](const std::vector<double>& u) {
        auto p = to_physical(u);
        const double prob =
            objective_target_probability(p, spec, reg, target, config.mode, config.integrator);
        eval_params.push_back(std::move(p));
        trace.push_back(prob);
        return -prob;
    };
    for (int i = 0; i < np; ++i) {
        problem.constraints.push_back([i](const std::vector<double>& u) { return u[i]; });
        problem.constraints.push_back([i](const std::vector<double>& u) { return 1.0 - u[i]; });
    }
    if (spec.optimize_ramps) {
        const int iu = spec.n_knots, id = spec.n_knots + 1;
        const double wu = hi[iu] - lo[iu], wd = hi[id] - lo[id];
        problem.constraints.push_back([&spec, iu, id, wu, wd,
                                       lo_u = lo[iu], lo_d = lo[id]](const std::vector<double>& u) {
            const double up = lo_u + u[iu] * wu, down = lo_d + u[id] * wd;
            return spec.total_time - up - down - spec.min_plateau;
        });
    }

    std::vector<double> u0(np);
    for (int i = 0; i < np; ++i) u0[i] = (x0[i] - lo[i]) / (hi[i] - lo[i]);

    SolverOptions sopts;
    sopts.rhobeg = config.rhobeg_frac;
    sopts.rhoend = config.rhoend_frac;
    sopts.maxfun = config.maxiter;

    SolverResult sres;
    if (config.method == "cobyla")
        sres = cobyla_minimize(problem, std::move(u0), sopts);
    else if (config.method == "neldermead")
        sres = neldermead_minimize(problem, std::move(u0), sopts);
    else
        throw std::invalid_argument("optimize: unknown method '" + config.method + "'");

    // Every traced value was obtained at in-box (clipped) parameters, so the
    // global argmax of the trace is both achievable and feasible.
    size_t best = 0;
    for (size_t i = 1; i < trace.size(); ++i)
        if (trace[i] > trace[best]) best = i;

    OptimizationResult out{eval_params[best],
                           trace[best],
                           std::move(trace),
                           static_cast<int>(eval_params.size()),
                           build_detuning_schedule(eval_params[best], spec),
                           sres.status};
    return out;
}

}  // namespace qsim
