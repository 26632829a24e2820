#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qsim/integrator.hpp"
#include "qsim/register.hpp"
#include "qsim/schedule.hpp"
#include "qsim/units.hpp"

namespace qsim {

// Step-wise linear detuning parameterization over a trapezoidal omega pulse.
// Parameter vector: n_knots detuning values (rad/us), plus (t_up, t_down)
// appended when optimize_ramps is set.
struct ScheduleParameterization {
    int n_knots = 6;
    bool optimize_ramps = false;
    double t_up = 0.29;  // us; initial values when ramps are optimized
    double t_down = 0.4;
    double ramp_min = 0.05;  // ramp-duration bounds, us
    double ramp_max = 1.9;
    double delta_min = -8.0 * two_pi;  // knot-value bounds, rad/us
    double delta_max = 8.0 * two_pi;
    double total_time = 4.0;  // us, fixed
    double omega_max = 2.5 * two_pi;
    double min_plateau = 0.2;  // us; constraint when ramps are optimized

    int n_params() const { return n_knots + (optimize_ramps ? 2 : 0); }

    // Uniform knot times from t_up to total_time - t_down inclusive.
    std::vector<double> knot_times(double up, double down) const;
};

struct ObjectiveMode {
    bool exact = true;
    std::uint64_t shots = 200000;
    std::uint64_t seed = 1;
};

struct OptimizerConfig {
    std::string method = "cobyla";  // or "neldermead"
    int maxiter = 150;
    double rhobeg_frac = 0.1;   // fraction of each parameter's box width
    double rhoend_frac = 1e-3;  // likewise
    ObjectiveMode mode;
    IntegratorConfig integrator;
};

struct OptimizationResult {
    std::vector<double> best_params;
    double best_objective = 0.0;
    std::vector<double> trace;  // objective value per evaluation
    int iterations = 0;         // evaluations used
    PulseSchedule final_schedule;
    std::string termination;  // "rhoend" or "maxfun"
};

// Omega trapezoid from the ramp durations; Delta piecewise-linear through the
// knots with endpoints held flat to 0 and T; phi identically 0.
PulseSchedule build_detuning_schedule(const std::vector<double>& params,
                                      const ScheduleParameterization& spec);

// Exact (or shot-estimated) probability of the target bitstring after
// evolving the register under the parameterized schedule.
double objective_target_probability(const std::vector<double>& params,
                                    const ScheduleParameterization& spec, const AtomRegister& reg,
                                    const std::string& target, const ObjectiveMode& mode = {},
                                    const IntegratorConfig& integrator = {});

// Derivative-free trust-region search (or simplex fallback) maximizing the
// target probability over the parameter box. x0 is in physical units and must
// be feasible; proposals are clipped into the box before simulation and
// steered back by bound constraints.
OptimizationResult optimize(const ScheduleParameterization& spec, const AtomRegister& reg,
                            const std::string& target, std::vector<double> x0,
                            const OptimizerConfig& config = {});

// Knot values of the linear drive from delta_start to delta_end: the default
// feasible starting point.
std::vector<double> linear_drive_params(const ScheduleParameterization& spec, double delta_start,
                                        double delta_end);

}  // namespace qsim
