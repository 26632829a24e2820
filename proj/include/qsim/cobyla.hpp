#pragma once

#include <functional>
#include <string>
#include <vector>

namespace qsim {

// Constrained minimization problem: minimize objective(x) subject to
// constraints[i](x) >= 0 for all i. Evaluations may be expensive; solvers
// budget by objective evaluation count.
struct OptProblem {
    std::function<double(const std::vector<double>&)> objective;
    std::vector<std::function<double(const std::vector<double>&)>> constraints;
};

struct SolverOptions {
    double rhobeg = 0.1;   // initial trust-region radius
    double rhoend = 1e-3;  // final trust-region radius (convergence scale)
    int maxfun = 150;      // evaluation budget
    double ctol = 1e-8;    // feasibility tolerance for reporting
};

struct SolverResult {
    std::vector<double> x;
    double f = 0.0;
    double maxviol = 0.0;  // max_i max(0, -g_i(x)) at the returned point
    int evals = 0;
    bool reached_maxfun = false;
    std::string status;  // "rhoend" or "maxfun"
};

// Linear-approximation trust-region method: maintains an n+1-point simplex,
// models objective and constraints by linear interpolation, and minimizes a
// merit function f + mu * maxviol within a shrinking trust region.
SolverResult cobyla_minimize(const OptProblem& problem, std::vector<double> x0,
                             const SolverOptions& opts = {});

// Nelder-Mead simplex fallback on the penalized merit f + penalty * maxviol,
// exposed behind the same interface.
SolverResult neldermead_minimize(const OptProblem& problem, std::vector<double> x0,
                                 const SolverOptions& opts = {}, double penalty = 1e4);

}  // namespace qsim
