#pragma once

#include <array>
#include <functional>
#include <vector>

namespace qsim {

// Damped sinusoid model: f(t) = C + A*sin(omega*t + phi)*exp(-t/tau).
double damped_sinusoid(double t, double C, double A, double omega, double phi, double tau);

struct FitResult {
    double C = 0.0;
    double A = 0.0;
    double omega = 0.0;  // rad/us
    double phi = 0.0;    // rad
    double tau = 0.0;    // us
    double err_C = 0.0;
    double err_A = 0.0;
    double err_omega = 0.0;
    double err_phi = 0.0;
    double err_tau = 0.0;
    double chi2 = 0.0;
    int dof = 0;
    double chi2_per_dof = 0.0;
    bool tau_unbounded = false;  // decay rate hit zero; tau reported at cap

    double eval(double t) const { return damped_sinusoid(t, C, A, omega, phi, tau); }
};

// Binomial standard errors sigma = sqrt(p(1-p)/N), floored at sqrt(0.25/N)/10
// so zero-variance endpoints never produce infinite weights.
std::vector<double> binomial_errors(const std::vector<double>& probabilities, int shots_per_point);

struct Chi2Stats {
    double chi2 = 0.0;
    int dof = 0;
    double ratio = 0.0;
};

// chi2 = sum ((y - f)/sigma)^2 with dof = N - 5 (five-parameter model).
Chi2Stats chi_squared(const std::vector<double>& values, const std::vector<double>& model,
                      const std::vector<double>& errors);

// Weighted least squares of the damped sinusoid with periodogram-seeded
// multi-start over omega. Throws std::runtime_error if no start converges.
FitResult fit_damped_sinusoid(const std::vector<double>& times, const std::vector<double>& values,
                              const std::vector<double>& errors);

// Generic dense Levenberg-Marquardt on weighted residuals. residual_jac fills
// r (size m) and the row-major Jacobian J (size m*n) at x.
struct LmOptions {
    int max_iter = 200;
    double ftol = 1e-14;
    double xtol = 1e-13;
    double lambda0 = 1e-3;
};

struct LmOutcome {
    std::vector<double> x;
    std::vector<double> errors;  // sqrt(diag((J^T J)^-1)) at the solution
    std::vector<double> cov;     // row-major n*n
    double chi2 = 0.0;
    int iters = 0;
    bool converged = false;
};

using LmResidualFn =
    std::function<void(const std::vector<double>&, std::vector<double>&, std::vector<double>&)>;

LmOutcome lm_fit(const LmResidualFn& residual_jac, std::vector<double> x0, int m,
                 const LmOptions& opts = {});

namespace detail {
// Solves A x = b in place by Gaussian elimination with partial pivoting;
// returns false if A is numerically singular. A is row-major n*n.
bool solve_linear(std::vector<double> a, std::vector<double> b, std::vector<double>& x, int n);

// Dominant nonzero frequency (rad per time unit) of a uniform-resampled
// periodogram of (times, values); returns 0 if the data has no usable span.
double periodogram_peak(const std::vector<double>& times, const std::vector<double>& values);
}  // namespace detail

}  // namespace qsim
