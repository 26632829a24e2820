#include "qsim/fit.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>

namespace qsim {

namespace {

constexpr double rate_floor = 1e-9;  // decay rates below this count as "no decay"
constexpr double tau_cap = 1e9;

double wrap_angle(double phi) {
    phi = std::fmod(phi, 2.0 * M_PI);
    if (phi > M_PI) phi -= 2.0 * M_PI;
    if (phi <= -M_PI) phi += 2.0 * M_PI;
    return phi;
}

// Model in the internal parameterization x = (C, A, omega, phi, r) with
// r = 1/tau, so an undamped signal is the finite point r = 0.
double model_rate(double t, const double* x) {
    return x[0] + x[1] * std::sin(x[2] * t + x[3]) * std::exp(-x[4] * t);
}

void residuals_damped(const std::vector<double>& t, const std::vector<double>& y,
                      const std::vector<double>& w, const std::vector<double>& x,
                      std::vector<double>& r, std::vector<double>& jac) {
    const int m = static_cast<int>(t.size());
    for (int i = 0; i < m; ++i) {
        const double env = std::exp(-x[4] * t[i]);
        const double arg = x[2] * t[i] + x[3];
        const double s = std::sin(arg), c = std::cos(arg);
        r[i] = w[i] * (model_rate(t[i], x.data()) - y[i]);
        jac[i * 5 + 0] = w[i];
        jac[i * 5 + 1] = w[i] * s * env;
        jac[i * 5 + 2] = w[i] * x[1] * t[i] * c * env;
        jac[i * 5 + 3] = w[i] * x[1] * c * env;
        jac[i * 5 + 4] = -w[i] * x[1] * t[i] * s * env;
    }
}

// Weighted linear solve for (C, a, b) in y ~ C + a*sin(wt)e^{-rt} + b*cos(wt)e^{-rt}.
bool seed_linear(const std::vector<double>& t, const std::vector<double>& y,
                 const std::vector<double>& w, double omega, double rate, double out[3]) {
    std::vector<double> ata(9, 0.0), atb(3, 0.0);
    for (size_t i = 0; i < t.size(); ++i) {
        const double env = std::exp(-rate * t[i]);
        const double basis[3] = {1.0, std::sin(omega * t[i]) * env, std::cos(omega * t[i]) * env};
        const double w2 = w[i] * w[i];
        for (int a = 0; a < 3; ++a) {
            for (int b = 0; b < 3; ++b) ata[a * 3 + b] += w2 * basis[a] * basis[b];
            atb[a] += w2 * basis[a] * y[i];
        }
    }
    std::vector<double> sol;
    if (!detail::solve_linear(ata, atb, sol, 3)) return false;
    out[0] = sol[0];
    out[1] = sol[1];
    out[2] = sol[2];
    return true;
}

}  // namespace

double damped_sinusoid(double t, double C, double A, double omega, double phi, double tau) {
    return C + A * std::sin(omega * t + phi) * std::exp(-t / tau);
}

std::vector<double> binomial_errors(const std::vector<double>& probabilities, int shots_per_point) {
    if (shots_per_point < 1) throw std::invalid_argument("binomial_errors: shots must be >= 1");
    const double n = static_cast<double>(shots_per_point);
    const double floor = std::sqrt(0.25 / n) / 10.0;
    std::vector<double> out;
    out.reserve(probabilities.size());
    for (double p : probabilities) {
        if (p < 0.0 || p > 1.0) throw std::invalid_argument("binomial_errors: p outside [0, 1]");
        out.push_back(std::max(std::sqrt(p * (1.0 - p) / n), floor));
    }
    return out;
}

Chi2Stats chi_squared(const std::vector<double>& values, const std::vector<double>& model,
                      const std::vector<double>& errors) {
    if (values.size() != model.size() || values.size() != errors.size())
        throw std::invalid_argument("chi_squared: length mismatch");
    Chi2Stats st;
    for (size_t i = 0; i < values.size(); ++i) {
        if (errors[i] <= 0.0) throw std::invalid_argument("chi_squared: zero error bar");
        const double z = (values[i] - model[i]) / errors[i];
        st.chi2 += z * z;
    }
    st.dof = static_cast<int>(values.size()) - 5;
    st.ratio = st.dof > 0 ? st.chi2 / st.dof : std::numeric_limits<double>::quiet_NaN();
    return st;
}

bool detail::solve_linear(std::vector<double> a, std::vector<double> b, std::vector<double>& x,
                          int n) {
    for (int col = 0; col < n; ++col) {
        int piv = col;
        for (int r = col + 1; r < n; ++r)
            if (std::abs(a[r * n + col]) > std::abs(a[piv * n + col])) piv = r;
        if (std::abs(a[piv * n + col]) < 1e-300) return false;
        if (piv != col) {
            for (int k = col; k < n; ++k) std::swap(a[piv * n + k], a[col * n + k]);
            std::swap(b[piv], b[col]);
        }
        for (int r = col + 1; r < n; ++r) {
            const double f = a[r * n + col] / a[col * n + col];
            for (int k = col; k < n; ++k) a[r * n + k] -= f * a[col * n + k];
            b[r] -= f * b[col];
        }
    }
    x.assign(n, 0.0);
    for (int r = n - 1; r >= 0; --r) {
        double s = b[r];
        for (int k = r + 1; k < n; ++k) s -= a[r * n + k] * x[k];
        x[r] = s / a[r * n + r];
        if (!std::isfinite(x[r])) return false;
    }
    return true;
}

double detail::periodogram_peak(const std::vector<double>& times, const std::vector<double>& values) {
    const double t0 = *std::min_element(times.begin(), times.end());
    const double t1 = *std::max_element(times.begin(), times.end());
    const double span = t1 - t0;
    if (!(span > 0.0)) return 0.0;

    // Uniform resample by linear interpolation on sorted data.
    std::vector<size_t> order(times.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) { return times[a] < times[b]; });

    constexpr int m = 256;
    const double step = span / (m - 1);
    std::vector<double> u(m);
    double mean = 0.0;
    size_t seg = 0;
    for (int i = 0; i < m; ++i) {
        const double t = t0 + i * step;
        while (seg + 1 < order.size() - 1 && times[order[seg + 1]] < t) ++seg;
        const double ta = times[order[seg]], tb = times[order[seg + 1]];
        const double ya = values[order[seg]], yb = values[order[seg + 1]];
        u[i] = tb > ta ? ya + (yb - ya) * (t - ta) / (tb - ta) : ya;
        mean += u[i];
    }
    mean /= m;

    int best_k = 1;
    double best_pow = -1.0;
    for (int k = 1; k <= m / 2; ++k) {
        std::complex<double> acc = 0.0;
        for (int i = 0; i < m; ++i)
            acc += (u[i] - mean) * std::polar(1.0, -2.0 * M_PI * k * i / m);
        const double p = std::norm(acc);
        if (p > best_pow) {
            best_pow = p;
            best_k = k;
        }
    }
    return 2.0 * M_PI * best_k / (m * step);
}

LmOutcome lm_fit(const LmResidualFn& residual_jac, std::vector<double> x0, int m,
                 const LmOptions& opts) {
    const int n = static_cast<int>(x0.size());
    LmOutcome out;
    out.x = std::move(x0);

    std::vector<double> r(m), jac(m * n), r_try(m), jac_try(m * n);
    std::vector<double> jtj(n * n), g(n), lhs(n * n), step, x_try(n);

    auto eval_chi2 = [&](const std::vector<double>& x, std::vector<double>& rr,
                         std::vector<double>& jj) {
        residual_jac(x, rr, jj);
        double c = 0.0;
        for (double v : rr) c += v * v;
        return c;
    };

    double chi2 = eval_chi2(out.x, r, jac);
    if (!std::isfinite(chi2)) return out;
    double lambda = opts.lambda0;

    for (out.iters = 0; out.iters < opts.max_iter; ++out.iters) {
        std::fill(jtj.begin(), jtj.end(), 0.0);
        std::fill(g.begin(), g.end(), 0.0);
        for (int i = 0; i < m; ++i)
            for (int a = 0; a < n; ++a) {
                g[a] += jac[i * n + a] * r[i];
                for (int b = a; b < n; ++b) jtj[a * n + b] += jac[i * n + a] * jac[i * n + b];
            }
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < a; ++b) jtj[a * n + b] = jtj[b * n + a];

        bool accepted = false;
        for (int tries = 0; tries < 40; ++tries) {
            lhs = jtj;
            for (int a = 0; a < n; ++a) lhs[a * n + a] += lambda * std::max(jtj[a * n + a], 1e-12);
            std::vector<double> rhs(n);
            for (int a = 0; a < n; ++a) rhs[a] = -g[a];
            if (!detail::solve_linear(lhs, rhs, step, n)) {
                lambda *= 10.0;
                continue;
            }
            for (int a = 0; a < n; ++a) x_try[a] = out.x[a] + step[a];
            const double chi2_try = eval_chi2(x_try, r_try, jac_try);
            if (std::isfinite(chi2_try) && chi2_try <= chi2) {
                double step_norm = 0.0, x_norm = 0.0;
                for (int a = 0; a < n; ++a) {
                    step_norm += step[a] * step[a];
                    x_norm += out.x[a] * out.x[a];
                }
                const bool small_f = (chi2 - chi2_try) <= opts.ftol * std::max(1.0, chi2);
                const bool small_x = std::sqrt(step_norm) <= opts.xtol * (1.0 + std::sqrt(x_norm));
                out.x = x_try;
                chi2 = chi2_try;
                r.swap(r_try);
                jac.swap(jac_try);
                lambda = std::max(lambda * 0.3, 1e-12);
                accepted = true;
                if (small_f && small_x) out.converged = true;
                break;
            }
            lambda *= 10.0;
            if (lambda > 1e14) break;
        }
        if (!accepted || out.converged) {
            if (!accepted) out.converged = true;  // stuck at a (local) minimum
            break;
        }
    }

    out.chi2 = chi2;

    // Covariance from the unshifted normal matrix at the solution.
    std::fill(jtj.begin(), jtj.end(), 0.0);
    for (int i = 0; i < m; ++i)
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b) jtj[a * n + b] += jac[i * n + a] * jac[i * n + b];
    out.cov.assign(n * n, 0.0);
    bool cov_ok = true;
    for (int col = 0; col < n && cov_ok; ++col) {
        std::vector<double> e(n, 0.0), sol;
        e[col] = 1.0;
        cov_ok = detail::solve_linear(jtj, e, sol, n);
        if (cov_ok)
            for (int a = 0; a < n; ++a) out.cov[a * n + col] = sol[a];
    }
    out.errors.assign(n, 0.0);
    if (cov_ok)
        for (int a = 0; a < n; ++a)
            out.errors[a] = out.cov[a * n + a] > 0.0 ? std::sqrt(out.cov[a * n + a]) : 0.0;
    else
        out.cov.clear();
    return out;
}

FitResult fit_damped_sinusoid(const std::vector<double>& times, const std::vector<double>& values,
                              const std::vector<double>& errors) {
    const int m = static_cast<int>(times.size());
    if (values.size() != times.size() || errors.size() != times.size())
        throw std::invalid_argument("fit_damped_sinusoid: length mismatch");
    if (m < 6) throw std::invalid_argument("fit_damped_sinusoid: need at least 6 points");
    {
        std::vector<double> ts = times;
        std::sort(ts.begin(), ts.end());
        if (std::adjacent_find(ts.begin(), ts.end()) != ts.end())
            throw std::invalid_argument("fit_damped_sinusoid: duplicate times");
    }
    std::vector<double> w(m);
    for (int i = 0; i < m; ++i) {
        if (!(errors[i] > 0.0)) throw std::invalid_argument("fit_damped_sinusoid: errors must be > 0");
        w[i] = 1.0 / errors[i];
    }

    const double span = *std::max_element(times.begin(), times.end()) -
                        *std::min_element(times.begin(), times.end());
    const double omega_guess = detail::periodogram_peak(times, values);

    std::vector<double> omega_starts;
    if (omega_guess > 0.0)
        omega_starts = {0.5 * omega_guess, omega_guess, 2.0 * omega_guess};
    else
        omega_starts = {2.0 * M_PI / std::max(span, 1e-6)};
    const double rate_starts[3] = {0.0, 1.0 / std::max(span, 1e-6), 3.0 / std::max(span, 1e-6)};

    auto residual_jac = [&](const std::vector<double>& x, std::vector<double>& r,
                            std::vector<double>& jac) { residuals_damped(times, values, w, x, r, jac); };

    bool have_best = false;
    LmOutcome best;
    for (double om : omega_starts) {
        for (double rate : rate_starts) {
            double lin[3];
            if (!seed_linear(times, values, w, om, rate, lin)) continue;
            std::vector<double> x0 = {lin[0], std::hypot(lin[1], lin[2]), om,
                                      std::atan2(lin[2], lin[1]), rate};
            LmOutcome run = lm_fit(residual_jac, std::move(x0), m);
            if (!run.converged || !std::isfinite(run.chi2) || run.errors.empty()) continue;
            if (!have_best || run.chi2 < best.chi2) {
                best = std::move(run);
                have_best = true;
            }
        }
    }
    if (!have_best) throw std::runtime_error("fit_damped_sinusoid: no start converged");

    // Canonicalize: omega >= 0, A >= 0, phi in (-pi, pi].
    double C = best.x[0], A = best.x[1], omega = best.x[2], phi = best.x[3], rate = best.x[4];
    if (omega < 0.0) {
        omega = -omega;
        A = -A;
        phi = -phi;
    }
    if (A < 0.0) {
        A = -A;
        phi += M_PI;
    }
    phi = wrap_angle(phi);

    FitResult fr;
    fr.C = C;
    fr.A = A;
    fr.omega = omega;
    fr.phi = phi;
    fr.tau_unbounded = rate < rate_floor;
    fr.tau = fr.tau_unbounded ? tau_cap : 1.0 / rate;
    fr.err_C = best.errors[0];
    fr.err_A = best.errors[1];
    fr.err_omega = best.errors[2];
    fr.err_phi = best.errors[3];
    fr.err_tau = fr.tau_unbounded ? std::numeric_limits<double>::infinity()
                                  : best.errors[4] * fr.tau * fr.tau;
    fr.chi2 = best.chi2;
    fr.dof = m - 5;
    fr.chi2_per_dof = fr.dof > 0 ? fr.chi2 / fr.dof : std::numeric_limits<double>::quiet_NaN();
    return fr;
}

}  // namespace qsim
