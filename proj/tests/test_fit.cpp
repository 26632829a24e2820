#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "qsim/fit.hpp"
#include "qsim/units.hpp"

using namespace qsim;

namespace {

std::vector<double> grid(double t0, double t1, int m) {
    std::vector<double> t(m);
    for (int i = 0; i < m; ++i) t[i] = t0 + (t1 - t0) * i / (m - 1);
    return t;
}

std::vector<double> model_values(const std::vector<double>& t, double C, double A, double omega,
                                 double phi, double tau) {
    std::vector<double> y(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) y[i] = damped_sinusoid(t[i], C, A, omega, phi, tau);
    return y;
}

}  // namespace

TEST_CASE("damped_sinusoid evaluates the closed form") {
    CHECK(damped_sinusoid(0.0, 0.5, 0.3, 2.0, 0.0, 4.0) == doctest::Approx(0.5));
    const double t = 1.3, C = 0.2, A = 0.45, om = 5.1, phi = -0.7, tau = 2.2;
    CHECK(damped_sinusoid(t, C, A, om, phi, tau) ==
          doctest::Approx(C + A * std::sin(om * t + phi) * std::exp(-t / tau)).epsilon(1e-15));
}

TEST_CASE("noiseless data is recovered to solver precision") {
    const double C = 0.5, A = 0.42, omega = 1.8 * two_pi, phi = -1.2, tau = 3.2;
    auto t = grid(0.05, 4.0, 80);
    auto y = model_values(t, C, A, omega, phi, tau);
    std::vector<double> err(t.size(), 0.01);
    auto fr = fit_damped_sinusoid(t, y, err);
    CHECK(fr.C == doctest::Approx(C).epsilon(1e-7));
    CHECK(fr.A == doctest::Approx(A).epsilon(1e-7));
    CHECK(fr.omega == doctest::Approx(omega).epsilon(1e-7));
    CHECK(fr.phi == doctest::Approx(phi).epsilon(1e-6));
    CHECK(fr.tau == doctest::Approx(tau).epsilon(1e-5));
    CHECK(fr.chi2 < 1e-10);
    CHECK(fr.dof == 75);
    CHECK_FALSE(fr.tau_unbounded);
}

TEST_CASE("fit result is canonical: positive amplitude, wrapped phase") {
    // data generated with negative amplitude; sin identity folds it into phi
    const double C = 0.1, A = -0.3, omega = 2.0 * two_pi, phi = 0.4, tau = 5.0;
    auto t = grid(0.0, 3.0, 60);
    auto y = model_values(t, C, A, omega, phi, tau);
    std::vector<double> err(t.size(), 0.005);
    auto fr = fit_damped_sinusoid(t, y, err);
    CHECK(fr.A == doctest::Approx(0.3).epsilon(1e-6));
    CHECK(fr.omega == doctest::Approx(omega).epsilon(1e-7));
    CHECK(fr.phi == doctest::Approx(phi - M_PI).epsilon(1e-5));
    CHECK(fr.phi > -M_PI);
    CHECK(fr.phi <= M_PI);
    CHECK(fr.A >= 0.0);
    CHECK(fr.omega >= 0.0);
}

TEST_CASE("undamped data reports an unbounded lifetime") {
    auto t = grid(0.0, 4.0, 50);
    auto y = model_values(t, 0.5, 0.5, 1.5 * two_pi, -M_PI / 2, 1e300);
    std::vector<double> err(t.size(), 0.01);
    auto fr = fit_damped_sinusoid(t, y, err);
    CHECK(fr.tau_unbounded);
    CHECK(fr.tau == doctest::Approx(1e9));
    CHECK(std::isinf(fr.err_tau));
    CHECK(fr.omega == doctest::Approx(1.5 * two_pi).epsilon(1e-8));
}

TEST_CASE("constant data fits with near-zero amplitude") {
    auto t = grid(0.0, 2.0, 40);
    std::vector<double> y(t.size(), 0.37), err(t.size(), 0.01);
    auto fr = fit_damped_sinusoid(t, y, err);
    CHECK(fr.C == doctest::Approx(0.37).epsilon(1e-9));
    CHECK(fr.A < 1e-8);
    CHECK(fr.chi2 < 1e-12);
}

TEST_CASE("noisy recovery stays within quoted uncertainties") {
    const double C = 0.48, A = 0.45, omega = 1.8 * two_pi, phi = -M_PI / 2, tau = 4.5;
    auto t = grid(0.05, 4.0, 100);
    auto clean = model_values(t, C, A, omega, phi, tau);
    std::mt19937_64 rng(12345);
    std::normal_distribution<double> gauss(0.0, 0.02);
    std::vector<double> y(clean), err(t.size(), 0.02);
    for (auto& v : y) v += gauss(rng);
    auto fr = fit_damped_sinusoid(t, y, err);
    CHECK(std::abs(fr.omega - omega) < 4.0 * fr.err_omega);
    CHECK(std::abs(fr.A - A) < 4.0 * fr.err_A);
    CHECK(std::abs(fr.C - C) < 4.0 * fr.err_C);
    CHECK(std::abs(fr.tau - tau) < 4.0 * fr.err_tau);
    CHECK(fr.chi2_per_dof > 0.3);
    CHECK(fr.chi2_per_dof < 2.5);
}

TEST_CASE("binomial error bars use the variance formula with a floor") {
    auto err = binomial_errors({0.5, 0.1, 0.0, 1.0}, 80);
    CHECK(err[0] == doctest::Approx(std::sqrt(0.25 / 80.0)).epsilon(1e-12));
    CHECK(err[1] == doctest::Approx(std::sqrt(0.09 / 80.0)).epsilon(1e-12));
    const double floor = std::sqrt(0.25 / 80.0) / 10.0;
    CHECK(err[2] == doctest::Approx(floor).epsilon(1e-12));
    CHECK(err[3] == doctest::Approx(floor).epsilon(1e-12));
    CHECK_THROWS_AS(binomial_errors({0.5}, 0), std::invalid_argument);
    CHECK_THROWS_AS(binomial_errors({1.5}, 10), std::invalid_argument);
}

TEST_CASE("chi_squared matches a hand computation") {
    std::vector<double> y = {1.0, 2.0, 3.0, 4.0, 5.0, 6.0};
    std::vector<double> f = {1.1, 1.9, 3.0, 4.2, 5.0, 5.8};
    std::vector<double> e = {0.1, 0.1, 0.2, 0.2, 0.1, 0.2};
    auto st = chi_squared(y, f, e);
    CHECK(st.chi2 == doctest::Approx(1.0 + 1.0 + 0.0 + 1.0 + 0.0 + 1.0).epsilon(1e-12));
    CHECK(st.dof == 1);  // 6 points - 5 parameters
    CHECK(st.ratio == doctest::Approx(st.chi2 / 1.0));
    CHECK_THROWS_AS(chi_squared(y, f, {0.1}), std::invalid_argument);
}

TEST_CASE("generic lm_fit solves weighted linear regression with exact covariance") {
    // residuals r_i = y_i - (a + b x_i); J columns d r/d a = -1, d r/d b = -x_i
    std::vector<double> xs = {0.0, 1.0, 2.0, 3.0, 4.0};
    std::vector<double> ys;
    for (double x : xs) ys.push_back(0.7 + 0.3 * x);
    auto fn = [&](const std::vector<double>& p, std::vector<double>& r, std::vector<double>& jac) {
        for (std::size_t i = 0; i < xs.size(); ++i) {
            r[i] = ys[i] - (p[0] + p[1] * xs[i]);
            jac[i * 2 + 0] = -1.0;
            jac[i * 2 + 1] = -xs[i];
        }
    };
    auto out = lm_fit(fn, {0.0, 0.0}, static_cast<int>(xs.size()));
    REQUIRE(out.converged);
    CHECK(out.x[0] == doctest::Approx(0.7).epsilon(1e-10));
    CHECK(out.x[1] == doctest::Approx(0.3).epsilon(1e-10));
    // (J^T J) = [[N, Sx], [Sx, Sxx]]; closed-form inverse diagonal
    const double n = 5.0, sx = 10.0, sxx = 30.0, det = n * sxx - sx * sx;
    CHECK(out.errors[0] == doctest::Approx(std::sqrt(sxx / det)).epsilon(1e-8));
    CHECK(out.errors[1] == doctest::Approx(std::sqrt(n / det)).epsilon(1e-8));
    CHECK(out.chi2 < 1e-20);
}

TEST_CASE("solve_linear handles a known system and flags singular ones") {
    // A = [[2,1,0],[1,3,1],[0,1,2]], b = [3,6,5] -> x = [1,1,2]
    std::vector<double> a = {2, 1, 0, 1, 3, 1, 0, 1, 2};
    std::vector<double> b = {3, 6, 5};
    std::vector<double> x;
    REQUIRE(detail::solve_linear(a, b, x, 3));
    CHECK(x[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(x[1] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(x[2] == doctest::Approx(2.0).epsilon(1e-12));

    std::vector<double> sing = {1, 2, 3, 2, 4, 6, 1, 1, 1};
    CHECK_FALSE(detail::solve_linear(sing, b, x, 3));
}

TEST_CASE("periodogram finds the dominant frequency") {
    const double omega = 1.8 * two_pi;
    auto t = grid(0.0, 4.0, 120);
    std::vector<double> y;
    for (double ti : t) y.push_back(0.5 - 0.5 * std::cos(omega * ti));
    const double peak = detail::periodogram_peak(t, y);
    CHECK(peak == doctest::Approx(omega).epsilon(0.15));
    CHECK(detail::periodogram_peak({1.0}, {2.0}) == 0.0);
}

TEST_CASE("fit input validation") {
    std::vector<double> t = {0, 1, 2, 3, 4};
    std::vector<double> y = {0, 1, 0, 1, 0};
    std::vector<double> e(5, 0.1);
    CHECK_THROWS_AS(fit_damped_sinusoid(t, y, e), std::invalid_argument);  // < 6 points
    auto t6 = grid(0.0, 1.0, 6);
    std::vector<double> y6(6, 0.1), e6(6, 0.1);
    auto tdup = t6;
    tdup[3] = tdup[2];
    CHECK_THROWS_AS(fit_damped_sinusoid(tdup, y6, e6), std::invalid_argument);
    std::vector<double> ebad(6, 0.0);
    CHECK_THROWS_AS(fit_damped_sinusoid(t6, y6, ebad), std::invalid_argument);
}
