#pragma once

#include <string>
#include <vector>

#include "qsim/diagonal.hpp"
#include "qsim/profile.hpp"
#include "qsim/register.hpp"
#include "qsim/schedule.hpp"
#include "qsim/state.hpp"

namespace qsim {

// method "cf4": fixed-step 4th-order commutator-free scheme; each step applies
// two Hamiltonian exponentials (Krylov) built from the two Gauss nodes of the
// step, so piecewise-linear controls are integrated at full order and the norm
// is preserved to machine precision.  method "rk4": classical Runge-Kutta on
// the same step grid, kept for cross-checks.
struct IntegratorConfig {
    std::string method = "cf4";
    double dt = 0.001;       // us, base step; knot times always land on step boundaries
    double norm_tol = 1e-8;  // final-norm drift tolerance
    double conv_tol = 1e-13; // Krylov residual target per exponential
    int krylov_max = 48;
};

QuantumState evolve(const DiagonalCache& cache, const PulseSchedule& schedule,
                    const IntegratorConfig& config = {});

QuantumState evolve(const AtomRegister& reg, const PulseSchedule& schedule,
                    const IntegratorConfig& config = {}, const DeviceProfile& profile = {});

namespace detail {

// Eigendecomposition of a symmetric tridiagonal matrix (QL with implicit
// shifts).  d: diagonal in, eigenvalues out.  e: subdiagonal (e[i] couples i
// and i+1), destroyed.  z: column-major eigenvectors out, z[i + m*k] = <i|v_k>.
bool symtridiag_eig(std::vector<double>& d, std::vector<double>& e, std::vector<double>& z,
                    int m);

}  // namespace detail

}  // namespace qsim
