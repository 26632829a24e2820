#include "qsim/integrator.hpp"

#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>

#include "qsim/hamiltonian.hpp"
#include "qsim/interactions.hpp"

namespace qsim {
namespace detail {

bool symtridiag_eig(std::vector<double>& d, std::vector<double>& e, std::vector<double>& z,
                    int m) {
    z.assign(static_cast<std::size_t>(m) * m, 0.0);
    for (int i = 0; i < m; ++i) z[i + static_cast<std::size_t>(m) * i] = 1.0;
    if (m == 1) return true;
    e.resize(m);
    e[m - 1] = 0.0;

    for (int l = 0; l < m; ++l) {
        int iter = 0;
        int mm;
        do {
            for (mm = l; mm < m - 1; ++mm) {
                const double dd = std::abs(d[mm]) + std::abs(d[mm + 1]);
                if (std::abs(e[mm]) <= 1e-16 * dd) break;
            }
            if (mm != l) {
                if (iter++ == 60) return false;
                double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
                double r = std::hypot(g, 1.0);
                g = d[mm] - d[l] + e[l] / (g + std::copysign(r, g));
                double s = 1.0, c = 1.0, p = 0.0;
                int i;
                for (i = mm - 1; i >= l; --i) {
                    double f = s * e[i];
                    const double b = c * e[i];
                    r = std::hypot(f, g);
                    e[i + 1] = r;
                    if (r == 0.0) {
                        d[i + 1] -= p;
                        e[mm] = 0.0;
                        break;
                    }
                    s = f / r;
                    c = g / r;
                    g = d[i + 1] - p;
                    r = (d[i] - g) * s + 2.0 * c * b;
                    p = s * r;
                    d[i + 1] = g + p;
                    g = c * r - b;
                    for (int k = 0; k < m; ++k) {
                        const std::size_t ci = static_cast<std::size_t>(m) * i;
                        const std::size_t cj = ci + m;
                        f = z[k + cj];
                        z[k + cj] = s * z[k + ci] + c * f;
                        z[k + ci] = c * z[k + ci] - s * f;
                    }
                }
                if (r == 0.0 && i >= l) continue;
                d[l] -= p;
                e[l] = g;
                e[mm] = 0.0;
            }
        } while (mm != l);
    }
    return true;
}

namespace {

// Krylov workspace; reused across every exponential of an evolution.
struct KrylovSpace {
    std::vector<std::vector<cplx>> basis;
    std::vector<cplx> w;
    std::vector<double> alpha, beta, eval, evec, esub;
    std::vector<cplx> small;

    explicit KrylovSpace(std::size_t dim, int mmax)
        : basis(mmax + 1), w(dim), alpha(mmax), beta(mmax) {
        for (auto& v : basis) v.resize(dim);
    }
};

// psi <- exp(-i h H(omega, delta, phi; scale)) psi via Lanczos.  Residual
// estimate h * beta_m * |last component| decides the subspace size.
void krylov_expm(std::vector<cplx>& psi, KrylovSpace& ws, const DiagonalCache& cache, double h,
                 double omega, double delta, double phi, double scale, double tol, int mmax) {
    const std::size_t dim = psi.size();
    double nrm = 0.0;
    for (const auto& a : psi) nrm += std::norm(a);
    nrm = std::sqrt(nrm);
    if (nrm == 0.0) return;
    const double inv = 1.0 / nrm;
    for (std::size_t i = 0; i < dim; ++i) ws.basis[0][i] = psi[i] * inv;

    int m = 0;
    bool done = false;
    for (int k = 0; k < mmax && !done; ++k) {
        apply_hamiltonian(ws.w, ws.basis[k], cache, omega, delta, phi, scale);
        if (k > 0) {
            const double b = ws.beta[k - 1];
            const auto& prev = ws.basis[k - 1];
            for (std::size_t i = 0; i < dim; ++i) ws.w[i] -= b * prev[i];
        }
        double a = 0.0;
        for (std::size_t i = 0; i < dim; ++i)
            a += ws.basis[k][i].real() * ws.w[i].real() + ws.basis[k][i].imag() * ws.w[i].imag();
        ws.alpha[k] = a;
        {
            const auto& cur = ws.basis[k];
            for (std::size_t i = 0; i < dim; ++i) ws.w[i] -= a * cur[i];
        }
        double b2 = 0.0;
        for (const auto& x : ws.w) b2 += std::norm(x);
        const double b = std::sqrt(b2);
        ws.beta[k] = b;
        m = k + 1;

        ws.eval.assign(ws.alpha.begin(), ws.alpha.begin() + m);
        ws.esub.assign(ws.beta.begin(), ws.beta.begin() + m);
        if (!symtridiag_eig(ws.eval, ws.esub, ws.evec, m))
            throw std::runtime_error("krylov_expm: tridiagonal eigensolve failed");
        ws.small.assign(m, cplx{0.0, 0.0});
        for (int q = 0; q < m; ++q) {
            const double th = -h * ws.eval[q];
            const cplx ph{std::cos(th), std::sin(th)};
            const double w0 = ws.evec[0 + static_cast<std::size_t>(m) * q];
            for (int i = 0; i < m; ++i)
                ws.small[i] += ws.evec[i + static_cast<std::size_t>(m) * q] * ph * w0;
        }
        const double resid = std::abs(h) * b * std::abs(ws.small[m - 1]);
        if (resid <= tol || b <= 1e-14 || k == mmax - 1) {
            if (resid > tol && b > 1e-14)
                throw std::runtime_error("krylov_expm: no convergence within subspace budget");
            done = true;
        } else {
            const double binv = 1.0 / b;
            auto& next = ws.basis[k + 1];
            for (std::size_t i = 0; i < dim; ++i) next[i] = ws.w[i] * binv;
        }
    }
    for (std::size_t i = 0; i < dim; ++i) {
        cplx acc{0.0, 0.0};
        for (int q = 0; q < m; ++q) acc += ws.small[q] * ws.basis[q][i];
        psi[i] = nrm * acc;
    }
}

// Gauss-Legendre nodes and the 4th-order commutator-free weights.
constexpr double sqrt3 = 1.7320508075688772935;
constexpr double gauss_c1 = 0.5 - sqrt3 / 6.0;
constexpr double gauss_c2 = 0.5 + sqrt3 / 6.0;
constexpr double cf_a1 = 0.25 + sqrt3 / 6.0;
constexpr double cf_a2 = 0.25 - sqrt3 / 6.0;

struct EffControls {
    double omega, delta, phi;
};

// w1 * H(s1) + w2 * H(s2) folded back into (omega, delta, phi) form with an
// interaction scale of w1 + w2; the off-diagonal combination is a single
// complex coefficient, so a varying phase track stays exact.
EffControls combine(double w1, const ControlSample& s1, double w2, const ControlSample& s2) {
    const cplx z = w1 * s1.omega * cplx{std::cos(s1.phi), std::sin(s1.phi)} +
                   w2 * s2.omega * cplx{std::cos(s2.phi), std::sin(s2.phi)};
    return {std::abs(z), w1 * s1.delta + w2 * s2.delta, std::arg(z)};
}

void rk4_step(std::vector<cplx>& psi, std::vector<std::vector<cplx>>& work,
              const DiagonalCache& cache, const PulseSchedule& sched, double t0, double h) {
    auto deriv = [&](const std::vector<cplx>& in, std::vector<cplx>& out, double t) {
        const auto s = schedule_value_at(sched, t);
        apply_hamiltonian(out, in, cache, s.omega, s.delta, s.phi);
        for (auto& x : out) x = cplx{x.imag(), -x.real()};  // multiply by -i
    };
    auto& k1 = work[0];
    auto& k2 = work[1];
    auto& k3 = work[2];
    auto& k4 = work[3];
    auto& tmp = work[4];
    const std::size_t dim = psi.size();
    deriv(psi, k1, t0);
    for (std::size_t i = 0; i < dim; ++i) tmp[i] = psi[i] + 0.5 * h * k1[i];
    deriv(tmp, k2, t0 + 0.5 * h);
    for (std::size_t i = 0; i < dim; ++i) tmp[i] = psi[i] + 0.5 * h * k2[i];
    deriv(tmp, k3, t0 + 0.5 * h);
    for (std::size_t i = 0; i < dim; ++i) tmp[i] = psi[i] + h * k3[i];
    deriv(tmp, k4, t0 + h);
    const double w = h / 6.0;
    for (std::size_t i = 0; i < dim; ++i)
        psi[i] += w * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
}

}  // namespace
}  // namespace detail

QuantumState evolve(const DiagonalCache& cache, const PulseSchedule& schedule,
                    const IntegratorConfig& config) {
    if (config.dt <= 0.0) throw std::invalid_argument("evolve: dt must be positive");
    const bool cf4 = config.method == "cf4";
    if (!cf4 && config.method != "rk4")
        throw std::invalid_argument("evolve: unknown method " + config.method);

    QuantumState state = QuantumState::ground(cache.n);
    const std::size_t dim = state.amp.size();

    detail::KrylovSpace ws(cf4 ? dim : 0, cf4 ? config.krylov_max : 0);
    std::vector<std::vector<cplx>> rk_work;
    if (!cf4) rk_work.assign(5, std::vector<cplx>(dim));

    const std::vector<double> segs = knot_times(schedule);
    for (std::size_t si = 0; si + 1 < segs.size(); ++si) {
        const double a = segs[si], b = segs[si + 1];
        const int nst = std::max(1, static_cast<int>(std::ceil((b - a) / config.dt - 1e-12)));
        const double h = (b - a) / nst;
        for (int s = 0; s < nst; ++s) {
            const double t0 = a + s * h;
            if (cf4) {
                const auto s1 = schedule_value_at(schedule, t0 + detail::gauss_c1 * h);
                const auto s2 = schedule_value_at(schedule, t0 + detail::gauss_c2 * h);
                const auto first = detail::combine(detail::cf_a1, s1, detail::cf_a2, s2);
                const auto second = detail::combine(detail::cf_a2, s1, detail::cf_a1, s2);
                detail::krylov_expm(state.amp, ws, cache, h, first.omega, first.delta, first.phi,
                                    0.5, config.conv_tol, config.krylov_max);
                detail::krylov_expm(state.amp, ws, cache, h, second.omega, second.delta,
                                    second.phi, 0.5, config.conv_tol, config.krylov_max);
            } else {
                detail::rk4_step(state.amp, rk_work, cache, schedule, t0, h);
            }
        }
    }
    const double drift = std::abs(state.norm() - 1.0);
    if (drift > config.norm_tol)
        throw std::runtime_error("evolve: norm drift " + std::to_string(drift) +
                                 " exceeds tolerance");
    return state;
}

QuantumState evolve(const AtomRegister& reg, const PulseSchedule& schedule,
                    const IntegratorConfig& config, const DeviceProfile& profile) {
    const DiagonalCache cache = diagonal_energies(interaction_table(reg, profile.c6));
    return evolve(cache, schedule, config);
}

}  // namespace qsim
