#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <bit>
#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "qsim/diagonal.hpp"
#include "qsim/hamiltonian.hpp"
#include "qsim/interactions.hpp"
#include "qsim/register.hpp"
#include "qsim/units.hpp"

using namespace qsim;

namespace {

// Independent dense construction straight from the model definition:
//   H = sum_j (omega/2)(e^{i phi}|g><r|_j + h.c.) - delta sum_j n_j
//       + sum_{j<k} V_jk n_j n_k
// with basis bit j = 1 meaning atom j in |r>.
std::vector<std::vector<cplx>> dense_hamiltonian(const AtomRegister& reg, double omega,
                                                 double delta, double phi, double c6) {
    const int n = static_cast<int>(reg.size());
    const std::size_t dim = std::size_t{1} << n;
    std::vector<std::vector<cplx>> h(dim, std::vector<cplx>(dim, 0.0));
    for (std::size_t b = 0; b < dim; ++b) {
        double diag = -delta * static_cast<double>(std::popcount(b));
        for (int j = 0; j < n; ++j)
            for (int k = j + 1; k < n; ++k)
                if ((b >> j & 1) && (b >> k & 1)) diag += c6 / std::pow(reg.distance(j, k), 6.0);
        h[b][b] = diag;
        for (int j = 0; j < n; ++j) {
            const std::size_t flipped = b ^ (std::size_t{1} << j);
            if ((b >> j & 1) == 0)  // <b|H|flipped> couples |g>_j to |r>_j
                h[b][flipped] = 0.5 * omega * cplx{std::cos(phi), std::sin(phi)};
            else
                h[b][flipped] = 0.5 * omega * cplx{std::cos(phi), -std::sin(phi)};
        }
    }
    return h;
}

std::vector<cplx> dense_apply(const std::vector<std::vector<cplx>>& h,
                              const std::vector<cplx>& src) {
    std::vector<cplx> out(src.size(), 0.0);
    for (std::size_t r = 0; r < src.size(); ++r)
        for (std::size_t c = 0; c < src.size(); ++c) out[r] += h[r][c] * src[c];
    return out;
}

std::vector<cplx> random_state(int n, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss;
    std::vector<cplx> amp(std::size_t{1} << n);
    for (auto& a : amp) a = {gauss(rng), gauss(rng)};
    return amp;
}

}  // namespace

TEST_CASE("matrix-free apply agrees with a dense matrix built from the definition") {
    AtomRegister reg({{0.0, 0.0}, {7.0, 0.0}, {7.0, 7.0}, {0.0, 7.0}, {3.5, 3.5}});
    const double omega = 1.7 * two_pi, delta = -0.9 * two_pi, phi = 0.6;
    auto cache = diagonal_energies(interaction_table(reg));
    auto h = dense_hamiltonian(reg, omega, delta, phi, c6_default);

    auto src = random_state(5, 11);
    std::vector<cplx> dst(src.size());
    apply_hamiltonian(dst, src, cache, omega, delta, phi);
    auto want = dense_apply(h, src);
    for (std::size_t i = 0; i < dst.size(); ++i) {
        CHECK(std::abs(dst[i] - want[i]) < 1e-9 * (1.0 + std::abs(want[i])));
    }
}

TEST_CASE("dense matrix is hermitian for arbitrary phase") {
    AtomRegister reg({{0.0, 0.0}, {5.5, 0.0}, {2.0, 6.0}});
    auto h = dense_hamiltonian(reg, 2.1 * two_pi, 1.3 * two_pi, -1.1, c6_default);
    for (std::size_t r = 0; r < h.size(); ++r)
        for (std::size_t c = 0; c < h.size(); ++c)
            CHECK(std::abs(h[r][c] - std::conj(h[c][r])) < 1e-12);
}

TEST_CASE("single-atom matrix elements follow the phase convention") {
    AtomRegister reg({{0.0, 0.0}});
    auto cache = diagonal_energies(interaction_table(reg));
    const double omega = 2.0, delta = 0.7, phi = 0.9;

    // column |r> = basis index 1: <g|H|r> = (omega/2) e^{+i phi}
    std::vector<cplx> src = {0.0, 1.0}, dst(2);
    apply_hamiltonian(dst, src, cache, omega, delta, phi);
    CHECK(std::abs(dst[0] - 0.5 * omega * cplx{std::cos(phi), std::sin(phi)}) < 1e-15);
    CHECK(std::abs(dst[1] - cplx{-delta, 0.0}) < 1e-15);

    // column |g>: <r|H|g> is the conjugate coupling, diagonal zero
    src = {1.0, 0.0};
    apply_hamiltonian(dst, src, cache, omega, delta, phi);
    CHECK(std::abs(dst[1] - 0.5 * omega * cplx{std::cos(phi), -std::sin(phi)}) < 1e-15);
    CHECK(std::abs(dst[0]) < 1e-15);
}

TEST_CASE("pair interaction lands only on the doubly excited state") {
    const double x = 6.2;
    AtomRegister reg({{0.0, 0.0}, {x, 0.0}});
    auto cache = diagonal_energies(interaction_table(reg));
    const double vdw = c6_default / std::pow(x, 6.0);

    CHECK(cache.energies[0b00] == 0.0);
    CHECK(cache.energies[0b01] == 0.0);
    CHECK(cache.energies[0b10] == 0.0);
    CHECK(cache.energies[0b11] == doctest::Approx(vdw).epsilon(1e-14));

    // with drive off, H|11> = (V - 2 delta)|11>
    const double delta = 1.4 * two_pi;
    std::vector<cplx> src = {0.0, 0.0, 0.0, 1.0}, dst(4);
    apply_hamiltonian(dst, src, cache, 0.0, delta, 0.0);
    CHECK(std::abs(dst[3] - cplx{vdw - 2.0 * delta, 0.0}) < 1e-9);
}

TEST_CASE("interaction scale factor multiplies only the diagonal cache") {
    AtomRegister reg({{0.0, 0.0}, {6.0, 0.0}});
    auto cache = diagonal_energies(interaction_table(reg));
    std::vector<cplx> src = random_state(2, 3), a(4), b(4);
    apply_hamiltonian(a, src, cache, 0.0, 0.0, 0.0, 0.25);
    apply_hamiltonian(b, src, cache, 0.0, 0.0, 0.0, 1.0);
    for (std::size_t i = 0; i < 4; ++i) CHECK(std::abs(a[i] - 0.25 * b[i]) < 1e-12);
}

TEST_CASE("blockade radius matches the published resonant-drive value") {
    // Omega = 2 pi x 1.8 MHz, Delta = 0: R_b = 8.85 um
    CHECK(blockade_radius(1.8 * two_pi, 0.0) == doctest::Approx(8.85).epsilon(0.05 / 8.85));
}

TEST_CASE("blockade radius satisfies its defining equation") {
    const double omega = 2.3 * two_pi, delta = -1.1 * two_pi;
    const double rb = blockade_radius(omega, delta);
    CHECK(c6_default / std::pow(rb, 6.0) ==
          doctest::Approx(std::hypot(omega, delta)).epsilon(1e-12));
    // interaction dominates inside, drive dominates outside
    CHECK(c6_default / std::pow(0.9 * rb, 6.0) > std::hypot(omega, delta));
    CHECK(c6_default / std::pow(1.1 * rb, 6.0) < std::hypot(omega, delta));
    CHECK_THROWS_AS(blockade_radius(0.0, 0.0), std::invalid_argument);
}

TEST_CASE("interaction table is symmetric with zero diagonal and rejects coincident atoms") {
    AtomRegister reg({{0.0, 0.0}, {4.0, 0.0}, {0.0, 9.0}});
    auto table = interaction_table(reg);
    for (int j = 0; j < table.n; ++j) {
        CHECK(table.at(j, j) == 0.0);
        for (int k = 0; k < table.n; ++k) CHECK(table.at(j, k) == table.at(k, j));
    }
    CHECK(table.at(0, 1) == doctest::Approx(c6_default / std::pow(4.0, 6.0)));

    AtomRegister bad({{1.0, 1.0}, {1.0, 1.0}});
    CHECK_THROWS_AS(interaction_table(bad), std::invalid_argument);
}

TEST_CASE("apply_hamiltonian validates dimensions and atom budget") {
    AtomRegister reg({{0.0, 0.0}, {6.0, 0.0}});
    auto cache = diagonal_energies(interaction_table(reg));
    std::vector<cplx> src(3), dst(4);
    CHECK_THROWS_AS(apply_hamiltonian(dst, src, cache, 1.0, 0.0, 0.0), std::invalid_argument);

    InteractionTable huge;
    huge.n = max_atoms + 1;
    CHECK_THROWS_AS(diagonal_energies(huge), std::invalid_argument);
}
