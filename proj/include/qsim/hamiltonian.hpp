#pragma once

#include <bit>
#include <cstdint>
#include <stdexcept>

#include "qsim/diagonal.hpp"
#include "qsim/state.hpp"

namespace qsim {

// dst = H psi without materializing H:
//   diagonal   (scale * E_int[b] - delta * popcount(b)) psi[b]
//   off-diag   (omega/2) (e^{+i phi} on |r><g|^dagger side) psi[b ^ (1<<j)]
// i.e. <g|H|r> = (omega/2) e^{+i phi}, <r|H|g> = (omega/2) e^{-i phi}.
// `scale` multiplies the interaction cache only; the commutator-free
// integrator uses fractional weights of the same Hamiltonian structure.
inline void apply_hamiltonian(std::vector<cplx>& dst, const std::vector<cplx>& src,
                              const DiagonalCache& cache, double omega, double delta, double phi,
                              double scale = 1.0) {
    const std::size_t dim = std::size_t{1} << cache.n;
    if (src.size() != dim || dst.size() != dim)
        throw std::invalid_argument("apply_hamiltonian: dimension mismatch");
    for (std::uint64_t b = 0; b < dim; ++b) {
        const double diag =
            scale * cache.energies[b] - delta * static_cast<double>(std::popcount(b));
        dst[b] = diag * src[b];
    }
    const double half = 0.5 * omega;
    if (half != 0.0) {
        const cplx up{half * std::cos(phi), half * std::sin(phi)};    // recv at bit=0
        const cplx down{half * std::cos(phi), -half * std::sin(phi)}; // recv at bit=1
        for (int j = 0; j < cache.n; ++j) {
            const std::size_t step = std::size_t{1} << j;
            for (std::size_t base = 0; base < dim; base += 2 * step) {
                for (std::size_t i = base; i < base + step; ++i) {
                    dst[i] += up * src[i + step];
                    dst[i + step] += down * src[i];
                }
            }
        }
    }
}

inline QuantumState apply_hamiltonian(const QuantumState& state, const DiagonalCache& cache,
                                      double omega, double delta, double phi) {
    QuantumState out;
    out.n = state.n;
    out.amp.resize(state.amp.size());
    apply_hamiltonian(out.amp, state.amp, cache, omega, delta, phi);
    return out;
}

}  // namespace qsim
