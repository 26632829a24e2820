#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "qsim/interactions.hpp"

namespace qsim {

inline constexpr int max_atoms = 24;  // brute-force / state-vector budget

// Interaction energy of every bitstring: entry b = sum over set-bit pairs of
// V_jk.  Detuning is applied at evaluation time, so the cache never depends on
// the schedule and is shared across steps and optimizer iterations.
struct DiagonalCache {
    int n = 0;
    std::vector<double> energies;  // length 2^n, rad/us
};

inline DiagonalCache diagonal_energies(const InteractionTable& table) {
    if (table.n > max_atoms)
        throw std::invalid_argument("diagonal_energies: atom count exceeds budget");
    DiagonalCache cache;
    cache.n = table.n;
    const std::size_t dim = std::size_t{1} << table.n;
    cache.energies.assign(dim, 0.0);
    for (int j = 0; j < table.n; ++j) {
        for (int k = j + 1; k < table.n; ++k) {
            const double vjk = table.at(j, k);
            if (vjk == 0.0) continue;
            const std::uint64_t mask = (std::uint64_t{1} << j) | (std::uint64_t{1} << k);
            for (std::uint64_t b = 0; b < dim; ++b)
                if ((b & mask) == mask) cache.energies[b] += vjk;
        }
    }
    return cache;
}

}  // namespace qsim
