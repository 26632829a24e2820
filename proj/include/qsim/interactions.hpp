#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "qsim/register.hpp"
#include "qsim/units.hpp"

namespace qsim {

// Symmetric table of pairwise van der Waals energies V_jk = C6 / x_jk^6.
struct InteractionTable {
    int n = 0;
    std::vector<double> v;  // row-major n*n, diagonal zero, rad/us

    double at(int j, int k) const { return v[static_cast<std::size_t>(j) * n + k]; }
};

// Distance below which the interaction exceeds the drive scale sqrt(W^2+D^2).
inline double blockade_radius(double omega, double delta, double c6 = c6_default) {
    const double drive = std::hypot(omega, delta);
    if (drive == 0.0)
        throw std::invalid_argument("blockade_radius: omega and delta both zero");
    return std::pow(c6 / drive, 1.0 / 6.0);
}

inline InteractionTable interaction_table(const AtomRegister& reg, double c6 = c6_default) {
    const int n = static_cast<int>(reg.size());
    InteractionTable table;
    table.n = n;
    table.v.assign(static_cast<std::size_t>(n) * n, 0.0);
    for (int j = 0; j < n; ++j) {
        for (int k = j + 1; k < n; ++k) {
            const double d = reg.distance(j, k);
            if (d == 0.0)
                throw std::invalid_argument("interaction_table: coincident atoms " +
                                            std::to_string(j) + "," + std::to_string(k));
            const double d2 = d * d;
            const double vv = c6 / (d2 * d2 * d2);
            table.v[static_cast<std::size_t>(j) * n + k] = vv;
            table.v[static_cast<std::size_t>(k) * n + j] = vv;
        }
    }
    return table;
}

}  // namespace qsim
