#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace qsim {

using cplx = std::complex<double>;

struct QuantumState {
    int n = 0;
    std::vector<cplx> amp;  // length 2^n

    static QuantumState ground(int n_atoms) {
        QuantumState s;
        s.n = n_atoms;
        s.amp.assign(std::size_t{1} << n_atoms, cplx{0.0, 0.0});
        s.amp[0] = cplx{1.0, 0.0};
        return s;
    }

    double norm() const {
        double s = 0.0;
        for (const auto& a : amp) s += std::norm(a);
        return std::sqrt(s);
    }
};

}  // namespace qsim
