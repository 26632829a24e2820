#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace qsim {

// 2D atom register.  Atom index j is bit j of every bitstring produced
// downstream; the all-ground state is bitstring 0 and atom 0 is the leftmost
// character of a rendered bitstring.
struct AtomRegister {
    std::vector<std::array<double, 2>> positions;  // um
    std::vector<bool> ancilla;                     // per-atom ancilla tag
    std::string label;

    AtomRegister() = default;

    explicit AtomRegister(std::vector<std::array<double, 2>> pos,
                          std::vector<bool> anc = {},
                          std::string lbl = "")
        : positions(std::move(pos)), ancilla(std::move(anc)), label(std::move(lbl)) {
        if (positions.empty())
            throw std::invalid_argument("register: no atoms");
        for (const auto& p : positions)
            if (!std::isfinite(p[0]) || !std::isfinite(p[1]))
                throw std::invalid_argument("register: non-finite coordinate");
        if (ancilla.empty())
            ancilla.assign(positions.size(), false);
        if (ancilla.size() != positions.size())
            throw std::invalid_argument("register: ancilla mask length mismatch");
    }

    std::size_t size() const { return positions.size(); }

    double distance(std::size_t j, std::size_t k) const {
        const double dx = positions[j][0] - positions[k][0];
        const double dy = positions[j][1] - positions[k][1];
        return std::hypot(dx, dy);
    }
};

}  // namespace qsim
