#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "qsim/register.hpp"
#include "qsim/schedule.hpp"
#include "qsim/units.hpp"

namespace qsim {

// Hardware-style capability bounds used to validate registers and schedules.
struct DeviceProfile {
    double omega_max = 2.5 * two_pi;    // rad/us
    double delta_min = -20.0 * two_pi;  // rad/us
    double delta_max = 20.0 * two_pi;   // rad/us
    double t_max = 4.0;                 // us
    double min_ramp = 0.05;             // us, minimum first/last omega segment
    double min_spacing = 4.0;           // um
    double fov_width = 75.0;            // um, rectangle anchored at the origin
    double fov_height = 76.0;           // um
    double c6 = c6_default;             // rad * us^-1 * um^6
    bool check_fov = true;
};

struct Violation {
    std::string rule;
    std::string message;
    double value = 0.0;
};

struct ValidationReport {
    bool ok = true;
    std::vector<Violation> violations;

    void add(std::string rule, std::string message, double value) {
        ok = false;
        violations.push_back({std::move(rule), std::move(message), value});
    }
};

inline ValidationReport validate_register(const AtomRegister& reg, const DeviceProfile& prof) {
    ValidationReport rep;
    for (std::size_t j = 0; j < reg.size(); ++j) {
        const auto& p = reg.positions[j];
        if (prof.check_fov &&
            (p[0] < 0.0 || p[0] > prof.fov_width || p[1] < 0.0 || p[1] > prof.fov_height))
            rep.add("fov", "atom " + std::to_string(j) + " outside field of view",
                    p[0] < 0.0 || p[0] > prof.fov_width ? p[0] : p[1]);
        for (std::size_t k = j + 1; k < reg.size(); ++k) {
            const double d = reg.distance(j, k);
            if (d < prof.min_spacing)
                rep.add("min_spacing",
                        "atoms " + std::to_string(j) + "," + std::to_string(k) + " too close", d);
        }
    }
    return rep;
}

inline ValidationReport validate_schedule(const PulseSchedule& s, const DeviceProfile& prof) {
    ValidationReport rep;
    if (s.total_time > prof.t_max)
        rep.add("t_max", "schedule longer than device maximum", s.total_time);
    for (const auto& k : s.omega) {
        if (k.v < 0.0) rep.add("omega_nonnegative", "omega dips below zero", k.v);
        if (k.v > prof.omega_max) rep.add("omega_max", "omega exceeds device maximum", k.v);
    }
    if (s.omega.front().v != 0.0)
        rep.add("omega_endpoints", "omega must start at zero", s.omega.front().v);
    if (s.omega.back().v != 0.0)
        rep.add("omega_endpoints", "omega must end at zero", s.omega.back().v);
    if (s.omega.size() >= 2) {
        const double first = s.omega[1].t - s.omega[0].t;
        const double last = s.omega[s.omega.size() - 1].t - s.omega[s.omega.size() - 2].t;
        if (first < prof.min_ramp)
            rep.add("min_ramp", "first omega segment shorter than minimum ramp", first);
        if (last < prof.min_ramp)
            rep.add("min_ramp", "last omega segment shorter than minimum ramp", last);
    }
    for (const auto& k : s.delta) {
        if (k.v < prof.delta_min || k.v > prof.delta_max)
            rep.add("delta_range", "delta outside device range", k.v);
    }
    return rep;
}

}  // namespace qsim
