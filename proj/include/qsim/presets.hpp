#pragma once

#include <string>
#include <vector>

#include "qsim/pulse_opt.hpp"
#include "qsim/register.hpp"
#include "qsim/schedule.hpp"

namespace qsim {

// Built-in experiment geometries and drives. Every preset's register and
// drive validate cleanly under the default device profile.
struct Preset {
    std::string id;
    AtomRegister reg;
    std::vector<double> sweep_T;  // total-time sweep (us); empty for fixed-T runs
    PulseSchedule drive;          // fixed drive, or the longest-T sweep shape
    std::string target;           // optimization target bitstring; empty if none
    ScheduleParameterization param;  // detuning parameterization for optimize runs
    std::vector<double> linear_x0;   // linear-drive knots, the optimizer start
    double dt = 0.004;               // integrator step (us)
};

// ids: rabi, bell, z2chain, z2scaled, misloop
Preset make_preset(const std::string& id);

// Trapezoid drive for the sweep scenarios at a given total time.
PulseSchedule sweep_schedule(const Preset& p, double T);

std::vector<std::string> preset_ids();

}  // namespace qsim
