#include "qsim/presets.hpp"

#include <cmath>
#include <stdexcept>

#include "qsim/units.hpp"

namespace qsim {

namespace {

std::vector<double> linspace(double a, double b, int n) {
    std::vector<double> out(n);
    for (int i = 0; i < n; ++i) out[i] = a + (b - a) * i / (n - 1);
    return out;
}

// 17-atom U-turn chain, equal 6.1 um nearest-neighbor spacing, plus an
// ancilla 4 um to the right of the central (turn) atom. The turn is two
// 6.1 um chords dropping 3.05 um each, so the bottom row runs back under
// the top row.
AtomRegister z2chain_register() {
    const double a = 6.1, x0 = 6.1;
    std::vector<std::array<double, 2>> pos;
    for (int j = 0; j < 7; ++j) pos.push_back({x0 + a * j, 12.2});
    const double xt = x0 + a * 6 + std::sqrt(a * a - 3.05 * 3.05);
    pos.push_back({xt, 9.15});
    pos.push_back({xt, 3.05});
    pos.push_back({x0 + a * 6, 0.0});
    for (int j = 1; j <= 7; ++j) pos.push_back({x0 + a * (6 - j), 0.0});
    std::vector<bool> anc(18, false);
    anc[17] = true;
    pos.push_back({xt + 4.0, 3.05});
    return AtomRegister(std::move(pos), std::move(anc), "z2chain");
}

// 10-atom chain with the pinning ancilla 4 um below the central-defect site.
AtomRegister z2scaled_register() {
    const double a = 6.1;
    std::vector<std::array<double, 2>> pos;
    for (int j = 0; j < 10; ++j) pos.push_back({a * j, 4.0});
    pos.push_back({4.0 * a, 0.0});
    std::vector<bool> anc(11, false);
    anc[10] = true;
    return AtomRegister(std::move(pos), std::move(anc), "z2scaled");
}

// 12-atom square loop, 7 um nearest-neighbor spacing, corners at indices
// 0, 3, 6, 9.
AtomRegister misloop_register() {
    const double s = 7.0;
    std::vector<std::array<double, 2>> pos = {
        {0, 0},         {s, 0},         {2 * s, 0},     {3 * s, 0},
        {3 * s, s},     {3 * s, 2 * s}, {3 * s, 3 * s}, {2 * s, 3 * s},
        {s, 3 * s},     {0, 3 * s},     {0, 2 * s},     {0, s}};
    return AtomRegister(std::move(pos), {}, "misloop");
}

}  // namespace

PulseSchedule sweep_schedule(const Preset& p, double T) {
    if (p.id != "rabi" && p.id != "bell")
        throw std::invalid_argument("sweep_schedule: preset has a fixed drive");
    const double ramp = 0.1;
    if (T <= 2.0 * ramp)
        throw std::invalid_argument("sweep_schedule: total time too short for ramps");
    return make_ramp_plateau_ramp(1.8 * two_pi, ramp, T - 2.0 * ramp, ramp);
}

Preset make_preset(const std::string& id) {
    Preset p;
    p.id = id;
    if (id == "rabi") {
        // the paper's 16 independent atoms reduce exactly to one
        p.reg = AtomRegister({{0.0, 0.0}}, {}, "rabi");
        auto lo = linspace(0.3, 1.5, 30), hi = linspace(2.8, 4.0, 30);
        p.sweep_T = lo;
        p.sweep_T.insert(p.sweep_T.end(), hi.begin(), hi.end());
        p.drive = sweep_schedule(p, p.sweep_T.back());
        p.dt = 0.001;
        return p;
    }
    if (id == "bell") {
        p.reg = AtomRegister({{0.0, 0.0}, {11.0, 0.0}}, {}, "bell");
        p.sweep_T = linspace(1.9, 2.5, 12);
        p.drive = sweep_schedule(p, p.sweep_T.back());
        p.dt = 0.001;
        return p;
    }
    if (id == "z2chain") {
        p.reg = z2chain_register();
        p.target = "101010100010101011";
        p.param = {};
        p.linear_x0 = linear_drive_params(p.param, -4.0 * two_pi, 5.0 * two_pi);
        p.drive = build_detuning_schedule(p.linear_x0, p.param);
        return p;
    }
    if (id == "z2scaled") {
        p.reg = z2scaled_register();
        p.target = "10100010101";
        p.param = {};
        p.linear_x0 = linear_drive_params(p.param, -4.0 * two_pi, 5.0 * two_pi);
        p.drive = build_detuning_schedule(p.linear_x0, p.param);
        return p;
    }
    if (id == "misloop") {
        p.reg = misloop_register();
        p.target = "100100100100";
        p.param = {};
        p.param.optimize_ramps = true;
        p.linear_x0 = linear_drive_params(p.param, -4.0 * two_pi, 2.0 * two_pi);
        p.drive = build_detuning_schedule(p.linear_x0, p.param);
        return p;
    }
    throw std::invalid_argument("make_preset: unknown preset \"" + id + "\"");
}

std::vector<std::string> preset_ids() {
    return {"rabi", "bell", "z2chain", "z2scaled", "misloop"};
}

}  // namespace qsim
