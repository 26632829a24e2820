#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace qsim {

struct Knot {
    double t;  // us
    double v;  // rad/us for omega and delta, rad for phi
};

struct ControlSample {
    double omega;  // rad/us
    double delta;  // rad/us
    double phi;    // rad
};

// Piecewise-linear control waveforms over [0, T].  The constructor enforces
// the structural invariants (strictly increasing knot times starting at 0 and
// ending at T, finite values); drive rules like omega(0)=omega(T)=0 are
// device constraints checked by validate_schedule, so that idealized shapes
// (e.g. a square pulse for analytic tests) remain representable.
struct PulseSchedule {
    std::vector<Knot> omega;
    std::vector<Knot> delta;
    std::vector<Knot> phi;
    double total_time = 0.0;  // us

    PulseSchedule() = default;

    PulseSchedule(std::vector<Knot> om, std::vector<Knot> de, std::vector<Knot> ph, double T)
        : omega(std::move(om)), delta(std::move(de)), phi(std::move(ph)), total_time(T) {
        if (!(std::isfinite(T)) || T <= 0.0)
            throw std::invalid_argument("schedule: total time must be positive");
        check_track(omega, "omega");
        check_track(delta, "delta");
        check_track(phi, "phi");
    }

  private:
    void check_track(const std::vector<Knot>& k, const char* name) const {
        if (k.size() < 2)
            throw std::invalid_argument(std::string("schedule: track ") + name +
                                        " needs at least two knots");
        for (const auto& kn : k)
            if (!std::isfinite(kn.t) || !std::isfinite(kn.v))
                throw std::invalid_argument(std::string("schedule: non-finite knot in ") + name);
        if (k.front().t != 0.0)
            throw std::invalid_argument(std::string("schedule: first knot of ") + name +
                                        " must be at t=0");
        if (k.back().t != total_time)
            throw std::invalid_argument(std::string("schedule: last knot of ") + name +
                                        " must be at t=T");
        for (std::size_t i = 1; i < k.size(); ++i)
            if (!(k[i].t > k[i - 1].t))
                throw std::invalid_argument(std::string("schedule: knot times of ") + name +
                                            " must be strictly increasing");
    }
};

inline double interp_track(const std::vector<Knot>& k, double t) {
    // Binary search for the bracketing segment; exact at knots.
    auto it = std::lower_bound(k.begin(), k.end(), t,
                               [](const Knot& a, double x) { return a.t < x; });
    if (it != k.end() && it->t == t) return it->v;
    const Knot& hi = *it;
    const Knot& lo = *(it - 1);
    const double w = (t - lo.t) / (hi.t - lo.t);
    return lo.v + w * (hi.v - lo.v);
}

inline ControlSample schedule_value_at(const PulseSchedule& s, double t) {
    if (t < 0.0 || t > s.total_time)
        throw std::out_of_range("schedule_value_at: t outside [0, T]");
    return {interp_track(s.omega, t), interp_track(s.delta, t), interp_track(s.phi, t)};
}

// Sorted union of all knot times; integrators step within these segments so
// controls stay smooth inside every step.
inline std::vector<double> knot_times(const PulseSchedule& s) {
    std::vector<double> ts;
    for (const auto* track : {&s.omega, &s.delta, &s.phi})
        for (const auto& k : *track) ts.push_back(k.t);
    std::sort(ts.begin(), ts.end());
    ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
    return ts;
}

namespace detail {

// Extend a partial track to span [0, T] by holding the first/last value flat.
inline std::vector<Knot> extend_flat(std::vector<Knot> k, double T, double fallback) {
    if (k.empty()) return {{0.0, fallback}, {T, fallback}};
    if (k.front().t > 0.0) k.insert(k.begin(), {0.0, k.front().v});
    if (k.back().t < T) k.push_back({T, k.back().v});
    return k;
}

}  // namespace detail

// Trapezoid omega pulse: ramp up over t_up, hold omega_max for t_plateau,
// ramp down over t_down.  Degenerate durations collapse (zero plateau gives a
// triangle) rather than emitting duplicate knots.
inline PulseSchedule make_ramp_plateau_ramp(double omega_max, double t_up, double t_plateau,
                                            double t_down, std::vector<Knot> delta = {},
                                            std::vector<Knot> phi = {}) {
    if (t_up < 0.0 || t_plateau < 0.0 || t_down < 0.0)
        throw std::invalid_argument("make_ramp_plateau_ramp: negative duration");
    const double T = t_up + t_plateau + t_down;
    if (T <= 0.0)
        throw std::invalid_argument("make_ramp_plateau_ramp: zero total duration");
    std::vector<Knot> om;
    om.push_back({0.0, t_up > 0.0 ? 0.0 : omega_max});
    if (t_up > 0.0) om.push_back({t_up, omega_max});
    if (t_plateau > 0.0) om.push_back({t_up + t_plateau, omega_max});
    if (t_down > 0.0) om.push_back({T, 0.0});
    return PulseSchedule(std::move(om), detail::extend_flat(std::move(delta), T, 0.0),
                         detail::extend_flat(std::move(phi), T, 0.0), T);
}

}  // namespace qsim
