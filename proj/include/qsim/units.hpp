#pragma once

#include <cmath>

namespace qsim {

inline constexpr double two_pi = 6.283185307179586476925286766559;

// Rydberg C6 coefficient for the device, rad * us^-1 * um^6.
inline constexpr double c6_default = 862690.0 * two_pi;

// User-facing I/O quotes frequencies as "MHz x 2pi" multipliers; internally
// everything is rad/us.  These two helpers live at the serialization boundary.
inline double freq_to_internal(double mhz_2pi) { return mhz_2pi * two_pi; }
inline double freq_to_external(double rad_per_us) { return rad_per_us / two_pi; }

}  // namespace qsim
