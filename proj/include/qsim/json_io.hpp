#pragma once

#include <stdexcept>
#include <string>

#include "json.hpp"
#include "qsim/fit.hpp"
#include "qsim/histogram.hpp"
#include "qsim/profile.hpp"
#include "qsim/pulse_opt.hpp"
#include "qsim/register.hpp"
#include "qsim/schedule.hpp"

namespace qsim {

// Unreadable or unwritable files; the CLI maps exception types to exit codes
// (validation 2, numerical 3, I/O 4).
struct io_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// All serialization quotes frequencies as "MHz x 2pi" multipliers and times
// in us; conversion to the internal rad/us happens here and only here.
// Phases stay in radians.

nlohmann::json register_to_json(const AtomRegister& reg);
AtomRegister register_from_json(const nlohmann::json& j);

nlohmann::json schedule_to_json(const PulseSchedule& s);
PulseSchedule schedule_from_json(const nlohmann::json& j);

nlohmann::json histogram_to_json(const BitstringHistogram& h);
BitstringHistogram histogram_from_json(const nlohmann::json& j);

nlohmann::json profile_to_json(const DeviceProfile& p);
DeviceProfile profile_from_json(const nlohmann::json& j);

nlohmann::json fit_to_json(const FitResult& r);

nlohmann::json optimization_to_json(const OptimizationResult& r);

// Probabilities are rounded to 12 significant digits on write so equal runs
// serialize byte-identically regardless of accumulation order.
double round_sig(double v, int digits = 12);

nlohmann::json read_json_file(const std::string& path);
void write_json_file(const std::string& path, const nlohmann::json& j);

// Device profile selected by the QSIM_PROFILE environment variable (a JSON
// file path); defaults when unset or empty.
DeviceProfile active_profile();

}  // namespace qsim
