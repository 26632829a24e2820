#pragma once

namespace qsim {

inline constexpr const char* version = "1.0.0";

}  // namespace qsim
