#pragma once

#include <cmath>

namespace lcmatch {

inline constexpr double kPi = 3.14159265358979323846;

/// Elementary charge, exact by the 2019 SI definition.
inline constexpr double kElementaryCharge = 1.602176634e-19;

/// Power-convention decibel conversions (10 log10).
inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double linear) { return 10.0 * std::log10(linear); }

} // namespace lcmatch
