#pragma once

namespace cddclock {

/// k in Hz/T^2 such that 357 uT gives 1.37 Hz.
inline constexpr double kQuadraticZeemanCoefficient = 1.37 / (357e-6 * 357e-6);

/// Quadratic Zeeman offset of the absolute line position, Hz.
double quadratic_zeeman_offset(double B0, double k = kQuadraticZeemanCoefficient);

}  // namespace cddclock
