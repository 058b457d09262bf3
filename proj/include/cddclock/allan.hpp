#pragma once

#include <string>
#include <vector>

namespace cddclock {

struct AllanPoint {
  double tau = 0.0;   // s
  int m = 0;          // averaging factor
  double adev = 0.0;  // fractional
  double error = 0.0;
};

struct AllanResult {
  std::vector<AllanPoint> points;
  std::vector<std::string> notes;  // skipped averaging factors
};

/// Overlapping Allan deviation of fractional frequency data y sampled every
/// tau0 seconds, for averaging factors m. Factors with fewer than 3m samples
/// are skipped with a note.
AllanResult overlapping_allan(const std::vector<double>& y, double tau0, const std::vector<int>& m);

/// Octave-spaced averaging factors 1, 2, 4, ... that fit the record.
std::vector<int> octave_factors(std::size_t n);

/// Divide a frequency record in Hz by nu0.
std::vector<double> fractional(const std::vector<double>& hz, double nu0);

/// Least-squares slope and intercept of log(adev) against log(tau).
struct PowerLaw {
  double slope = 0.0;
  double amplitude = 0.0;  // adev extrapolated to tau = 1 s
};
PowerLaw fit_power_law(const AllanResult& r);

}  // namespace cddclock
