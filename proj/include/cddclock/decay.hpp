#pragma once

#include <cstdint>
#include <vector>

#include "cddclock/constants.hpp"

namespace cddclock {

/// Rabi flop envelope: exponential lifetime Gamma and Gaussian time gamma (s),
/// coupling Omega_L (Hz).
struct DecayModel {
  double Gamma = kLifetimeD;
  double gamma = 0.29;
  double Omega_L = 10.0;
};

/// P_e(t) = (1 - cos(2 pi Omega_L t) exp(-t/Gamma) exp(-t^2/(2 gamma^2))) / 2
double rabi_flop_probability(double t, const DecayModel& m);

struct DecayFit {
  DecayModel model;
  double Omega_L_err = 0.0;
  double gamma_err = 0.0;
  /// Fitted 1/gamma^2 (s^-2) and its error; the Gaussian term vanishes at 0.
  double inv_gamma2 = 0.0;
  double inv_gamma2_err = 0.0;
  double rss = 0.0;
};

/// Least squares over (Omega_L, 1/gamma^2) with Gamma held fixed.
DecayFit fit_decay(const std::vector<double>& times, const std::vector<double>& probabilities,
                   double Gamma = kLifetimeD);

/// Binomial projection-noise sampling of the flop curve.
std::vector<double> sample_flop(const std::vector<double>& times, const DecayModel& m, int shots,
                                std::uint64_t seed);

}  // namespace cddclock
