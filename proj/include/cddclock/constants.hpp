#pragma once

// Physical constants (CODATA 2018) and 40Ca+ defaults.

namespace cddclock {

struct PhysicalConstants {
  double mu_B_over_h = 1.39962449361e10;   // Hz/T
  double electron_charge = 1.602176634e-19;  // C
  double bohr_radius = 5.29177210903e-11;  // m
  double ion_mass = 6.6358532e-26;           // kg, 40Ca+ (atomic mass minus one electron)
  double coulomb_constant_e2 = 2.307077552e-28;  // e^2/(4 pi eps0), N m^2
  double planck_h = 6.62607015e-34;          // J s

  [[nodiscard]] double mu_B_over_h_per_nT() const { return mu_B_over_h * 1e-9; }
  /// Coulomb constant 1/(4 pi eps0) in N m^2 / C^2.
  [[nodiscard]] double coulomb_k() const {
    return coulomb_constant_e2 / (electron_charge * electron_charge);
  }
};

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

/// Literature g-factors for 40Ca+.
inline constexpr double kGFactorS = 2.00225664;
inline constexpr double kGFactorD = 1.2003340;

/// D5/2 quadrupole moment in units of e a0^2.
inline constexpr double kQuadrupoleMomentD = 1.83;

/// 40Ca+ S1/2 - D5/2 clock transition frequency (Hz).
inline constexpr double kClockFrequency = 411.042129776e12;

/// D5/2 natural lifetime (s).
inline constexpr double kLifetimeD = 1.168;

}  // namespace cddclock
