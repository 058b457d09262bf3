#pragma once

#include <vector>

#include "cddclock/constants.hpp"

namespace cddclock {

/// Harmonic trap holding a linear chain. Angular frequencies in rad/s.
struct TrapConfig {
  double omega_z = 0.0;
  double omega_r = 0.0;
  int N = 1;
};

struct IonCrystal {
  std::vector<double> positions;  // m, ascending
  double length_scale = 0.0;      // m
};

/// Axial field gradient per ion, V/m^2. Positive for confinement.
struct GradientProfile {
  std::vector<double> gradient;
};

/// l = (e^2 / (4 pi eps0 m omega_z^2))^(1/3).
double length_scale(double omega_z, const PhysicalConstants& c = {});

/// Dimensionless equilibrium positions of N ions (damped Newton).
std::vector<double> dimensionless_positions(int N);

IonCrystal equilibrium_positions(const TrapConfig& cfg, const PhysicalConstants& c = {});

/// Largest force-balance residual over the chain, relative to m omega_z^2 l.
double force_residual(const IonCrystal& crystal, const TrapConfig& cfg, const PhysicalConstants& c = {});

/// Axial frequency at which an N-ion chain spans the given length.
double omega_z_for_span(int N, double span, const PhysicalConstants& c = {});

/// Five ions spanning 20 um, radial frequency 2 pi * 3 MHz.
TrapConfig default_trap(int N = 5, const PhysicalConstants& c = {});

GradientProfile axial_field_gradient(const IonCrystal& crystal, const TrapConfig& cfg,
                                     const PhysicalConstants& c = {});

/// suppression * (Theta/h) * (3/8) * grad_i * (J(J+1) - 3 mJ^2) in Hz.
std::vector<double> per_ion_qps(const GradientProfile& g, double theta_Q, double mJ, double suppression,
                                double J = 2.5, const PhysicalConstants& c = {});

struct InhomogeneityFit {
  double constant = 0.0;   // Hz
  double linear = 0.0;     // Hz/um
  double quadratic = 0.0;  // Hz/um^2
  double spread = 0.0;     // Hz
};

InhomogeneityFit inhomogeneity_fit(const std::vector<double>& positions, const std::vector<double>& shifts);

}  // namespace cddclock
