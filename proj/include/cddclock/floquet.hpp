#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cddclock/dressing.hpp"
#include "cddclock/propagator.hpp"

namespace cddclock {

/// One-period Floquet analysis of a manifold. The stage-1 frequency is moved
/// by `omega1_shift` (and the bare splitting with it, so Delta_1 is kept) to
/// make both drive periods fit an integer number of times into `period`.
struct CommensuratePeriod {
  double period = 0.0;
  double omega1_shift = 0.0;
  long cycles1 = 0;
  long cycles2 = 0;
};

CommensuratePeriod commensurate_period(const ManifoldDrive& m, double B0,
                                       double shift_tolerance = 20.0, double max_period = 10e-3,
                                       const PhysicalConstants& c = {});

struct FloquetOptions {
  PropagationConfig propagation;
  double shift_tolerance = 20.0;  // Hz
  double max_period = 10e-3;      // s
  /// Also accumulate the period average of P2(n_z) for the quadrupole term.
  bool qps_average = false;
  /// Worker threads for grid evaluations.
  int jobs = 1;
};

struct QuasiEnergyLevel {
  double m = 0.0;        // innermost dressed quantum number
  double energy = 0.0;   // m * gap, Hz
  double overlap = 0.0;  // with the analytic dressed state of the same m
};

struct ManifoldSpectrum {
  ManifoldLabel manifold = ManifoldLabel::S;
  CommensuratePeriod period;
  /// Unwrapped adjacent quasi-energy gap and its analytic counterpart.
  double gap = 0.0;
  double analytic_gap = 0.0;
  /// Floquet axis at t = 0 and the analytic dressed axis.
  Eigen::Vector3d axis = Eigen::Vector3d::UnitZ();
  Eigen::Vector3d analytic_axis = Eigen::Vector3d::UnitZ();
  /// Period average of P2(n_z(t)), when requested.
  double p2_average = 0.0;
  std::vector<QuasiEnergyLevel> levels;
};

struct QuasiEnergySpectrum {
  ManifoldSpectrum S;
  ManifoldSpectrum D;
};

/// Dressed axis at t = 0 from the rotating-wave construction of both stages.
Eigen::Vector3d analytic_dressed_axis(const ManifoldDrive& m, double B0,
                                      const PhysicalConstants& c = {});

/// Innermost analytic ladder spacing: omega_bar_2, omega_bar_1 or the bare
/// splitting, depending on which stages run.
double analytic_inner_splitting(const ManifoldDrive& m, double B0,
                                const PhysicalConstants& c = {});

/// Floquet spectrum of one manifold. `m0`, `m1` fix the outer quantum
/// numbers used to resolve the quasi-energy branch.
ManifoldSpectrum manifold_quasi_energies(const ManifoldDrive& m, double B0, double m0, double m1,
                                         const FloquetOptions& opt = {},
                                         const PhysicalConstants& c = {});

QuasiEnergySpectrum quasi_energies(const CddParameterSet& set, const FloquetOptions& opt = {},
                                   const PhysicalConstants& c = {});

/// Target transition frequency from numeric gaps, relative to the bare line,
/// with the same bookkeeping as artificial_transition_frequency. Bare
/// splittings are taken from `reference` so that field perturbations show.
double numeric_transition_frequency(const QuasiEnergySpectrum& q, const CddParameterSet& set,
                                    const CddParameterSet& reference);

struct SensitivityFit {
  double constant = 0.0;   // Hz
  double linear = 0.0;     // Hz/nT
  double quadratic = 0.0;  // Hz/nT^2
  double residual = 0.0;   // rms, Hz
  bool flagged = false;    // residual above 1% of the span
  std::vector<double> dB;
  std::vector<double> frequency;
};

SensitivityFit magnetic_sensitivity_numeric(const CddParameterSet& set,
                                            const std::vector<double>& dB_grid_nT,
                                            const FloquetOptions& opt = {},
                                            const PhysicalConstants& c = {});

/// d(target transition)/d(gradient) in Hz per V/m^2 from the period-averaged
/// quadrupole expectation of the D target state.
double qps_gradient_coefficient(const CddParameterSet& set, double theta_Q,
                                const FloquetOptions& opt = {}, const PhysicalConstants& c = {});

struct MagicSearchResult {
  double Delta2_D = 0.0;
  double coefficient = 0.0;  // Hz per V/m^2 at the solution
  int evaluations = 0;
};

/// Secant search over Delta_2^D for the zero of the target transition's
/// gradient sensitivity, inside [lo, hi].
MagicSearchResult numeric_magic_search(const CddParameterSet& set, double gradient, double lo,
                                       double hi, double tolerance = 1.0,
                                       const FloquetOptions& opt = {},
                                       const PhysicalConstants& c = {});

/// One optical line between dressed states.
struct SpectralLine {
  double position = 0.0;  // Hz from the bare line
  double rabi = 0.0;      // Hz
  double m_D = 0.0;       // innermost D label
  double harmonic_S = 0.0;
  double harmonic_D = 0.0;
};

struct RabiScan {
  std::vector<double> detuning;
  std::vector<double> excitation;
  std::vector<SpectralLine> lines;
};

/// Excitation spectrum from the prepared S target state. Lines follow from
/// the Floquet harmonics of the bare components coupled by the laser; each
/// line is given the Rabi lineshape of the probe time.
RabiScan simulate_rabi_scan(const CddParameterSet& set, const std::vector<double>& detuning_grid,
                            double probe_time, const LaserCoupling& pair = {},
                            const FloquetOptions& opt = {}, const PhysicalConstants& c = {});

/// Rabi lineshape: Omega^2/(Omega^2 + d^2) sin^2(pi sqrt(Omega^2 + d^2) t).
double rabi_lineshape(double rabi, double detuning, double t);

}  // namespace cddclock
