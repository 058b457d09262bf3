#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cddclock/crystal.hpp"
#include "cddclock/dressing.hpp"
#include "cddclock/floquet.hpp"
#include "cddclock/noise.hpp"

namespace cddclock {

/// Rabi frequency of a pi pulse of duration t.
inline double pi_pulse_rabi(double t) { return 0.5 / t; }

/// Analytic QPS coefficient of the target transition, Hz per V/m^2:
/// dressed orientation weight times the bare D tensor element of the
/// innermost dressed label.
double dressed_qps_coefficient(const CddParameterSet& set, double theta_Q, const PhysicalConstants& c = {});

/// Time-averaged shift of the target transition for an ion at z over the
/// window [t0, t0 + duration], Hz. `points` midpoint samples.
double averaged_shift(const CddParameterSet& set, const NoiseProcess& noise, double t0, double duration,
                      double z, int points, const PhysicalConstants& c = {});

struct LineScanConfig {
  std::vector<double> detunings;  // Hz from the nominal artificial transition
  int shots = 100;
  double probe_time = 0.1;         // s
  double cycle_time = 0.1 / 0.33;  // s per shot
  bool include_qps = true;
  std::optional<double> qps_coefficient;  // Hz per V/m^2, overrides the analytic value
  double theta_Q = 0.0;                   // C m^2, 0 selects the 40Ca+ default
  int noise_points = 16;
  std::uint64_t seed = 1;
  int jobs = 1;
};

struct IonScan {
  double position = 0.0;     // m
  double qps = 0.0;          // Hz, input quadrupole shift
  double true_center = 0.0;  // Hz, mean transition offset over the scan
  std::vector<double> excitation;
  double center = 0.0;       // Hz, fitted
  double center_err = 0.0;
  double amplitude = 0.0;
  double background = 0.0;
  bool fit_ok = false;
  std::string lineshape;  // "rabi" or "gaussian"
  std::string note;
};

struct LineScanResult {
  std::vector<double> detunings;
  std::vector<IonScan> ions;
  double qps_coefficient = 0.0;
};

LineScanResult per_ion_line_scan(const CddParameterSet& set, const IonCrystal& crystal, const TrapConfig& trap,
                                 const NoiseModel& noise, const LineScanConfig& cfg,
                                 const PhysicalConstants& c = {});

struct PeakFit {
  double center = 0.0;
  double center_err = 0.0;
  double amplitude = 0.0;
  double background = 0.0;
  bool ok = false;
  std::string lineshape;
  std::string note;
};

/// Fit of a Rabi peak with fixed pulse parameters; Gaussian model when the
/// Rabi fit fails.
PeakFit fit_peak(const std::vector<double>& detunings, const std::vector<double>& excitation, double Omega,
                 double probe_time);

/// Centers fitted against positions in um.
InhomogeneityFit center_profile(const LineScanResult& r);

}  // namespace cddclock
