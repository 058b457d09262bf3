#pragma once

#include <string>
#include <vector>

#include "cddclock/dressing.hpp"
#include "cddclock/propagator.hpp"
#include "cddclock/waveform.hpp"

namespace cddclock {

/// Sweep settings of the preparation sequence. Ranges follow
/// Delta_omega_sw = omega - omega_init, in Hz. Times in seconds.
struct SweepSettings {
  double Delta_omega_sw1 = 0.0;
  double t_sw1 = 0.0;
  double Delta_omega_sw2 = 0.0;
  double t_sw2 = 0.0;
  double sigma_fraction = 1.0 / 3.0;  // sigma = fraction * t_sw
  double hold1 = 100e-6;
  double hold2 = 0.0;  // no hold2 segment when zero
};

SweepSettings sweeps_from_table(const PresetParameters& t);

/// Linear map between coil input amplitude and drive amplitude Omega.
struct CoilCalibration {
  double Omega_per_volt = 1e5;  // Hz / V
};

/// S-coil preparation program: sweep1, hold1, sweep2 and an optional hold2,
/// stitched for phase continuity.
Program preparation_program(const ManifoldDrive& m, const SweepSettings& sw, const CoilCalibration& cal = {});

/// Steady two-stage drive alone (used for the D coil, switched on directly).
Program hold_program(const ManifoldDrive& m, double duration, const CoilCalibration& cal = {});

struct PreparationOptions {
  PropagationConfig propagation;
  CoilCalibration calibration;
};

struct PreparationResult {
  std::vector<double> m;  // innermost dressed quantum number of each state
  std::vector<double> population;
  double target_population = 0.0;
  double duration = 0.0;
  std::string warning;  // set when the target population is below 0.5
};

/// Propagates the S manifold through the program in the lab frame and
/// projects onto the dressed states of the drive the program ends in. The
/// D block of psi0 must be empty.
PreparationResult simulate_adiabatic_preparation(const CddParameterSet& set, const Program& program,
                                                 const StateVector& psi0, const PreparationOptions& opt = {},
                                                 const PhysicalConstants& c = {});

}  // namespace cddclock
