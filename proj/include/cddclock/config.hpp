#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cddclock/crystal.hpp"
#include "cddclock/dressing.hpp"
#include "cddclock/noise.hpp"
#include "cddclock/preparation.hpp"
#include "cddclock/servo.hpp"

namespace cddclock {

/// Everything a run needs. File values use the preset naming and units:
/// frequencies in Hz, sweep times and holds in us.
struct RunConfig {
  // [constants]
  double g_S = kGFactorS;
  double g_D = kGFactorD;
  double quadrupole_moment = kQuadrupoleMomentD;  // e a0^2
  double clock_frequency = kClockFrequency;        // Hz

  // [cdd]
  std::string preset = "resonant";
  PresetParameters table = resonant_preset();
  double laser_Omega = 10.0;  // Hz

  // [sweep], times in us
  double sigma_fraction = 1.0 / 3.0;
  double hold1 = 100.0;
  double hold2 = 0.0;
  double sweep_scale = 1.0;  // multiplies both sweep times

  // [trap]
  int ions = 5;
  double axial_frequency = 0.0;  // Hz, 0 places 5 ions over span
  double radial_frequency = 3e6;  // Hz
  double span = 20.0;             // um

  // [waveform]
  double sample_rate = 100e6;   // samples/s
  double Omega_per_volt = 1e5;  // Hz/V
  double Q_S = 8.59;
  double Q_D = 15.95;
  double zero_scale = 30.0;
  double hold_duration = 200.0;  // us
  std::string format = "csv";    // csv or raw

  // [noise]
  NoiseModel noise;

  // [servo]
  ServoConfig servo;
  double duration = 1000.0 * 0.1 / 0.33;  // s

  // [scan]
  double detuning_min = -20.0;  // Hz
  double detuning_max = 80.0;
  int points = 201;
  int shots = 100;

  // [analyze]
  double sensitivity_span = 20.0;  // nT
  int sensitivity_points = 9;
  bool floquet = false;

  // [allan]
  std::string input;
  std::string units = "hz";  // hz or fractional

  // [run]
  std::uint64_t seed = 1;
  int jobs = 1;
  std::string output_dir = ".";
};

/// Parameter presets by name ("resonant", "magic").
PresetParameters preset_table(const std::string& name);

/// INI-style text: [section] headers, key = value, '#' or ';' comments.
/// preset_override, when non-empty, replaces a preset key in the text.
RunConfig parse_config_text(const std::string& text, const std::string& preset_override = {});
/// JSON mirror: {"section": {"key": value}}.
RunConfig parse_config_json(const std::string& text, const std::string& preset_override = {});
/// Dispatch on extension (.json selects the JSON mirror).
RunConfig parse_config(const std::string& path, const std::string& preset_override = {});

/// Throws ConfigError on inconsistent values.
void validate(const RunConfig& cfg);

/// Resolved snapshot in the INI format; parses back to the same config.
std::string snapshot(const RunConfig& cfg);
/// 16 hex digits of the 64-bit FNV-1a hash of the snapshot, output_dir excluded.
std::string config_hash(const RunConfig& cfg);

CddParameterSet build_parameter_set(const RunConfig& cfg);
PhysicalConstants build_constants(const RunConfig& cfg);
double quadrupole_moment_SI(const RunConfig& cfg);
TrapConfig build_trap(const RunConfig& cfg);
SweepSettings build_sweeps(const RunConfig& cfg);
std::vector<double> scan_grid(const RunConfig& cfg);

}  // namespace cddclock
