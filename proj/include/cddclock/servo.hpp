#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cddclock/crystal.hpp"
#include "cddclock/dressing.hpp"
#include "cddclock/noise.hpp"

namespace cddclock {

enum class Readout { Camera, Pmt };

struct ServoConfig {
  double probe_time = 0.1;  // s
  double duty_cycle = 0.33;
  double gain = 1.0;
  double half_width = 0.0;  // Hz, 0 selects 0.4 / probe_time
  Readout readout = Readout::Camera;
  /// false replaces single shots by their expectation values.
  bool projection_noise = true;
  bool include_qps = true;
  double qps_coefficient = 0.0;  // Hz per V/m^2, 0 selects the analytic value
  int noise_points = 16;
  std::uint64_t seed = 1;
  int jobs = 1;

  [[nodiscard]] double cycle_time() const { return probe_time / duty_cycle; }
  [[nodiscard]] double effective_half_width() const { return half_width > 0.0 ? half_width : 0.4 / probe_time; }
  /// Readout dead time: 10 ms for the camera, 100 us for the PMT.
  [[nodiscard]] double dead_time() const { return readout == Readout::Camera ? 10e-3 : 100e-6; }
};

void validate(const ServoConfig& s);

/// Frequency records of a servo run. Each record holds the laser frequency
/// steered onto one ion (or the crystal for PMT readout), Hz from the
/// nominal artificial transition, sampled once per probe pair.
struct ClockRun {
  std::vector<double> timestamps;  // s, end of each probe pair
  std::vector<std::vector<double>> frequency;
  std::vector<double> true_offset;  // per record, mean transition offset, Hz
  std::vector<double> positions;    // m
  std::uint64_t seed = 0;
  double pair_time = 0.0;  // s
  std::string note;
};

/// Two-point Rabi servo. Throws NumericError when a lock is lost.
ClockRun run_clock_servo(const CddParameterSet& set, const IonCrystal& crystal, const TrapConfig& trap,
                         const NoiseModel& noise, const ServoConfig& servo, double duration,
                         const PhysicalConstants& c = {});

/// Excitation and slope dp/d(detuning) at +half_width of the pi-pulse
/// lineshape.
struct OperatingPoint {
  double p = 0.0;
  double slope = 0.0;  // 1/Hz, magnitude
};
OperatingPoint operating_point(double probe_time, double half_width);

/// Projection-noise limited fractional instability at tau = 1 s for n
/// independent single-shot records averaged together.
double qpn_instability(const ServoConfig& s, double nu0, int n_records = 1);

}  // namespace cddclock
