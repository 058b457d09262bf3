#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <vector>

#include "cddclock/dressing.hpp"

namespace cddclock {

/// Independent generator for (seed, stream, purpose).
inline std::mt19937_64 seeded_rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t purpose) {
  std::seed_seq seq{seed, stream, purpose};
  return std::mt19937_64(seq);
}

struct MainsHarmonic {
  double frequency = 50.0;  // Hz
  double amplitude = 0.0;   // nT
  double phase = 0.0;       // rad
};

/// 50/100/150 Hz at 6/2/1 nT: about 100 Hz peak-to-peak excursion of the
/// bare line.
std::vector<MainsHarmonic> default_mains();

struct NoiseModel {
  std::vector<MainsHarmonic> mains = default_mains();
  double slow_drift = 5.0;        // nT rms excursion of the random walk after drift_time
  double drift_time = 10.0;       // s
  double drift_step = 10e-3;      // s, random-walk grid
  double gradient_linear = 0.0;   // nT/um
  double gradient_quadratic = 0.0;  // nT/um^2
  double static_offset = 0.0;     // nT, constant field error
  double drive_amp_noise = 6e-5;  // bound on |dOmega/Omega|
  double amp_correlation = 1.0;   // s, random-walk time scale of the amplitude noise
  std::uint64_t seed = 1;
};

/// Noise-free model: every amplitude zero.
NoiseModel quiet_noise();

/// Throws DomainError on negative amplitudes or non-positive time scales.
void validate(const NoiseModel& m);

struct NoiseSample {
  double dB = 0.0;  // nT
  /// Fractional drive amplitude deviations.
  double amp_S1 = 0.0, amp_S2 = 0.0, amp_D1 = 0.0, amp_D2 = 0.0;

  [[nodiscard]] FieldPerturbation perturbation() const { return {dB, amp_S1, amp_S2, amp_D1, amp_D2}; }
};

/// Deterministic noise realisation. The random walks are generated on a
/// fixed grid from t = 0 and extended on demand, so a value depends only on
/// (seed, t, z).
class NoiseProcess {
 public:
  explicit NoiseProcess(NoiseModel model);

  NoiseSample at(double t, double z) const;
  /// Field at (t, z) without the amplitude noise, nT.
  double field(double t, double z) const;
  double drift(double t) const;
  /// Generate the random walks up to time t. Call before sharing the
  /// process between threads.
  void prepare(double t) const;

  [[nodiscard]] const NoiseModel& model() const { return model_; }

 private:
  void extend(std::size_t n) const;

  NoiseModel model_;
  mutable std::vector<double> walk_;
  mutable std::vector<std::array<double, 4>> amp_;
  mutable std::mt19937_64 walk_rng_;
  mutable std::mt19937_64 amp_rng_;
  mutable std::normal_distribution<double> walk_normal_;
  mutable std::normal_distribution<double> amp_normal_;
};

/// Convenience wrapper; z in metres.
NoiseSample sample_noise(const NoiseModel& m, double t, double z);

/// Peak-to-peak excursion of a line with the given field sensitivity under
/// the mains harmonics alone, Hz.
double mains_broadening(const NoiseModel& m, double sensitivity_Hz_per_nT);

}  // namespace cddclock
