#include "cddclock/noise.hpp"

#include <cmath>
#include <string>

#include "cddclock/errors.hpp"

namespace cddclock {

std::vector<MainsHarmonic> default_mains() {
  return {{50.0, 6.0, 0.0}, {100.0, 2.0, 0.0}, {150.0, 1.0, 0.0}};
}

NoiseModel quiet_noise() {
  NoiseModel m;
  m.mains.clear();
  m.slow_drift = 0.0;
  m.drive_amp_noise = 0.0;
  return m;
}

void validate(const NoiseModel& m) {
  for (const MainsHarmonic& h : m.mains) {
    if (h.amplitude < 0.0) throw DomainError("mains harmonic amplitude must be non-negative");
    if (h.frequency < 0.0) throw DomainError("mains harmonic frequency must be non-negative");
  }
  if (m.slow_drift < 0.0) throw DomainError("slow_drift must be non-negative");
  if (m.drive_amp_noise < 0.0) throw DomainError("drive_amp_noise must be non-negative");
  if (!(m.drift_time > 0.0) || !(m.drift_step > 0.0) || !(m.amp_correlation > 0.0)) {
    throw DomainError("noise time scales must be positive");
  }
}

NoiseProcess::NoiseProcess(NoiseModel model)
    : model_(std::move(model)),
      walk_{0.0},
      amp_{{0.0, 0.0, 0.0, 0.0}},
      walk_rng_(seeded_rng(model_.seed, 0, 0x5eed)),
      amp_rng_(seeded_rng(model_.seed, 0, 0xa3b)) {
  validate(model_);
}

void NoiseProcess::extend(std::size_t n) const {
  const double dt = model_.drift_step;
  const double s_walk = model_.slow_drift * std::sqrt(dt / model_.drift_time);
  const double bound = model_.drive_amp_noise;
  const double s_amp = bound * std::sqrt(dt / model_.amp_correlation);
  while (walk_.size() < n) {
    walk_.push_back(walk_.back() + s_walk * walk_normal_(walk_rng_));
    std::array<double, 4> a = amp_.back();
    for (double& x : a) {
      x += s_amp * amp_normal_(amp_rng_);
      // Reflect at the bound; repeated for steps larger than the band.
      while (bound > 0.0 && std::abs(x) > bound) x = x > 0.0 ? 2.0 * bound - x : -2.0 * bound - x;
      if (bound == 0.0) x = 0.0;
    }
    amp_.push_back(a);
  }
}

void NoiseProcess::prepare(double t) const {
  if (t < 0.0) throw DomainError("noise time must be non-negative");
  extend(static_cast<std::size_t>(std::floor(t / model_.drift_step)) + 2);
}

namespace {

double interpolate(const std::vector<double>& grid, double t, double dt) {
  const double u = t / dt;
  const std::size_t i = static_cast<std::size_t>(std::floor(u));
  const double w = u - static_cast<double>(i);
  return grid[i] * (1.0 - w) + grid[i + 1] * w;
}

}  // namespace

double NoiseProcess::drift(double t) const {
  prepare(t);
  if (model_.slow_drift == 0.0) return 0.0;
  return interpolate(walk_, t, model_.drift_step);
}

double NoiseProcess::field(double t, double z) const {
  double b = model_.static_offset + drift(t);
  for (const MainsHarmonic& h : model_.mains) {
    b += h.amplitude * std::sin(kTwoPi * h.frequency * t + h.phase);
  }
  const double zu = z * 1e6;
  b += model_.gradient_linear * zu + model_.gradient_quadratic * zu * zu;
  return b;
}

NoiseSample NoiseProcess::at(double t, double z) const {
  NoiseSample s;
  s.dB = field(t, z);
  if (model_.drive_amp_noise > 0.0) {
    prepare(t);
    const double u = t / model_.drift_step;
    const std::size_t i = static_cast<std::size_t>(std::floor(u));
    const double w = u - static_cast<double>(i);
    const std::array<double, 4>& a = amp_[i];
    const std::array<double, 4>& b = amp_[i + 1];
    s.amp_S1 = a[0] * (1.0 - w) + b[0] * w;
    s.amp_S2 = a[1] * (1.0 - w) + b[1] * w;
    s.amp_D1 = a[2] * (1.0 - w) + b[2] * w;
    s.amp_D2 = a[3] * (1.0 - w) + b[3] * w;
  }
  return s;
}

NoiseSample sample_noise(const NoiseModel& m, double t, double z) {
  return NoiseProcess(m).at(t, z);
}

double mains_broadening(const NoiseModel& m, double sensitivity_Hz_per_nT) {
  double peak = 0.0;
  for (const MainsHarmonic& h : m.mains) peak += h.amplitude;
  return 2.0 * std::abs(sensitivity_Hz_per_nT) * peak;
}

}  // namespace cddclock
