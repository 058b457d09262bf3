#pragma once

#include <cmath>
#include <complex>
#include <utility>
#include <vector>

#include "cddclock/waveform.hpp"

namespace cddclock {

/// Coil response g (s - z)(s - z*) / ((s - p)(s - p*)) with z = z_r - i z_i,
/// p = p_r - i p_i in rad/s, evaluated at s = 2*pi*i*f.
struct TransferFunctionModel {
  double gain = 1.0;
  double z_r = 0.0;
  double z_i = 0.0;
  double p_r = -1.0;
  double p_i = 0.0;
  double f0 = 0.0;  // Hz
  double Q = 0.0;
};

/// Pole (p_r, p_i) of a resonance at f0 with quality factor Q.
std::pair<double, double> q_to_pole(double f0, double Q);

/// Resonant coil with a double real zero at -zero_scale * 2*pi*f0 and gain
/// normalised to |H(f0)| = 1.
TransferFunctionModel coil_model(double f0, double Q, double zero_scale = 30.0);

/// H = 1 at every frequency.
TransferFunctionModel identity_model();

void validate(const TransferFunctionModel& m);

std::complex<double> transfer_eval(const TransferFunctionModel& m, double f);

/// Per-tone inverse filter. Fixed tones get an exact 1/H factor, swept tones a
/// 64-point table over their frequency span.
ToneProgram precompensate(const ToneProgram& p, const TransferFunctionModel& m);
/// Per-tone forward filter (frequency-domain multiplication).
ToneProgram forward_filter(const ToneProgram& p, const TransferFunctionModel& m);

/// Time-domain response of the coil to an input signal, integrated as a
/// second-order ODE with classical RK4 at the given step.
std::vector<double> filter_time_domain(const TransferFunctionModel& m, const auto& input, double duration,
                                       double dt) {
  // H = g (1 + (c1 s + c0) / (s^2 + b1 s + b0)) in controllable canonical form.
  const double b1 = -2.0 * m.p_r;
  const double b0 = m.p_r * m.p_r + m.p_i * m.p_i;
  const double c1 = -2.0 * m.z_r - b1;
  const double c0 = m.z_r * m.z_r + m.z_i * m.z_i - b0;
  const auto n = static_cast<std::size_t>(std::llround(duration / dt));
  std::vector<double> out(n);
  double x1 = 0.0, x2 = 0.0;
  auto deriv = [&](double t, double a, double b, double& da, double& db) {
    da = b;
    db = -b0 * a - b1 * b + input(t);
  };
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) * dt;
    out[i] = m.gain * (input(t) + c0 * x1 + c1 * x2);
    double k1a, k1b, k2a, k2b, k3a, k3b, k4a, k4b;
    deriv(t, x1, x2, k1a, k1b);
    deriv(t + 0.5 * dt, x1 + 0.5 * dt * k1a, x2 + 0.5 * dt * k1b, k2a, k2b);
    deriv(t + 0.5 * dt, x1 + 0.5 * dt * k2a, x2 + 0.5 * dt * k2b, k3a, k3b);
    deriv(t + dt, x1 + dt * k3a, x2 + dt * k3b, k4a, k4b);
    x1 += dt / 6.0 * (k1a + 2 * k2a + 2 * k3a + k4a);
    x2 += dt / 6.0 * (k1b + 2 * k2b + 2 * k3b + k4b);
  }
  return out;
}

struct ToneEstimate {
  double amplitude = 0.0;
  double phase = 0.0;  // of A sin(2 pi f t + phase)
};

/// Least-squares amplitudes and phases of known frequencies in a record
/// sampled at t = t0 + i / rate.
std::vector<ToneEstimate> fit_tones(const std::vector<double>& samples, double rate, double t0,
                                    const std::vector<double>& freqs);

}  // namespace cddclock
