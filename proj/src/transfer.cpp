#include "cddclock/transfer.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <string>

#include "cddclock/errors.hpp"

namespace cddclock {

namespace {

constexpr int kGridPoints = 64;
constexpr double kMaxCorrection = 100.0;

std::complex<double> raw_response(const TransferFunctionModel& m, std::complex<double> s) {
  const std::complex<double> z(m.z_r, -m.z_i), p(m.p_r, -m.p_i);
  return m.gain * (s - z) * (s - std::conj(z)) / ((s - p) * (s - std::conj(p)));
}

template <typename F>
ToneProgram map_tones(const ToneProgram& in, F&& factor) {
  ToneProgram out = in;
  for (auto& seg : out.segments) {
    for (auto& tone : seg.tones) {
      if (tone.chirp == 0.0 && tone.corr.empty()) {
        const std::complex<double> c = factor(tone.f0);
        tone.amplitude *= std::abs(c);
        tone.phase += std::arg(c);
        continue;
      }
      const double fa = tone.frequency(0.0), fb = tone.frequency(seg.duration);
      std::vector<double> grid(kGridPoints);
      std::vector<std::complex<double>> corr(kGridPoints);
      for (int k = 0; k < kGridPoints; ++k) {
        const double f = std::min(fa, fb) + std::abs(fb - fa) * k / (kGridPoints - 1);
        grid[k] = f;
        corr[k] = tone.correction(f) * factor(f);
      }
      tone.corr_freq = std::move(grid);
      tone.corr = std::move(corr);
    }
  }
  return out;
}

}  // namespace

std::pair<double, double> q_to_pole(double f0, double Q) {
  if (!(Q > 0.5)) throw DomainError("Q must exceed 0.5 for a complex pole pair");
  if (!(f0 > 0.0)) throw DomainError("f0 must be positive");
  const double w0 = 2.0 * M_PI * f0;
  return {-w0 / (2.0 * Q), w0 * std::sqrt(1.0 - 1.0 / (4.0 * Q * Q))};
}

TransferFunctionModel coil_model(double f0, double Q, double zero_scale) {
  TransferFunctionModel m;
  std::tie(m.p_r, m.p_i) = q_to_pole(f0, Q);
  m.f0 = f0;
  m.Q = Q;
  m.z_r = -zero_scale * 2.0 * M_PI * f0;
  m.z_i = 0.0;
  m.gain = 1.0 / std::abs(raw_response(m, {0.0, 2.0 * M_PI * f0}));
  return m;
}

TransferFunctionModel identity_model() {
  TransferFunctionModel m;
  m.f0 = 1.0;
  m.Q = 1.0;
  std::tie(m.p_r, m.p_i) = q_to_pole(m.f0, m.Q);
  m.z_r = m.p_r;
  m.z_i = m.p_i;
  return m;
}

void validate(const TransferFunctionModel& m) {
  if (!(m.p_r < 0.0)) throw DomainError("transfer function pole must have p_r < 0");
  const double mag = std::hypot(m.p_r, m.p_i);
  if (std::abs(mag / (2.0 * M_PI * m.f0) - 1.0) > 1e-6) throw DomainError("f0 inconsistent with pole");
  if (std::abs(mag / (2.0 * std::abs(m.p_r)) / m.Q - 1.0) > 1e-6) throw DomainError("Q inconsistent with pole");
}

std::complex<double> transfer_eval(const TransferFunctionModel& m, double f) {
  const std::complex<double> s(0.0, 2.0 * M_PI * f);
  const std::complex<double> p(m.p_r, -m.p_i);
  const double den = std::abs((s - p) * (s - std::conj(p)));
  if (den <= 1e-12 * std::max(1.0, std::norm(s))) {
    throw DomainError("transfer function evaluated at a pole (f = " + std::to_string(f) + " Hz)");
  }
  return raw_response(m, s);
}

ToneProgram precompensate(const ToneProgram& p, const TransferFunctionModel& m) {
  return map_tones(p, [&](double f) {
    const std::complex<double> c = 1.0 / transfer_eval(m, f);
    if (std::abs(c) > kMaxCorrection) {
      throw DomainError("coil cannot drive this tone: correction " + std::to_string(std::abs(c)) + " at " +
                        std::to_string(f) + " Hz");
    }
    return c;
  });
}

ToneProgram forward_filter(const ToneProgram& p, const TransferFunctionModel& m) {
  return map_tones(p, [&](double f) { return transfer_eval(m, f); });
}

std::vector<ToneEstimate> fit_tones(const std::vector<double>& samples, double rate, double t0,
                                    const std::vector<double>& freqs) {
  const auto n = static_cast<Eigen::Index>(samples.size());
  const auto k = static_cast<Eigen::Index>(freqs.size());
  if (n < 2 * k) throw DomainError("record too short for the tone fit");
  Eigen::MatrixXd X(n, 2 * k);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double t = t0 + static_cast<double>(i) / rate;
    for (Eigen::Index j = 0; j < k; ++j) {
      const double c = freqs[j] * t;
      const double ph = 2.0 * M_PI * (c - std::floor(c));
      X(i, 2 * j) = std::sin(ph);
      X(i, 2 * j + 1) = std::cos(ph);
    }
    y(i) = samples[i];
  }
  const Eigen::VectorXd beta = X.colPivHouseholderQr().solve(y);
  std::vector<ToneEstimate> out(k);
  for (Eigen::Index j = 0; j < k; ++j) {
    out[j].amplitude = std::hypot(beta(2 * j), beta(2 * j + 1));
    out[j].phase = std::atan2(beta(2 * j + 1), beta(2 * j));
  }
  return out;
}

}  // namespace cddclock
