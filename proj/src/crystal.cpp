#include "cddclock/crystal.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "cddclock/errors.hpp"

namespace cddclock {

namespace {

// u_i - sum_j sign(u_i - u_j) / (u_i - u_j)^2
Eigen::VectorXd balance(const Eigen::VectorXd& u) {
  const auto n = u.size();
  Eigen::VectorXd f = u;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) continue;
      const double d = u(i) - u(j);
      f(i) -= std::copysign(1.0 / (d * d), d);
    }
  }
  return f;
}

Eigen::MatrixXd balance_jacobian(const Eigen::VectorXd& u) {
  const auto n = u.size();
  Eigen::MatrixXd J = Eigen::MatrixXd::Identity(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) continue;
      const double k = 2.0 / std::pow(std::abs(u(i) - u(j)), 3);
      J(i, i) += k;
      J(i, j) -= k;
    }
  }
  return J;
}

bool ordered(const Eigen::VectorXd& u) {
  for (Eigen::Index i = 1; i < u.size(); ++i) {
    if (!(u(i) > u(i - 1))) return false;
  }
  return true;
}

}  // namespace

double length_scale(double omega_z, const PhysicalConstants& c) {
  if (!(omega_z > 0.0)) throw DomainError("omega_z must be positive");
  return std::cbrt(c.coulomb_constant_e2 / (c.ion_mass * omega_z * omega_z));
}

std::vector<double> dimensionless_positions(int N) {
  if (N < 1) throw DomainError("ion count must be at least 1");
  if (N > 50) throw DomainError("ion count above 50 is out of scope");
  Eigen::VectorXd u(N);
  const double spacing = 2.0 / std::pow(N, 0.56);
  for (int i = 0; i < N; ++i) u(i) = (i - 0.5 * (N - 1)) * spacing;
  if (N == 1) return {0.0};

  double res = balance(u).lpNorm<Eigen::Infinity>();
  int it = 0;
  for (; it < 10000 && res > 1e-14; ++it) {
    const Eigen::VectorXd step = balance_jacobian(u).lu().solve(-balance(u));
    double lambda = 1.0;
    Eigen::VectorXd trial = u + step;
    while ((!ordered(trial) || balance(trial).lpNorm<Eigen::Infinity>() > res) && lambda > 1e-8) {
      lambda *= 0.5;
      trial = u + lambda * step;
    }
    if (!ordered(trial)) break;
    const double next = balance(trial).lpNorm<Eigen::Infinity>();
    u = trial;
    if (next >= res && lambda <= 1e-8) break;
    res = next;
  }
  if (res > 1e-12) {
    std::ostringstream msg;
    msg << "equilibrium solve did not converge after " << it << " iterations, residual " << res;
    throw NumericError(msg.str());
  }
  // Enforce the reflection symmetry exactly.
  std::vector<double> out(N);
  for (int i = 0; i < N; ++i) out[i] = 0.5 * (u(i) - u(N - 1 - i));
  return out;
}

IonCrystal equilibrium_positions(const TrapConfig& cfg, const PhysicalConstants& c) {
  if (!(cfg.omega_r > cfg.omega_z)) throw DomainError("linear chain needs omega_r > omega_z");
  IonCrystal crystal;
  crystal.length_scale = length_scale(cfg.omega_z, c);
  for (double u : dimensionless_positions(cfg.N)) crystal.positions.push_back(u * crystal.length_scale);
  return crystal;
}

double force_residual(const IonCrystal& crystal, const TrapConfig& cfg, const PhysicalConstants& c) {
  const auto& z = crystal.positions;
  const double scale = c.ion_mass * cfg.omega_z * cfg.omega_z * crystal.length_scale;
  double worst = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    double f = -c.ion_mass * cfg.omega_z * cfg.omega_z * z[i];
    for (std::size_t j = 0; j < z.size(); ++j) {
      if (i == j) continue;
      const double d = z[i] - z[j];
      f += std::copysign(c.coulomb_constant_e2 / (d * d), d);
    }
    worst = std::max(worst, std::abs(f) / scale);
  }
  return worst;
}

double omega_z_for_span(int N, double span, const PhysicalConstants& c) {
  if (N < 2) throw DomainError("a span needs at least two ions");
  if (!(span > 0.0)) throw DomainError("span must be positive");
  const std::vector<double> u = dimensionless_positions(N);
  const double l = span / (u.back() - u.front());
  return std::sqrt(c.coulomb_constant_e2 / (c.ion_mass * l * l * l));
}

TrapConfig default_trap(int N, const PhysicalConstants& c) {
  TrapConfig cfg;
  cfg.N = N;
  cfg.omega_z = omega_z_for_span(5, 20e-6, c);
  cfg.omega_r = 2.0 * M_PI * 3e6;
  return cfg;
}

GradientProfile axial_field_gradient(const IonCrystal& crystal, const TrapConfig& cfg, const PhysicalConstants& c) {
  const auto& z = crystal.positions;
  const double trap = c.ion_mass * cfg.omega_z * cfg.omega_z / c.electron_charge;
  GradientProfile g;
  for (std::size_t i = 0; i < z.size(); ++i) {
    double sum = trap;
    for (std::size_t j = 0; j < z.size(); ++j) {
      if (i == j) continue;
      const double d = std::abs(z[i] - z[j]);
      if (d <= 1e-9 * crystal.length_scale) throw DomainError("overlapping ion positions");
      sum += c.coulomb_k() * 2.0 * c.electron_charge / (d * d * d);
    }
    g.gradient.push_back(sum);
  }
  return g;
}

std::vector<double> per_ion_qps(const GradientProfile& g, double theta_Q, double mJ, double suppression, double J,
                                const PhysicalConstants& c) {
  const double k = suppression * theta_Q / c.planck_h * 0.375 * (J * (J + 1.0) - 3.0 * mJ * mJ);
  std::vector<double> out;
  for (double grad : g.gradient) out.push_back(k * grad);
  return out;
}

InhomogeneityFit inhomogeneity_fit(const std::vector<double>& positions, const std::vector<double>& shifts) {
  if (positions.size() != shifts.size()) throw DomainError("positions and shifts differ in length");
  if (positions.size() < 3) throw DomainError("inhomogeneity fit needs at least 3 ions");
  std::vector<double> sorted = positions;
  std::sort(sorted.begin(), sorted.end());
  if (std::unique(sorted.begin(), sorted.end()) - sorted.begin() < 3) {
    throw DomainError("inhomogeneity fit needs 3 distinct positions");
  }
  const auto n = static_cast<Eigen::Index>(positions.size());
  Eigen::MatrixXd X(n, 3);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double x = positions[i] * 1e6;
    X(i, 0) = 1.0;
    X(i, 1) = x;
    X(i, 2) = x * x;
    y(i) = shifts[i];
  }
  const Eigen::Vector3d beta = X.colPivHouseholderQr().solve(y);
  InhomogeneityFit fit;
  fit.constant = beta(0);
  fit.linear = beta(1);
  fit.quadratic = beta(2);
  const auto [lo, hi] = std::minmax_element(shifts.begin(), shifts.end());
  fit.spread = *hi - *lo;
  return fit;
}

}  // namespace cddclock
