#include "cddclock/spin.hpp"

#include <array>
#include <cmath>
#include <string>

#include "cddclock/errors.hpp"

namespace cddclock {

namespace {

using cd = std::complex<double>;

bool is_half_integer(double J) {
  const double twice = 2.0 * J;
  return J >= 0.0 && std::abs(twice - std::round(twice)) < 1e-12;
}

int twice_of(double x) { return static_cast<int>(std::lround(2.0 * x)); }

double factorial(int n) { return std::tgamma(n + 1.0); }

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  return std::round(factorial(n) / (factorial(k) * factorial(n - k)));
}

cd ipow(cd base, int n) {
  cd r{1.0, 0.0};
  for (int i = 0; i < n; ++i) r *= base;
  return r;
}

const std::array<Mat2, 3>& pauli() {
  static const std::array<Mat2, 3> p = [] {
    std::array<Mat2, 3> s;
    s[0] << 0, 1, 1, 0;
    s[1] << 0, cd(0, -1), cd(0, 1), 0;
    s[2] << 1, 0, 0, -1;
    return s;
  }();
  return p;
}

}  // namespace

int index_of_m(double J, double m) {
  const int k = twice_of(J - m) / 2;
  if (twice_of(J - m) % 2 != 0 || k < 0 || k > twice_of(J)) {
    throw DomainError("m = " + std::to_string(m) + " is not a level of J = " + std::to_string(J));
  }
  return k;
}

SpinOperators build_spin_operators(double J) {
  if (!is_half_integer(J)) {
    throw DomainError("spin J = " + std::to_string(J) + " is not a non-negative half-integer");
  }
  const int n = twice_of(J) + 1;
  SpinOperators ops{Eigen::MatrixXcd::Zero(n, n), Eigen::MatrixXcd::Zero(n, n),
                    Eigen::MatrixXcd::Zero(n, n)};
  for (int k = 0; k < n; ++k) ops.jz(k, k) = m_of_index(J, k);
  // J+ |m> = sqrt(J(J+1) - m(m+1)) |m+1>; row k-1 holds m+1.
  for (int k = 1; k < n; ++k) {
    const double m = m_of_index(J, k);
    const double c = std::sqrt(J * (J + 1.0) - m * (m + 1.0));
    ops.jx(k - 1, k) = 0.5 * c;
    ops.jx(k, k - 1) = 0.5 * c;
    ops.jy(k - 1, k) = cd(0.0, -0.5 * c);
    ops.jy(k, k - 1) = cd(0.0, 0.5 * c);
  }
  return ops;
}

Eigen::MatrixXcd zeeman_hamiltonian(const SpinManifold& manifold, const StaticField& field,
                                    const PhysicalConstants& constants) {
  const auto ops = build_spin_operators(manifold.J);
  return manifold.g * constants.mu_B_over_h * field.B0 * ops.jz;
}

double drive_field(const DriveStage& stage1, const DriveStage& stage2, double g, double t) {
  const double fast = kTwoPi * stage1.omega * t + stage1.phase;
  double value = g * stage1.Omega * std::cos(fast);
  if (stage2.Omega != 0.0) {
    value -= g * stage2.Omega * std::sin(fast) * std::cos(kTwoPi * stage2.omega * t + stage2.phase);
  }
  return value;
}

double default_quadrupole_moment(const PhysicalConstants& constants) {
  return kQuadrupoleMomentD * constants.electron_charge * constants.bohr_radius *
         constants.bohr_radius;
}

double quadrupole_tensor_factor(double J, double m) { return J * (J + 1.0) - 3.0 * m * m; }

Eigen::MatrixXcd quadrupole_hamiltonian(const SpinManifold& manifold, double theta_Q,
                                        double gradient, const PhysicalConstants& constants) {
  if (manifold.label != ManifoldLabel::D) {
    throw DomainError("quadrupole shift is only modeled for the D manifold");
  }
  if (!std::isfinite(gradient)) throw DomainError("field gradient must be finite");
  const int n = manifold.dim();
  const double prefactor = theta_Q / constants.planck_h * 0.375 * gradient;
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(n, n);
  for (int k = 0; k < n; ++k) {
    h(k, k) = prefactor * quadrupole_tensor_factor(manifold.J, m_of_index(manifold.J, k));
  }
  return h;
}

std::complex<double> wigner_element(double J, double mp, double m, const Mat2& U) {
  // |J,m> is the normalized symmetric product of (J+m) up and (J-m) down spinors.
  const int p = twice_of(J + m) / 2;
  const int q = twice_of(J - m) / 2;
  const int pp = twice_of(J + mp) / 2;
  const int qp = twice_of(J - mp) / 2;
  const double norm = std::sqrt(factorial(pp) * factorial(qp) / (factorial(p) * factorial(q)));
  cd sum{0.0, 0.0};
  for (int k = std::max(0, pp - q); k <= std::min(p, pp); ++k) {
    sum += binomial(p, k) * binomial(q, pp - k) * ipow(U(0, 0), k) * ipow(U(1, 0), p - k) *
           ipow(U(0, 1), pp - k) * ipow(U(1, 1), q - pp + k);
  }
  return norm * sum;
}

Eigen::MatrixXcd spin_representation(double J, const Mat2& U) {
  if (!is_half_integer(J)) throw DomainError("spin_representation: J must be a half-integer");
  const int n = twice_of(J) + 1;
  if (n == 2) return U;
  Eigen::MatrixXcd D(n, n);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      D(r, c) = wigner_element(J, m_of_index(J, r), m_of_index(J, c), U);
    }
  }
  return D;
}

Mat2 su2_step(double vx, double vy, double vz, double dt) {
  const double norm = std::sqrt(vx * vx + vy * vy + vz * vz);
  const double a = kPi * dt * norm;
  Mat2 u;
  if (norm == 0.0) {
    u.setIdentity();
    return u;
  }
  const double c = std::cos(a);
  const double s = std::sin(a) / norm;
  // cos(a) I - i sin(a) (n . sigma)
  u(0, 0) = cd(c, -s * vz);
  u(1, 1) = cd(c, s * vz);
  u(0, 1) = cd(-s * vy, -s * vx);
  u(1, 0) = cd(s * vy, -s * vx);
  return u;
}

Eigen::Matrix3d rotation_of(const Mat2& U) {
  const auto& s = pauli();
  Eigen::Matrix3d R;
  const Mat2 Ud = U.adjoint();
  for (int k = 0; k < 3; ++k) {
    const Mat2 rotated = U * s[k] * Ud;
    for (int j = 0; j < 3; ++j) R(j, k) = 0.5 * (s[j] * rotated).trace().real();
  }
  return R;
}

}  // namespace cddclock
