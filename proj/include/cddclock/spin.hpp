#pragma once

#include <Eigen/Dense>

#include "cddclock/constants.hpp"
#include "cddclock/drive.hpp"

namespace cddclock {

enum class ManifoldLabel { S, D };

/// A Zeeman manifold of one electronic level.
struct SpinManifold {
  ManifoldLabel label = ManifoldLabel::S;
  double J = 0.5;
  double g = kGFactorS;

  [[nodiscard]] int dim() const { return static_cast<int>(2.0 * J + 0.5) + 1; }

  static SpinManifold s_level(double g = kGFactorS) { return {ManifoldLabel::S, 0.5, g}; }
  static SpinManifold d_level(double g = kGFactorD) { return {ManifoldLabel::D, 2.5, g}; }
};

/// Angular momentum matrices in the |J, m> basis, row k holding m = J - k.
struct SpinOperators {
  Eigen::MatrixXcd jx;
  Eigen::MatrixXcd jy;
  Eigen::MatrixXcd jz;
};

struct StaticField {
  double B0 = 0.0;  // T, along z
};

/// Magnetic quantum number of basis index k.
inline double m_of_index(double J, int k) { return J - k; }
/// Basis index of magnetic quantum number m.
int index_of_m(double J, double m);

/// Ladder-operator construction. Throws DomainError unless 2J is a
/// non-negative integer.
SpinOperators build_spin_operators(double J);

/// g (mu_B/h) B0 Jz, in Hz.
Eigen::MatrixXcd zeeman_hamiltonian(const SpinManifold& manifold, const StaticField& field,
                                    const PhysicalConstants& constants = {});

/// Coefficient of Jx for one manifold under the two-stage colinear drive:
/// g Omega1 cos(w1 t + p1) - g Omega2 sin(w1 t + p1) cos(w2 t + p2).
double drive_field(const DriveStage& stage1, const DriveStage& stage2, double g, double t);

/// Default D5/2 quadrupole moment, C m^2.
double default_quadrupole_moment(const PhysicalConstants& constants = {});

/// Diagonal (Theta/h)(3/8)(dEz/dz)(J(J+1) - 3 m^2) in Hz. Rejects the S manifold.
Eigen::MatrixXcd quadrupole_hamiltonian(const SpinManifold& manifold, double theta_Q,
                                        double gradient, const PhysicalConstants& constants = {});

/// Per-m diagonal of quadrupole_hamiltonian for unit prefactor:
/// J(J+1) - 3 m^2.
double quadrupole_tensor_factor(double J, double m);

using Mat2 = Eigen::Matrix2cd;

/// Element <J,mp| D(U) |J,m> of the spin-J representation of an SU(2) matrix.
std::complex<double> wigner_element(double J, double mp, double m, const Mat2& U);

/// Full spin-J representation of an SU(2) matrix (same basis order as
/// build_spin_operators).
Eigen::MatrixXcd spin_representation(double J, const Mat2& U);

/// exp(-i 2 pi dt (v . sigma/2)) for a field vector v in Hz.
Mat2 su2_step(double vx, double vy, double vz, double dt);

/// Rotation matrix R with U sigma_k U^dagger = sum_j R(j,k) sigma_j.
Eigen::Matrix3d rotation_of(const Mat2& U);

}  // namespace cddclock
