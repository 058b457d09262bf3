#include "cddclock/propagator.hpp"

#include <cmath>
#include <complex>
#include <sstream>

#include "cddclock/errors.hpp"

namespace cddclock {

namespace {

using cd = std::complex<double>;

// Commutator-free fourth-order nodes and weights.
const double kSqrt3 = std::sqrt(3.0);
const double kC1 = 0.5 - kSqrt3 / 6.0;
const double kC2 = 0.5 + kSqrt3 / 6.0;
const double kA1 = 0.25 + kSqrt3 / 6.0;
const double kA2 = 0.25 - kSqrt3 / 6.0;

Eigen::MatrixXcd expm_hermitian(const Eigen::MatrixXcd& H, double dt) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H);
  const auto& w = es.eigenvalues();
  Eigen::VectorXcd phase(w.size());
  for (int k = 0; k < w.size(); ++k) phase(k) = std::polar(1.0, -kTwoPi * dt * w(k));
  return es.eigenvectors() * phase.asDiagonal() * es.eigenvectors().adjoint();
}

int step_count(double T, double dt) {
  if (T <= 0.0) return 0;
  const double n = std::ceil(T / dt - 1e-9);
  if (n > 2e9) throw DomainError("propagation window needs too many steps");
  return static_cast<int>(n);
}

Mat2 su2_of(const Eigen::Vector3d& v, double dt) { return su2_step(v(0), v(1), v(2), dt); }

}  // namespace

double max_step(double f_max) { return 1.0 / (50.0 * f_max); }

double resolve_step(const PropagationConfig& cfg, double f_max) {
  if (!(f_max > 0.0)) {
    return cfg.dt > 0.0 ? cfg.dt : 1.0;
  }
  if (cfg.dt <= 0.0) return 1.0 / (100.0 * f_max);
  if (cfg.dt > max_step(f_max) * (1.0 + 1e-12)) {
    std::ostringstream os;
    os << "time step " << cfg.dt << " s exceeds 1/(50 f_max) with f_max = " << f_max << " Hz";
    throw DomainError(os.str());
  }
  return cfg.dt;
}

Eigen::MatrixXcd propagator_matrix(const TimeDependentHamiltonian& H, double t0, double T,
                                   const PropagationConfig& cfg) {
  const double dt0 = resolve_step(cfg, H.f_max);
  const int n = step_count(T, dt0);
  Eigen::MatrixXcd U = Eigen::MatrixXcd::Identity(H.dim, H.dim);
  if (n == 0) return U;
  const double dt = T / n;
  for (int k = 0; k < n; ++k) {
    const double t = t0 + k * dt;
    if (cfg.method == Integrator::Midpoint) {
      U = expm_hermitian(H.at(t + 0.5 * dt), dt) * U;
    } else {
      const Eigen::MatrixXcd h1 = H.at(t + kC1 * dt);
      const Eigen::MatrixXcd h2 = H.at(t + kC2 * dt);
      U = expm_hermitian(kA2 * h1 + kA1 * h2, dt) * (expm_hermitian(kA1 * h1 + kA2 * h2, dt) * U);
    }
  }
  return U;
}

StateVector propagate(const TimeDependentHamiltonian& H, const StateVector& psi0, double T,
                      const PropagationConfig& cfg) {
  if (psi0.amplitudes.size() != H.dim) throw DomainError("state dimension mismatch");
  const double dt0 = resolve_step(cfg, H.f_max);
  const int n = step_count(T, dt0);
  StateVector out = psi0;
  if (n == 0) return out;
  const double dt = T / n;
  for (int k = 0; k < n; ++k) {
    const double t = psi0.time + k * dt;
    if (cfg.method == Integrator::Midpoint) {
      out.amplitudes = expm_hermitian(H.at(t + 0.5 * dt), dt) * out.amplitudes;
    } else {
      const Eigen::MatrixXcd h1 = H.at(t + kC1 * dt);
      const Eigen::MatrixXcd h2 = H.at(t + kC2 * dt);
      out.amplitudes = expm_hermitian(kA1 * h1 + kA2 * h2, dt) * out.amplitudes;
      out.amplitudes = expm_hermitian(kA2 * h1 + kA1 * h2, dt) * out.amplitudes;
    }
  }
  out.time = psi0.time + T;
  return out;
}

Mat2 propagate_su2(const SpinField& field, double t0, double T, const PropagationConfig& cfg,
                   const Su2Observer& observer) {
  const double dt0 = resolve_step(cfg, field.f_max);
  const int n = step_count(T, dt0);
  Mat2 U = Mat2::Identity();
  if (n == 0) return U;
  const double dt = T / n;
  for (int k = 0; k < n; ++k) {
    const double t = t0 + k * dt;
    if (observer) observer(t, U);
    if (cfg.method == Integrator::Midpoint) {
      U = su2_of(field.at(t + 0.5 * dt), dt) * U;
    } else {
      const Eigen::Vector3d v1 = field.at(t + kC1 * dt);
      const Eigen::Vector3d v2 = field.at(t + kC2 * dt);
      const Mat2 first = su2_of(kA1 * v1 + kA2 * v2, dt);
      const Mat2 second = su2_of(kA2 * v1 + kA1 * v2, dt);
      U = second * (first * U);
    }
  }
  return U;
}

SpinField manifold_field(const ManifoldDrive& m, double B0, Frame frame,
                         const PhysicalConstants& c) {
  const double w0 = bare_splitting(m, B0, c);
  const DriveStage s1 = m.stage1;
  const DriveStage s2 = m.stage2;
  const double g = m.manifold.g;
  SpinField f;
  if (frame == Frame::Lab) {
    f.f_max = std::max(std::abs(w0), s1.active() ? s1.omega + (s2.active() ? s2.omega : 0.0) : 0.0);
    f.at = [=](double t) {
      return Eigen::Vector3d(drive_field(s1, s2, g, t), 0.0, w0);
    };
  } else {
    const double d1 = w0 - s1.omega;
    f.f_max = std::max({std::abs(d1), 2.0 * s1.omega + (s2.active() ? s2.omega : 0.0)});
    f.at = [=](double t) {
      const double b = drive_field(s1, s2, g, t);
      const double th = kTwoPi * s1.omega * t;
      return Eigen::Vector3d(b * std::cos(th), -b * std::sin(th), d1);
    };
  }
  return f;
}

SpinField cross_coupled_field(const CddParameterSet& set, ManifoldLabel which, Frame frame,
                              const PhysicalConstants& c) {
  const ManifoldDrive& m = set.manifold(which);
  const double w0 = bare_splitting(m, set.B0, c);
  const ManifoldDrive S = set.S;
  const ManifoldDrive D = set.D;
  const double g = m.manifold.g;
  const double w1 = m.stage1.omega;
  auto total = [=](double t) {
    // drive_field with g = 1 returns the coil field in Hz before the g-factor.
    return g * (drive_field(S.stage1, S.stage2, 1.0, t) + drive_field(D.stage1, D.stage2, 1.0, t));
  };
  const double top = std::max(S.stage1.omega + S.stage2.omega, D.stage1.omega + D.stage2.omega);
  SpinField f;
  if (frame == Frame::Lab) {
    f.f_max = std::max(std::abs(w0), top);
    f.at = [=](double t) { return Eigen::Vector3d(total(t), 0.0, w0); };
  } else {
    f.f_max = std::max(std::abs(w0 - w1), top + w1);
    f.at = [=](double t) {
      const double b = total(t);
      const double th = kTwoPi * w1 * t;
      return Eigen::Vector3d(b * std::cos(th), -b * std::sin(th), w0 - w1);
    };
  }
  return f;
}

int joint_index(ManifoldLabel manifold, double m) {
  return manifold == ManifoldLabel::S ? index_of_m(0.5, m) : 2 + index_of_m(2.5, m);
}

Eigen::VectorXcd frame_phases(const CddParameterSet& set, double t) {
  Eigen::VectorXcd p(8);
  for (int k = 0; k < 2; ++k) p(k) = std::polar(1.0, -kTwoPi * set.S.stage1.omega * t * m_of_index(0.5, k));
  for (int k = 0; k < 6; ++k) {
    p(2 + k) = std::polar(1.0, -kTwoPi * set.D.stage1.omega * t * m_of_index(2.5, k));
  }
  return p;
}

TimeDependentHamiltonian joint_hamiltonian(const CddParameterSet& set, const ModelOptions& opt,
                                           Frame frame, const PhysicalConstants& c) {
  const SpinOperators opS = build_spin_operators(0.5);
  const SpinOperators opD = build_spin_operators(2.5);
  SpinField fS = opt.cross_coupling ? cross_coupled_field(set, ManifoldLabel::S, frame, c)
                                    : manifold_field(set.S, set.B0, frame, c);
  SpinField fD = opt.cross_coupling ? cross_coupled_field(set, ManifoldLabel::D, frame, c)
                                    : manifold_field(set.D, set.B0, frame, c);
  Eigen::MatrixXcd quad = Eigen::MatrixXcd::Zero(6, 6);
  if (opt.gradient != 0.0) {
    const double theta = opt.theta_Q > 0.0 ? opt.theta_Q : default_quadrupole_moment(c);
    quad = quadrupole_hamiltonian(set.D.manifold, theta, opt.gradient, c);
  }
  const LaserCoupling L = opt.laser;
  const int iS = joint_index(ManifoldLabel::S, L.m_S);
  const int iD = joint_index(ManifoldLabel::D, L.m_D);
  const double offset = -(L.m_D * bare_splitting(set.D, set.B0, c) -
                          L.m_S * bare_splitting(set.S, set.B0, c)) -
                        L.detuning;
  const double beat = kTwoPi * (set.D.stage1.omega * L.m_D - set.S.stage1.omega * L.m_S);
  const bool rotating = frame == Frame::FirstRotating;

  TimeDependentHamiltonian H;
  H.dim = 8;
  H.f_max = std::max({fS.f_max, fD.f_max, L.Omega_L != 0.0 ? std::abs(offset) : 0.0,
                      rotating && L.Omega_L != 0.0 ? std::abs(beat) / kTwoPi : 0.0});
  H.at = [=](double t) {
    Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(8, 8);
    const Eigen::Vector3d vS = fS.at(t);
    const Eigen::Vector3d vD = fD.at(t);
    h.block(0, 0, 2, 2) = vS(0) * opS.jx + vS(1) * opS.jy + vS(2) * opS.jz;
    h.block(2, 2, 6, 6) = vD(0) * opD.jx + vD(1) * opD.jy + vD(2) * opD.jz + quad;
    if (L.Omega_L != 0.0) {
      h.block(2, 2, 6, 6) += offset * Eigen::MatrixXcd::Identity(6, 6);
      const cd coupling = rotating ? std::polar(0.5 * L.Omega_L, beat * t) : cd(0.5 * L.Omega_L);
      h(iD, iS) = coupling;
      h(iS, iD) = std::conj(coupling);
    }
    return h;
  };
  return H;
}

}  // namespace cddclock
