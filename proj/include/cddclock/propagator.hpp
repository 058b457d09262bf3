#pragma once

#include <functional>

#include <Eigen/Dense>

#include "cddclock/constants.hpp"
#include "cddclock/dressing.hpp"
#include "cddclock/spin.hpp"

namespace cddclock {

enum class Integrator { Midpoint, CF4 };
enum class Frame { Lab, FirstRotating };

struct PropagationConfig {
  double dt = 0.0;  // s; 0 selects 1/(100 f_max)
  Integrator method = Integrator::CF4;
  Frame frame = Frame::Lab;
};

/// Amplitudes over the joint basis: S levels (m = +1/2, -1/2) followed by
/// D levels (m = +5/2 ... -5/2).
struct StateVector {
  Eigen::VectorXcd amplitudes;
  double time = 0.0;
};

/// H(t)/h in Hz on a fixed dimension, with the largest frequency it contains.
struct TimeDependentHamiltonian {
  int dim = 0;
  double f_max = 0.0;
  std::function<Eigen::MatrixXcd(double)> at;
};

/// Field vector v(t) in Hz for H = v . J on a single manifold.
struct SpinField {
  double f_max = 0.0;
  std::function<Eigen::Vector3d(double)> at;
};

/// Largest allowed step for a Hamiltonian with top frequency f_max.
double max_step(double f_max);
/// Step actually used: cfg.dt, or 1/(100 f_max) when unset. Throws DomainError
/// naming f_max when cfg.dt exceeds max_step.
double resolve_step(const PropagationConfig& cfg, double f_max);

StateVector propagate(const TimeDependentHamiltonian& H, const StateVector& psi0, double T,
                      const PropagationConfig& cfg);

/// Full propagator from t0 to t0 + T.
Eigen::MatrixXcd propagator_matrix(const TimeDependentHamiltonian& H, double t0, double T,
                                   const PropagationConfig& cfg);

/// Called at the start of every step with the time and the accumulated
/// SU(2) propagator from t0.
using Su2Observer = std::function<void(double, const Mat2&)>;

/// SU(2) propagator of H = v(t) . J from t0 to t0 + T. The step is shrunk so
/// that an integer number of steps covers T exactly.
Mat2 propagate_su2(const SpinField& field, double t0, double T, const PropagationConfig& cfg,
                   const Su2Observer& observer = {});

/// Laser coupling between one S and one D Zeeman level, in the optical frame
/// of the laser. `detuning` is measured from the bare line of that pair.
struct LaserCoupling {
  double Omega_L = 0.0;
  double detuning = 0.0;
  double m_S = -0.5;
  double m_D = -1.5;
};

struct ModelOptions {
  /// Let every coil field act on both manifolds.
  bool cross_coupling = false;
  double gradient = 0.0;  // V/m^2
  double theta_Q = 0.0;   // C m^2; 0 selects the default moment
  LaserCoupling laser;
};

/// Rf field of one manifold in the chosen frame. The first rotating frame
/// rotates about z at the stage-1 frequency and keeps all counter-rotating
/// terms.
SpinField manifold_field(const ManifoldDrive& m, double B0, Frame frame,
                         const PhysicalConstants& c = {});

/// Field of a manifold under the summed coil fields of both manifolds.
SpinField cross_coupled_field(const CddParameterSet& set, ManifoldLabel which, Frame frame,
                              const PhysicalConstants& c = {});

/// Joint 8-level Hamiltonian of both manifolds, optional quadrupole term and
/// optional laser coupling.
TimeDependentHamiltonian joint_hamiltonian(const CddParameterSet& set, const ModelOptions& opt,
                                           Frame frame, const PhysicalConstants& c = {});

/// Basis index in the joint vector.
int joint_index(ManifoldLabel manifold, double m);

/// Diagonal frame operator mapping first-rotating-frame amplitudes at time t
/// to lab amplitudes.
Eigen::VectorXcd frame_phases(const CddParameterSet& set, double t);

}  // namespace cddclock
