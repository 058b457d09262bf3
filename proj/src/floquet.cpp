#include "cddclock/floquet.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <sstream>

#include "cddclock/errors.hpp"
#include "cddclock/parallel.hpp"

namespace cddclock {

namespace {

using cd = std::complex<double>;

struct Branch {
  double m0 = 0.0;
  double m1 = 0.0;
};

// Axis and angle of U = cos a - i sin a (n . sigma).
void axis_angle(const Mat2& U, double& a, Eigen::Vector3d& n) {
  const double c = 0.5 * (U(0, 0).real() + U(1, 1).real());
  Eigen::Vector3d s(-0.5 * (U(0, 1).imag() + U(1, 0).imag()), 0.5 * (U(1, 0).real() - U(0, 1).real()),
                    0.5 * (U(1, 1).imag() - U(0, 0).imag()));
  const double sn = s.norm();
  a = std::atan2(sn, c);
  n = sn > 0.0 ? Eigen::Vector3d(s / sn) : Eigen::Vector3d::UnitZ();
}

// SU(2) element rotating z onto n.
Mat2 align_z_to(const Eigen::Vector3d& n) {
  const Eigen::Vector3d z = Eigen::Vector3d::UnitZ();
  Eigen::Vector3d axis = z.cross(n);
  const double sa = axis.norm();
  const double angle = std::atan2(sa, n.dot(z));
  if (sa < 1e-15) {
    if (n.z() > 0) return Mat2::Identity();
    axis = Eigen::Vector3d::UnitX();
  } else {
    axis /= sa;
  }
  const Eigen::Vector3d v = axis * angle / kTwoPi;
  return su2_step(v.x(), v.y(), v.z(), 1.0);
}

double state_overlap(double J, double m, const Eigen::Vector3d& a, const Eigen::Vector3d& b) {
  const double beta = std::acos(std::clamp(a.dot(b), -1.0, 1.0));
  const Mat2 R = su2_step(0.0, beta / kTwoPi, 0.0, 1.0);
  return std::norm(wigner_element(J, m, m, R));
}

ManifoldDrive shifted(const ManifoldDrive& m, const CommensuratePeriod& p) {
  ManifoldDrive w = m;
  w.stage1.omega += p.omega1_shift;
  w.bare_offset += p.omega1_shift;
  return w;
}

struct FloquetCore {
  ManifoldSpectrum spectrum;
  ManifoldDrive shifted_drive;
  SpinField field;
  double eps = 0.0;  // innermost ladder spacing in the chosen frame
  Frame frame = Frame::Lab;
};

FloquetCore floquet_core(const ManifoldDrive& m, double B0, Branch branch,
                         const FloquetOptions& opt, const PhysicalConstants& c) {
  FloquetCore core;
  ManifoldSpectrum& out = core.spectrum;
  out.manifold = m.manifold.label;
  out.period = commensurate_period(m, B0, opt.shift_tolerance, opt.max_period, c);
  const double T = out.period.period;
  core.shifted_drive = shifted(m, out.period);
  const ManifoldDrive& w = core.shifted_drive;
  core.frame = w.stage1.active() ? opt.propagation.frame : Frame::Lab;
  core.field = manifold_field(w, B0, core.frame, c);

  Eigen::Matrix3d moments = Eigen::Matrix3d::Zero();
  long samples = 0;
  Su2Observer observer;
  if (opt.qps_average) {
    observer = [&](double, const Mat2& U) {
      const Eigen::Vector3d r = rotation_of(U).row(2).transpose();
      moments += r * r.transpose();
      ++samples;
    };
  }
  PropagationConfig cfg = opt.propagation;
  cfg.frame = core.frame;
  const Mat2 U = propagate_su2(core.field, 0.0, T, cfg, observer);

  double a = 0.0;
  Eigen::Vector3d n;
  axis_angle(U, a, n);
  out.analytic_axis = analytic_dressed_axis(w, B0, c);
  out.analytic_gap = analytic_inner_splitting(w, B0, c);
  if (n.dot(out.analytic_axis) < 0.0) {
    n = -n;
    a = -a;
  }
  out.axis = n;

  // Quasi-energy branch: 2 pi T E_m must equal 2 a m modulo 2 pi with
  // E_m = m0 w1 + m1 w2 + m eps, fixing eps modulo 2/T.
  double outer = 0.0;
  if (w.stage1.active() && core.frame == Frame::Lab) outer += branch.m0 * out.period.cycles1;
  if (w.stage2.active()) outer += branch.m1 * out.period.cycles2;
  const long parity = static_cast<long>(std::llround(2.0 * outer)) & 1L;
  const double base = a / (kPi * T) + static_cast<double>(parity) / T;
  const double k = std::round((out.analytic_gap - base) * T / 2.0);
  core.eps = base + 2.0 * k / T;
  out.gap = core.eps;

  if (opt.qps_average && samples > 0) {
    out.p2_average = 1.5 * n.dot(moments * n) / static_cast<double>(samples) - 0.5;
  }

  const double J = m.manifold.J;
  double worst = 1.0;
  for (int i = 0; i < m.manifold.dim(); ++i) {
    QuasiEnergyLevel lv;
    lv.m = m_of_index(J, i);
    lv.energy = lv.m * out.gap;
    lv.overlap = state_overlap(J, lv.m, n, out.analytic_axis);
    worst = std::min(worst, lv.overlap);
    out.levels.push_back(lv);
  }
  if (worst < 0.6) {
    std::ostringstream os;
    os << "strong mixing, labels unreliable (overlap " << worst << ")";
    throw NumericError(os.str());
  }
  return core;
}

Branch branch_of(const TargetTransition& t, ManifoldLabel l) {
  return l == ManifoldLabel::S ? Branch{t.m0_S, t.m1_S} : Branch{t.m0_D, t.m1_D};
}

double inner_target(const ManifoldDrive& m, double m0, double m1, double m2) {
  if (!m.stage1.active()) return m0;
  if (!m.stage2.active()) return m1;
  return m2;
}

double level_offset(const ManifoldDrive& m, const ManifoldSpectrum& q, double w0_ref, double m0,
                    double m1, double m2) {
  if (!m.stage1.active()) return m0 * (q.gap - w0_ref);
  if (!m.stage2.active()) return m0 * (m.stage1.omega - w0_ref) + m1 * q.gap;
  return m0 * (m.stage1.omega - w0_ref) + m1 * m.stage2.omega + m2 * q.gap;
}

// Fourier content of the bare |m_b> component of every Floquet state.
struct Harmonic {
  double m = 0.0;         // Floquet state label
  double harmonic = 0.0;  // stage-2 ladder index, or m without stage 2
  double position = 0.0;  // lab frequency minus m_b times the bare splitting
  cd amplitude;
};

std::vector<Harmonic> bare_component_harmonics(const FloquetCore& core, double B0, double m_b,
                                               const FloquetOptions& opt,
                                               const PhysicalConstants& c) {
  const ManifoldDrive& w = core.shifted_drive;
  const double J = w.manifold.J;
  const int dim = w.manifold.dim();
  const double T = core.spectrum.period.period;
  const double w0 = bare_splitting(w, B0, c);
  const Eigen::MatrixXcd V = spin_representation(J, align_z_to(core.spectrum.axis));

  std::vector<Harmonic> list;
  for (int i = 0; i < dim; ++i) {
    const double m = m_of_index(J, i);
    const double carrier = (w.stage1.active() && core.frame == Frame::Lab) ? m_b * w.stage1.omega : 0.0;
    const double frame_fix = core.frame == Frame::Lab ? 0.0 : m_b * w.stage1.omega;
    if (w.stage2.active()) {
      for (int h = 0; h < dim; ++h) {
        const double m1 = m_of_index(J, h);
        const double f = carrier + m1 * w.stage2.omega + m * core.eps;
        list.push_back({m, m1, f + frame_fix - m_b * w0, cd{}});
      }
    } else {
      const double f = carrier + m * core.eps;
      list.push_back({m, m, f + frame_fix - m_b * w0, cd{}});
    }
  }

  const int nb = index_of_m(J, m_b);
  std::vector<cd> sums(list.size());
  std::vector<cd> phasor(list.size(), cd{1.0, 0.0});
  std::vector<cd> step(list.size());
  long count = 0;
  double dt = 0.0;
  double last_t = -1.0;
  Eigen::VectorXcd row(dim);
  std::vector<double> freq(list.size());
  for (size_t j = 0; j < list.size(); ++j) {
    // Lab-frame frequency of the component in the propagation frame.
    freq[j] = list[j].position + m_b * w0 - (core.frame == Frame::Lab ? 0.0 : m_b * w.stage1.omega);
  }
  Su2Observer obs = [&](double t, const Mat2& U) {
    if (count == 1) {
      dt = t - last_t;
      for (size_t j = 0; j < list.size(); ++j) step[j] = std::polar(1.0, kTwoPi * freq[j] * dt);
    }
    if (count >= 1) {
      for (size_t j = 0; j < list.size(); ++j) phasor[j] *= step[j];
    }
    for (int k = 0; k < dim; ++k) row(k) = wigner_element(J, m_of_index(J, nb), m_of_index(J, k), U);
    for (size_t j = 0; j < list.size(); ++j) {
      const int col = index_of_m(J, list[j].m);
      const cd comp = row.cwiseProduct(V.col(col)).sum();
      sums[j] += comp * phasor[j];
    }
    last_t = t;
    ++count;
  };
  PropagationConfig cfg = opt.propagation;
  cfg.frame = core.frame;
  propagate_su2(core.field, 0.0, T, cfg, obs);
  for (size_t j = 0; j < list.size(); ++j) list[j].amplitude = sums[j] / static_cast<double>(count);
  return list;
}

}  // namespace

CommensuratePeriod commensurate_period(const ManifoldDrive& m, double B0, double tol,
                                       double max_period, const PhysicalConstants& c) {
  CommensuratePeriod p;
  if (!m.stage1.active()) {
    p.period = 1.0 / (8.0 * std::max(std::abs(bare_splitting(m, B0, c)), 1.0));
    return p;
  }
  if (!(m.stage1.omega > 0.0)) throw DomainError("stage-1 frequency must be positive");
  if (!m.stage2.active()) {
    p.period = 1.0 / m.stage1.omega;
    p.cycles1 = 1;
    return p;
  }
  if (!(m.stage2.omega > 0.0)) throw DomainError("stage-2 frequency must be positive");
  for (long n = 1;; ++n) {
    const double T = n / m.stage2.omega;
    if (T > max_period) break;
    const double K = std::round(m.stage1.omega * T);
    const double shift = K / T - m.stage1.omega;
    if (K >= 1.0 && std::abs(shift) <= tol) {
      p.period = T;
      p.omega1_shift = shift;
      p.cycles1 = static_cast<long>(K);
      p.cycles2 = n;
      return p;
    }
  }
  std::ostringstream os;
  os << "no commensurate period below " << max_period << " s within " << tol
     << " Hz stage-1 shift";
  throw NumericError(os.str());
}

Eigen::Vector3d analytic_dressed_axis(const ManifoldDrive& m, double B0,
                                      const PhysicalConstants& c) {
  const double w0 = bare_splitting(m, B0, c);
  if (!m.stage1.active()) return w0 >= 0.0 ? Eigen::Vector3d::UnitZ() : Eigen::Vector3d(-Eigen::Vector3d::UnitZ());
  const double g = m.manifold.g;
  const double d1 = w0 - m.stage1.omega;
  const double R1 = 0.5 * g * m.stage1.Omega;
  const double p1 = m.stage1.phase;
  const double wb1 = std::hypot(R1, d1);
  const Eigen::Vector3d n1 = Eigen::Vector3d(R1 * std::cos(p1), R1 * std::sin(p1), d1) / wb1;
  if (!m.stage2.active()) return n1;
  const Eigen::Vector3d eperp(-std::sin(p1), std::cos(p1), 0.0);
  const Eigen::Vector3d e3 = n1.cross(eperp);
  const double d2 = wb1 - m.stage2.omega;
  const double R2 = 0.5 * g * first_frame_amplitude(m.stage2);
  const double p2 = m.stage2.phase;
  const Eigen::Vector3d v = d2 * n1 + R2 * (std::cos(p2) * eperp + std::sin(p2) * e3);
  return v / v.norm();
}

double analytic_inner_splitting(const ManifoldDrive& m, double B0, const PhysicalConstants& c) {
  const double w0 = bare_splitting(m, B0, c);
  if (!m.stage1.active()) return std::abs(w0);
  const double wb1 = dressed_splitting(m.stage1.Omega, w0 - m.stage1.omega, m.manifold.g);
  if (!m.stage2.active()) return wb1;
  return dressed_splitting(first_frame_amplitude(m.stage2), wb1 - m.stage2.omega, m.manifold.g);
}

ManifoldSpectrum manifold_quasi_energies(const ManifoldDrive& m, double B0, double m0, double m1,
                                         const FloquetOptions& opt, const PhysicalConstants& c) {
  return floquet_core(m, B0, {m0, m1}, opt, c).spectrum;
}

QuasiEnergySpectrum quasi_energies(const CddParameterSet& set, const FloquetOptions& opt,
                                   const PhysicalConstants& c) {
  QuasiEnergySpectrum q;
  ManifoldSpectrum out[2];
  const ManifoldDrive* drives[2] = {&set.S, &set.D};
  const ManifoldLabel labels[2] = {ManifoldLabel::S, ManifoldLabel::D};
  parallel_for(2, opt.jobs, [&](int i) {
    out[i] = floquet_core(*drives[i], set.B0, branch_of(set.target, labels[i]), opt, c).spectrum;
  });
  q.S = out[0];
  q.D = out[1];
  return q;
}

double numeric_transition_frequency(const QuasiEnergySpectrum& q, const CddParameterSet& set,
                                    const CddParameterSet& reference) {
  const TargetTransition& t = set.target;
  const double w0S = bare_splitting(reference.S, reference.B0);
  const double w0D = bare_splitting(reference.D, reference.B0);
  return level_offset(set.D, q.D, w0D, t.m0_D, t.m1_D, t.m2_D) -
         level_offset(set.S, q.S, w0S, t.m0_S, t.m1_S, t.m2_S);
}

SensitivityFit magnetic_sensitivity_numeric(const CddParameterSet& set,
                                            const std::vector<double>& grid,
                                            const FloquetOptions& opt,
                                            const PhysicalConstants& c) {
  const int n = static_cast<int>(grid.size());
  if (n < 5) throw DomainError("sensitivity fit needs at least 5 field points");
  std::vector<double> sorted = grid;
  std::sort(sorted.begin(), sorted.end());
  for (int i = 0; i < n; ++i) {
    if (std::abs(sorted[i] + sorted[n - 1 - i]) > 1e-9 * std::max(1.0, std::abs(sorted[i]))) {
      throw DomainError("field grid must be symmetric about zero");
    }
  }
  SensitivityFit fit;
  fit.dB = grid;
  fit.frequency.assign(n, 0.0);
  FloquetOptions inner = opt;
  inner.jobs = 1;
  parallel_for(n, opt.jobs, [&](int i) {
    CddParameterSet p = set;
    p.B0 = set.B0 + 1e-9 * grid[i];
    resolve_detunings(p, c);
    fit.frequency[i] = numeric_transition_frequency(quasi_energies(p, inner, c), p, set);
  });
  double scale = 0.0;
  for (double x : grid) scale = std::max(scale, std::abs(x));
  Eigen::MatrixXd A(n, 3);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    const double x = grid[i] / scale;
    A(i, 0) = 1.0;
    A(i, 1) = x;
    A(i, 2) = x * x;
    y(i) = fit.frequency[i];
  }
  // Subtract the mean first so the fit works on the small variation only.
  const double mean = y.mean();
  const Eigen::VectorXd centered = y - Eigen::VectorXd::Constant(n, mean);
  const Eigen::VectorXd coef = A.colPivHouseholderQr().solve(centered);
  fit.constant = coef(0) + mean;
  fit.linear = coef(1) / scale;
  fit.quadratic = coef(2) / (scale * scale);
  const Eigen::VectorXd r = A * coef - centered;
  fit.residual = std::sqrt(r.squaredNorm() / n);
  const double span = y.maxCoeff() - y.minCoeff();
  fit.flagged = fit.residual > 0.01 * span && span > 0.0;
  return fit;
}

double qps_gradient_coefficient(const CddParameterSet& set, double theta_Q,
                                const FloquetOptions& opt, const PhysicalConstants& c) {
  FloquetOptions o = opt;
  o.qps_average = true;
  const TargetTransition& t = set.target;
  const FloquetCore core = floquet_core(set.D, set.B0, branch_of(t, ManifoldLabel::D), o, c);
  const double m = inner_target(set.D, t.m0_D, t.m1_D, t.m2_D);
  const double J = set.D.manifold.J;
  return theta_Q / c.planck_h * 0.375 * quadrupole_tensor_factor(J, m) * core.spectrum.p2_average;
}

MagicSearchResult numeric_magic_search(const CddParameterSet& set, double gradient, double lo,
                                       double hi, double tolerance, const FloquetOptions& opt,
                                       const PhysicalConstants& c) {
  if (gradient == 0.0) {
    throw DomainError("gradient is zero: the quadrupole derivative vanishes identically");
  }
  if (!set.D.stage2.active()) throw DomainError("magic search needs a second D stage");
  const double theta = default_quadrupole_moment(c);
  MagicSearchResult res;
  auto f = [&](double d2) {
    CddParameterSet p = set;
    retune(p.D, p.B0, p.D.stage1.Delta, d2, c);
    ++res.evaluations;
    return qps_gradient_coefficient(p, theta, opt, c);
  };
  double a = lo, b = hi;
  double fa = f(a), fb = f(b);
  if (fa * fb > 0.0) {
    std::ostringstream os;
    os << "no zero crossing of the gradient sensitivity in [" << lo << ", " << hi << "] Hz";
    throw NumericError(os.str());
  }
  // Illinois variant of the secant method; stays inside the bracket.
  int side = 0;
  double x = a;
  for (int it = 0; it < 100; ++it) {
    x = (a * fb - b * fa) / (fb - fa);
    const double fx = f(x);
    if (fx == 0.0 || std::abs(b - a) < tolerance) {
      res.Delta2_D = x;
      res.coefficient = fx;
      return res;
    }
    if ((fx > 0.0) == (fb > 0.0)) {
      const double prev = b;
      b = x;
      fb = fx;
      if (side == 1) fa *= 0.5;
      side = 1;
      if (std::abs(prev - x) < tolerance) {
        res.Delta2_D = x;
        res.coefficient = fx;
        return res;
      }
    } else {
      const double prev = a;
      a = x;
      fa = fx;
      if (side == -1) fb *= 0.5;
      side = -1;
      if (std::abs(prev - x) < tolerance) {
        res.Delta2_D = x;
        res.coefficient = fx;
        return res;
      }
    }
  }
  throw NumericError("magic search did not converge");
}

double rabi_lineshape(double rabi, double detuning, double t) {
  const double w2 = rabi * rabi + detuning * detuning;
  if (w2 == 0.0) return 0.0;
  const double s = std::sin(kPi * std::sqrt(w2) * t);
  return rabi * rabi / w2 * s * s;
}

RabiScan simulate_rabi_scan(const CddParameterSet& set, const std::vector<double>& grid,
                            double probe_time, const LaserCoupling& pair,
                            const FloquetOptions& opt, const PhysicalConstants& c) {
  validate(set, c);
  if (!(probe_time > 0.0)) throw DomainError("probe time must be positive");
  const TargetTransition& t = set.target;
  const FloquetCore coreS = floquet_core(set.S, set.B0, branch_of(t, ManifoldLabel::S), opt, c);
  const FloquetCore coreD = floquet_core(set.D, set.B0, branch_of(t, ManifoldLabel::D), opt, c);
  const auto hS = bare_component_harmonics(coreS, set.B0, pair.m_S, opt, c);
  const auto hD = bare_component_harmonics(coreD, set.B0, pair.m_D, opt, c);
  const double target = inner_target(set.S, t.m0_S, t.m1_S, t.m2_S);

  RabiScan scan;
  scan.detuning = grid;
  for (const Harmonic& a : hS) {
    if (a.m != target || std::abs(a.amplitude) < 1e-4) continue;
    for (const Harmonic& b : hD) {
      const double rabi = set.laser_Omega * std::abs(a.amplitude) * std::abs(b.amplitude);
      if (rabi < 1e-6 * set.laser_Omega) continue;
      scan.lines.push_back({b.position - a.position, rabi, b.m, a.harmonic, b.harmonic});
    }
  }
  std::sort(scan.lines.begin(), scan.lines.end(),
            [](const SpectralLine& x, const SpectralLine& y) { return x.position < y.position; });
  scan.excitation.assign(grid.size(), 0.0);
  for (size_t i = 0; i < grid.size(); ++i) {
    double p = 0.0;
    for (const SpectralLine& l : scan.lines) p += rabi_lineshape(l.rabi, grid[i] - l.position, probe_time);
    scan.excitation[i] = std::min(1.0, p);
  }
  return scan;
}

}  // namespace cddclock
