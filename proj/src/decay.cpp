#include "cddclock/decay.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "cddclock/errors.hpp"
#include "least_squares.hpp"

namespace cddclock {

namespace {

double flop(double t, double Gamma, double Omega, double inv_g2) {
  return 0.5 * (1.0 - std::cos(2.0 * M_PI * Omega * t) * std::exp(-t / Gamma - 0.5 * inv_g2 * t * t));
}

}  // namespace

double rabi_flop_probability(double t, const DecayModel& m) {
  if (t < 0.0) throw DomainError("flop time must be non-negative");
  return flop(t, m.Gamma, m.Omega_L, 1.0 / (m.gamma * m.gamma));
}

DecayFit fit_decay(const std::vector<double>& times, const std::vector<double>& probabilities, double Gamma) {
  if (times.size() != probabilities.size()) throw DomainError("times and probabilities differ in length");
  if (times.size() < 20) throw DomainError("decay fit needs at least 20 points");
  const auto [tmin, tmax] = std::minmax_element(times.begin(), times.end());
  const double span = *tmax - *tmin;
  const int n = static_cast<int>(times.size());

  // Coarse periodogram for the Rabi frequency, then a joint fit.
  double best_f = 0.0, best = -1.0;
  const double f_hi = 0.5 * (n - 1) / span;
  const int grid = 4000;
  for (int k = 1; k <= grid; ++k) {
    const double f = f_hi * k / grid;
    double c = 0.0;
    for (int i = 0; i < n; ++i) c -= (probabilities[i] - 0.5) * std::cos(2.0 * M_PI * f * times[i]);
    if (c > best) {
      best = c;
      best_f = f;
    }
  }

  auto residual = [&](const Eigen::VectorXd& x, Eigen::VectorXd& r) {
    for (int i = 0; i < n; ++i) r(i) = flop(times[i], Gamma, x(0), x(1)) - probabilities[i];
  };
  detail::LeastSquaresResult best_fit;
  best_fit.rss = INFINITY;
  for (double g0 : {0.25 * span, 0.5 * span, span, 3.0 * span}) {
    Eigen::VectorXd x0(2);
    x0 << best_f, 1.0 / (g0 * g0);
    const detail::LeastSquaresResult r = detail::least_squares(residual, x0, n);
    if (r.rss < best_fit.rss) best_fit = r;
  }
  if (!best_fit.converged || !std::isfinite(best_fit.rss)) {
    std::ostringstream msg;
    msg << "decay fit did not converge (status " << best_fit.status << ", residual " << best_fit.rss << ")";
    throw NumericError(msg.str());
  }
  DecayFit out;
  out.model.Gamma = Gamma;
  out.model.Omega_L = best_fit.params(0);
  out.Omega_L_err = best_fit.errors(0);
  out.inv_gamma2 = best_fit.params(1);
  out.inv_gamma2_err = best_fit.errors(1);
  out.model.gamma = out.inv_gamma2 > 0.0 ? 1.0 / std::sqrt(out.inv_gamma2) : INFINITY;
  out.gamma_err = out.inv_gamma2 > 0.0 ? 0.5 * out.inv_gamma2_err * std::pow(out.inv_gamma2, -1.5) : INFINITY;
  out.rss = best_fit.rss;
  return out;
}

std::vector<double> sample_flop(const std::vector<double>& times, const DecayModel& m, int shots,
                                std::uint64_t seed) {
  if (shots < 1) throw DomainError("shots must be positive");
  std::mt19937_64 rng(seed);
  std::vector<double> out;
  for (double t : times) {
    std::binomial_distribution<int> b(shots, rabi_flop_probability(t, m));
    out.push_back(static_cast<double>(b(rng)) / shots);
  }
  return out;
}

}  // namespace cddclock
