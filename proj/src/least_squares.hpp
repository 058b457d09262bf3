#pragma once

#include <Eigen/Dense>
#include <functional>
#include <unsupported/Eigen/NonLinearOptimization>
#include <unsupported/Eigen/NumericalDiff>

namespace cddclock::detail {

using ResidualFn = std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&)>;

struct LeastSquaresResult {
  Eigen::VectorXd params;
  Eigen::VectorXd errors;  // sqrt(diag(cov)) scaled by the residual variance
  double rss = 0.0;
  int status = 0;
  bool converged = false;
};

struct LsqFunctor {
  using Scalar = double;
  enum { InputsAtCompileTime = Eigen::Dynamic, ValuesAtCompileTime = Eigen::Dynamic };
  using InputType = Eigen::VectorXd;
  using ValueType = Eigen::VectorXd;
  using JacobianType = Eigen::MatrixXd;

  ResidualFn fn;
  int n_in;
  int n_out;
  int inputs() const { return n_in; }
  int values() const { return n_out; }
  int operator()(const Eigen::VectorXd& x, Eigen::VectorXd& f) const {
    fn(x, f);
    return 0;
  }
};

inline LeastSquaresResult least_squares(const ResidualFn& fn, Eigen::VectorXd x0, int n_residuals) {
  LsqFunctor f{fn, static_cast<int>(x0.size()), n_residuals};
  Eigen::NumericalDiff<LsqFunctor, Eigen::Central> nd(f);
  Eigen::LevenbergMarquardt<Eigen::NumericalDiff<LsqFunctor, Eigen::Central>> lm(nd);
  lm.parameters.xtol = 1e-14;
  lm.parameters.ftol = 1e-14;
  lm.parameters.maxfev = 4000;
  LeastSquaresResult r;
  r.status = lm.minimize(x0);
  r.params = x0;
  Eigen::VectorXd res(n_residuals);
  fn(x0, res);
  r.rss = res.squaredNorm();
  r.converged = r.status == Eigen::LevenbergMarquardtSpace::RelativeReductionTooSmall ||
                r.status == Eigen::LevenbergMarquardtSpace::RelativeErrorTooSmall ||
                r.status == Eigen::LevenbergMarquardtSpace::RelativeErrorAndReductionTooSmall ||
                r.status == Eigen::LevenbergMarquardtSpace::CosinusTooSmall ||
                r.status == Eigen::LevenbergMarquardtSpace::XtolTooSmall ||
                r.status == Eigen::LevenbergMarquardtSpace::FtolTooSmall;
  Eigen::MatrixXd J(n_residuals, x0.size());
  nd.df(x0, J);
  const int dof = std::max(1, n_residuals - static_cast<int>(x0.size()));
  const Eigen::MatrixXd cov = (J.transpose() * J).inverse() * (r.rss / dof);
  r.errors = cov.diagonal().cwiseAbs().cwiseSqrt();
  return r;
}

}  // namespace cddclock::detail
