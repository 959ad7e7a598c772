#include "deepcent/weibull.hpp"

#include <Eigen/Cholesky>
#include <Eigen/QR>
#include <cmath>
#include <limits>
#include <string>

#include "deepcent/errors.hpp"

namespace deepcent::baselines {

namespace {

constexpr int kMaxIterations = 500;
constexpr double kTargetGradientNorm = 1e-8;     // loop exit
constexpr double kConvergedGradientNorm = 1e-6;  // honest `converged` bar
constexpr int kMaxBacktracks = 60;

Eigen::MatrixXd with_intercept(const Eigen::MatrixXd& X) {
  Eigen::MatrixXd D(X.rows(), X.cols() + 1);
  D.col(0).setOnes();
  D.rightCols(X.cols()) = X;
  return D;
}

// log-likelihood in the (beta, log sigma) parameterization; -inf when the
// exponentials overflow so the line search rejects the step.
double loglik(const Eigen::MatrixXd& D, const Eigen::VectorXd& logy,
              const Eigen::VectorXi& delta, const Eigen::VectorXd& beta,
              double log_sigma) {
  const double sigma = std::exp(log_sigma);
  double total = 0.0;
  const Eigen::VectorXd eta = D * beta;
  for (Eigen::Index i = 0; i < logy.size(); ++i) {
    const double z = (logy[i] - eta[i]) / sigma;
    if (z > 700.0) return -std::numeric_limits<double>::infinity();
    total += delta[i] * (z - log_sigma) - std::exp(z);
  }
  return std::isfinite(total) ? total : -std::numeric_limits<double>::infinity();
}

void gradient_hessian(const Eigen::MatrixXd& D, const Eigen::VectorXd& logy,
                      const Eigen::VectorXi& delta, const Eigen::VectorXd& beta,
                      double log_sigma, Eigen::VectorXd& grad, Eigen::MatrixXd& hess) {
  const Eigen::Index p = D.cols();
  const double sigma = std::exp(log_sigma);
  grad.setZero(p + 1);
  hess.setZero(p + 1, p + 1);
  const Eigen::VectorXd eta = D * beta;
  for (Eigen::Index i = 0; i < logy.size(); ++i) {
    const double z = (logy[i] - eta[i]) / sigma;
    const double u = std::exp(std::min(z, 700.0));
    const double d = static_cast<double>(delta[i]);
    const Eigen::VectorXd xi = D.row(i).transpose();
    grad.head(p) += (u - d) / sigma * xi;
    grad[p] += u * z - d * (z + 1.0);
    hess.topLeftCorner(p, p) -= u / (sigma * sigma) * xi * xi.transpose();
    const double cross = -(u * z + u - d) / sigma;
    hess.block(0, p, p, 1) += cross * xi;
    hess.block(p, 0, 1, p) += cross * xi.transpose();
    hess(p, p) += -u * z * z - u * z + d * z;
  }
}

WeibullModel fit_impl(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                      const Eigen::VectorXi& delta) {
  if (X.rows() != y.size() || y.size() != delta.size()) {
    throw DataError("fit_weibull: row count mismatch");
  }
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (!(y[i] > 0.0)) throw DataError("fit_weibull: times must be positive");
    if (delta[i] != 0 && delta[i] != 1) {
      throw DataError("fit_weibull: event indicator outside {0,1}");
    }
  }
  const Eigen::MatrixXd D = with_intercept(X);
  const Eigen::Index p = D.cols();

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(D);
  if (qr.rank() < p) throw DataError("fit_weibull: rank-deficient design matrix");

  const Eigen::VectorXd logy = y.array().log();
  std::vector<int> event_rows;
  for (Eigen::Index i = 0; i < delta.size(); ++i) {
    if (delta[i] == 1) event_rows.push_back(static_cast<int>(i));
  }
  if (event_rows.empty()) throw TrainingError("fit_weibull: no observed events");

  // start from least squares on the observed events, log sigma = 0
  Eigen::MatrixXd De(event_rows.size(), p);
  Eigen::VectorXd le(event_rows.size());
  for (std::size_t r = 0; r < event_rows.size(); ++r) {
    De.row(r) = D.row(event_rows[r]);
    le[r] = logy[event_rows[r]];
  }
  Eigen::VectorXd beta = De.colPivHouseholderQr().solve(le);
  double log_sigma = 0.0;

  double ll = loglik(D, logy, delta, beta, log_sigma);
  if (!std::isfinite(ll)) {
    beta.setZero();
    beta[0] = le.mean();
    ll = loglik(D, logy, delta, beta, log_sigma);
  }

  WeibullModel model;
  Eigen::VectorXd grad;
  Eigen::MatrixXd hess;
  int iter = 0;
  for (; iter < kMaxIterations; ++iter) {
    gradient_hessian(D, logy, delta, beta, log_sigma, grad, hess);
    if (grad.norm() < kTargetGradientNorm) break;
    Eigen::VectorXd direction = Eigen::LDLT<Eigen::MatrixXd>(-hess).solve(grad);
    if (!direction.allFinite() || grad.dot(direction) <= 0.0) {
      direction = grad / std::max(1.0, grad.norm());
    }
    const double slope = grad.dot(direction);
    double step = 1.0;
    bool moved = false;
    for (int bt = 0; bt < kMaxBacktracks; ++bt) {
      const Eigen::VectorXd beta_new = beta + step * direction.head(p);
      const double ls_new = log_sigma + step * direction[p];
      const double ll_new = loglik(D, logy, delta, beta_new, ls_new);
      if (ll_new >= ll + 1e-4 * step * slope && std::isfinite(ll_new)) {
        // truncated steps can round to a no-op once the likelihood hits its
        // floating-point resolution; treat those as a stall
        if (beta_new != beta || ls_new != log_sigma) {
          beta = beta_new;
          log_sigma = ls_new;
          ll = ll_new;
          moved = true;
        }
        break;
      }
      step *= 0.5;
    }
    if (!moved) {
      // likelihood improvements are no longer representable; polish with the
      // full Newton step as long as it keeps shrinking the gradient
      const Eigen::VectorXd beta_new = beta + direction.head(p);
      const double ls_new = log_sigma + direction[p];
      Eigen::VectorXd grad_new;
      Eigen::MatrixXd hess_new;
      gradient_hessian(D, logy, delta, beta_new, ls_new, grad_new, hess_new);
      if (grad_new.allFinite() && grad_new.norm() < grad.norm()) {
        beta = beta_new;
        log_sigma = ls_new;
        ll = loglik(D, logy, delta, beta, log_sigma);
      } else {
        break;
      }
    }
  }
  gradient_hessian(D, logy, delta, beta, log_sigma, grad, hess);
  model.beta = beta;
  model.sigma = std::exp(log_sigma);
  model.gradient_norm = grad.norm();
  model.converged = model.gradient_norm < kConvergedGradientNorm;
  model.log_likelihood = ll;
  model.iterations = iter;
  return model;
}

}  // namespace

double weibull_log_likelihood(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                              const Eigen::VectorXi& delta,
                              const Eigen::VectorXd& beta, double sigma) {
  if (!(sigma > 0.0)) throw ConfigError("sigma must be positive");
  return loglik(with_intercept(X), y.array().log(), delta, beta, std::log(sigma));
}

WeibullModel fit_weibull(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                         const Eigen::VectorXi& delta) {
  return fit_impl(X, y, delta);
}

WeibullModel fit_weibull(const data::Dataset& ds) {
  if (ds.mode != data::Mode::single) {
    throw DataError("fit_weibull: dataset mode is competing; use the cause-specific fit");
  }
  return fit_impl(ds.covariate_matrix(), ds.times(), ds.events());
}

WeibullModel fit_cause_weibull(const data::Dataset& ds, int cause) {
  if (cause != 1 && cause != 2) throw ConfigError("cause must be 1 or 2");
  const Eigen::VectorXi delta = ds.events();
  Eigen::VectorXi cause_delta(delta.size());
  long long events = 0;
  for (Eigen::Index i = 0; i < delta.size(); ++i) {
    cause_delta[i] = delta[i] == cause ? 1 : 0;
    events += cause_delta[i];
  }
  if (events == 0) {
    throw TrainingError("fit_cause_weibull: no observed events of cause " +
                        std::to_string(cause));
  }
  return fit_impl(ds.covariate_matrix(), ds.times(), cause_delta);
}

std::pair<WeibullModel, WeibullModel> fit_cause_specific_weibull(const data::Dataset& ds) {
  return {fit_cause_weibull(ds, 1), fit_cause_weibull(ds, 2)};
}

Eigen::VectorXd predict_weibull(const WeibullModel& model, const Eigen::MatrixXd& X) {
  if (X.cols() + 1 != model.beta.size()) {
    throw DataError("predict_weibull: covariate width mismatch (" +
                    std::to_string(X.cols()) + " columns for " +
                    std::to_string(model.beta.size() - 1) + " coefficients)");
  }
  return ((with_intercept(X) * model.beta).array()).exp();
}

}  // namespace deepcent::baselines
