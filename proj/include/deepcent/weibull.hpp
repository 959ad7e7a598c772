#pragma once

#include <Eigen/Core>
#include <utility>

#include "deepcent/data.hpp"

namespace deepcent::baselines {

struct WeibullModel {
  Eigen::VectorXd beta;  // intercept first, log-time units
  double sigma = 1.0;    // extreme-value scale
  bool converged = false;
  double log_likelihood = 0.0;
  double gradient_norm = 0.0;  // at the returned solution
  int iterations = 0;
};

// Right-censored log-likelihood sum_i [delta_i (z_i - log sigma) - exp(z_i)]
// with z_i = (log y_i - beta'x_i)/sigma; the intercept is prepended to X.
double weibull_log_likelihood(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                              const Eigen::VectorXi& delta,
                              const Eigen::VectorXd& beta, double sigma);

// Censored maximum likelihood over (beta, log sigma) by safeguarded Newton
// ascent with backtracking. delta must be 0/1.
WeibullModel fit_weibull(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                         const Eigen::VectorXi& delta);
WeibullModel fit_weibull(const data::Dataset& dataset);

// Cause-k fit treating other causes as censored at the observed time.
WeibullModel fit_cause_weibull(const data::Dataset& dataset, int cause);
std::pair<WeibullModel, WeibullModel> fit_cause_specific_weibull(const data::Dataset& dataset);

// exp(beta' x) per row, intercept handled internally; never clipped.
Eigen::VectorXd predict_weibull(const WeibullModel& model, const Eigen::MatrixXd& X);

}  // namespace deepcent::baselines
