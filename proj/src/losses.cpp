#include "deepcent/losses.hpp"

#include <cmath>
#include <string>

#include "deepcent/errors.hpp"

namespace deepcent::losses {

namespace {

const double kLog2 = std::log(2.0);

double log_sigmoid(double z) {
  if (z >= 0.0) return -std::log1p(std::exp(-z));
  return z - std::log1p(std::exp(z));
}

double sigmoid(double z) {
  if (z >= 0.0) {
    const double e = std::exp(-z);
    return 1.0 / (1.0 + e);
  }
  const double e = std::exp(z);
  return e / (1.0 + e);
}

void check_lengths(Eigen::Index a, Eigen::Index b, const char* what) {
  if (a != b) {
    throw DataError(std::string(what) + ": length mismatch (" + std::to_string(a) +
                    " vs " + std::to_string(b) + ")");
  }
}

void check_finite(const Eigen::VectorXd& yhat, const char* what) {
  if (!yhat.allFinite()) {
    throw NumericError(std::string(what) + ": non-finite prediction");
  }
}

void check_nonnegative(double v, const char* what) {
  if (!(v >= 0.0)) throw ConfigError(std::string(what) + " must be non-negative");
}

void check_pair_bounds(const ComparablePairs& pairs, Eigen::Index n, const char* what) {
  for (const auto& [i, j] : pairs.pairs) {
    if (i < 0 || j < 0 || i >= n || j >= n) {
      throw DataError(std::string(what) + ": pair index out of range");
    }
  }
}

}  // namespace

ComparablePairs comparable_pairs(const Eigen::VectorXd& y,
                                 const Eigen::VectorXi& delta,
                                 int event_of_interest) {
  check_lengths(y.size(), delta.size(), "comparable_pairs");
  ComparablePairs out;
  out.event_of_interest = event_of_interest;
  const int n = static_cast<int>(y.size());
  for (int i = 0; i < n; ++i) {
    if (delta[i] != event_of_interest) continue;
    for (int j = 0; j < n; ++j) {
      if (y[i] < y[j]) out.pairs.emplace_back(i, j);
    }
  }
  return out;
}

double censored_mse(const Eigen::VectorXd& y, const Eigen::VectorXi& delta,
                    const Eigen::VectorXd& yhat, double lambda1,
                    Eigen::VectorXd* grad) {
  check_lengths(y.size(), delta.size(), "censored_mse");
  check_lengths(y.size(), yhat.size(), "censored_mse");
  check_finite(yhat, "censored_mse");
  check_nonnegative(lambda1, "lambda1");
  if (grad) grad->setZero(y.size());
  double total = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const double diff = yhat[i] - y[i];
    if (delta[i] == 1) {
      total += diff * diff;
      if (grad) (*grad)[i] = 2.0 * diff;
    } else if (delta[i] == 0) {
      if (diff < 0.0) {
        total += lambda1 * diff * diff;
        if (grad) (*grad)[i] = 2.0 * lambda1 * diff;
      }
    } else {
      throw DataError("censored_mse: event indicator outside {0,1} at index " +
                      std::to_string(i));
    }
  }
  return total;
}

std::optional<double> cstar(const ComparablePairs& pairs, const Eigen::VectorXd& yhat,
                            Eigen::VectorXd* grad) {
  if (grad) grad->setZero(yhat.size());
  if (pairs.empty()) return std::nullopt;
  check_finite(yhat, "cstar");
  check_pair_bounds(pairs, yhat.size(), "cstar");
  const double inv = 1.0 / static_cast<double>(pairs.size());
  double total = 0.0;
  for (const auto& [i, j] : pairs.pairs) {
    const double d = yhat[j] - yhat[i];
    total += 1.0 + log_sigmoid(d) / kLog2;
    if (grad) {
      const double g = inv * sigmoid(-d) / kLog2;
      (*grad)[j] += g;
      (*grad)[i] -= g;
    }
  }
  return total * inv;
}

std::optional<double> cstar(const Eigen::VectorXd& y, const Eigen::VectorXi& delta,
                            const Eigen::VectorXd& yhat, int event_of_interest) {
  check_lengths(y.size(), yhat.size(), "cstar");
  return cstar(comparable_pairs(y, delta, event_of_interest), yhat);
}

double total_loss(const Eigen::VectorXd& y, const Eigen::VectorXi& delta,
                  const Eigen::VectorXd& yhat, const LossParams& params,
                  const ComparablePairs& pairs, Eigen::VectorXd* grad) {
  check_nonnegative(params.lambda2, "lambda2");
  double value = censored_mse(y, delta, yhat, params.lambda1, grad);
  if (params.lambda2 > 0.0) {
    Eigen::VectorXd rank_grad;
    const auto c = cstar(pairs, yhat, grad ? &rank_grad : nullptr);
    if (c) {
      value -= params.lambda2 * *c;
      if (grad) *grad -= params.lambda2 * rank_grad;
    }
  }
  return value;
}

double total_loss(const Eigen::VectorXd& y, const Eigen::VectorXi& delta,
                  const Eigen::VectorXd& yhat, const LossParams& params) {
  return total_loss(y, delta, yhat, params, comparable_pairs(y, delta, 1), nullptr);
}

double cr_censored_mse(const Eigen::VectorXd& y, const Eigen::VectorXi& delta,
                       const Eigen::VectorXd& yhat1, const Eigen::VectorXd& yhat2,
                       const CrLossParams& params, Eigen::VectorXd* grad1,
                       Eigen::VectorXd* grad2) {
  check_lengths(y.size(), delta.size(), "cr_censored_mse");
  check_lengths(y.size(), yhat1.size(), "cr_censored_mse");
  check_lengths(y.size(), yhat2.size(), "cr_censored_mse");
  check_finite(yhat1, "cr_censored_mse");
  check_finite(yhat2, "cr_censored_mse");
  check_nonnegative(params.lambda0, "lambda0");
  check_nonnegative(params.lambda1, "lambda1");
  check_nonnegative(params.lambda2, "lambda2");
  if (grad1) grad1->setZero(y.size());
  if (grad2) grad2->setZero(y.size());

  double total = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const double d1 = yhat1[i] - y[i];
    const double d2 = yhat2[i] - y[i];
    switch (delta[i]) {
      case 1: {
        total += d1 * d1;
        if (grad1) (*grad1)[i] += 2.0 * d1;
        // order indicators gate the penalty but are not differentiated
        if (yhat2[i] < yhat1[i]) {
          total += params.lambda1 * d2 * d2;
          if (grad2) (*grad2)[i] += 2.0 * params.lambda1 * d2;
        }
        break;
      }
      case 2: {
        total += d2 * d2;
        if (grad2) (*grad2)[i] += 2.0 * d2;
        if (yhat1[i] < yhat2[i]) {
          total += params.lambda2 * d1 * d1;
          if (grad1) (*grad1)[i] += 2.0 * params.lambda2 * d1;
        }
        break;
      }
      case 0: {
        if (d1 < 0.0) {
          total += params.lambda0 * d1 * d1;
          if (grad1) (*grad1)[i] += 2.0 * params.lambda0 * d1;
        }
        if (d2 < 0.0) {
          total += params.lambda0 * d2 * d2;
          if (grad2) (*grad2)[i] += 2.0 * params.lambda0 * d2;
        }
        break;
      }
      default:
        throw DataError("cr_censored_mse: event indicator outside {0,1,2} at index " +
                        std::to_string(i));
    }
  }
  return total;
}

double cr_rank_loss(const ComparablePairs& pairs1, const ComparablePairs& pairs2,
                    const Eigen::VectorXd& yhat1, const Eigen::VectorXd& yhat2,
                    const CrLossParams& params, Eigen::VectorXd* grad1,
                    Eigen::VectorXd* grad2) {
  check_lengths(yhat1.size(), yhat2.size(), "cr_rank_loss");
  check_nonnegative(params.lambda3, "lambda3");
  check_nonnegative(params.lambda4, "lambda4");
  if (grad1) grad1->setZero(yhat1.size());
  if (grad2) grad2->setZero(yhat2.size());
  double total = 0.0;
  if (params.lambda3 > 0.0) {
    Eigen::VectorXd g;
    const auto c1 = cstar(pairs1, yhat1, grad1 ? &g : nullptr);
    if (c1) {
      total -= params.lambda3 * *c1;
      if (grad1) *grad1 -= params.lambda3 * g;
    }
  }
  if (params.lambda4 > 0.0) {
    Eigen::VectorXd g;
    const auto c2 = cstar(pairs2, yhat2, grad2 ? &g : nullptr);
    if (c2) {
      total -= params.lambda4 * *c2;
      if (grad2) *grad2 -= params.lambda4 * g;
    }
  }
  return total;
}

double cr_rank_loss(const Eigen::VectorXd& y, const Eigen::VectorXi& delta,
                    const Eigen::VectorXd& yhat1, const Eigen::VectorXd& yhat2,
                    const CrLossParams& params) {
  return cr_rank_loss(comparable_pairs(y, delta, 1), comparable_pairs(y, delta, 2),
                      yhat1, yhat2, params, nullptr, nullptr);
}

std::optional<double> rankdeepsurv_rank_loss(const ComparablePairs& pairs,
                                             const Eigen::VectorXd& y,
                                             const Eigen::VectorXd& yhat,
                                             Eigen::VectorXd* grad) {
  check_lengths(y.size(), yhat.size(), "rankdeepsurv_rank_loss");
  if (grad) grad->setZero(y.size());
  if (pairs.empty()) return std::nullopt;
  check_finite(yhat, "rankdeepsurv_rank_loss");
  check_pair_bounds(pairs, y.size(), "rankdeepsurv_rank_loss");
  const double inv = 1.0 / static_cast<double>(pairs.size());
  double total = 0.0;
  for (const auto& [i, j] : pairs.pairs) {
    const double e = (y[j] - y[i]) - (yhat[j] - yhat[i]);
    total += e * e;
    if (grad) {
      (*grad)[j] -= 2.0 * inv * e;
      (*grad)[i] += 2.0 * inv * e;
    }
  }
  return total * inv;
}

std::optional<double> rankdeepsurv_rank_loss(const Eigen::VectorXd& y,
                                             const Eigen::VectorXi& delta,
                                             const Eigen::VectorXd& yhat) {
  return rankdeepsurv_rank_loss(comparable_pairs(y, delta, 1), y, yhat, nullptr);
}

}  // namespace deepcent::losses
