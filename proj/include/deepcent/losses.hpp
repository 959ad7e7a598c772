#pragma once

#include <Eigen/Core>
#include <optional>
#include <utility>
#include <vector>

namespace deepcent::losses {

struct LossParams {
  double lambda1 = 1.0;  // censoring-penalty weight
  double lambda2 = 1.0;  // ranking-loss weight
};

struct CrLossParams {
  double lambda0 = 1.0;  // censored under-prediction penalty, both heads
  double lambda1 = 1.0;  // cross penalty when cause 1 observed
  double lambda2 = 1.0;  // cross penalty when cause 2 observed
  double lambda3 = 1.0;  // cause-1 ranking weight
  double lambda4 = 1.0;  // cause-2 ranking weight
};

// Ordered index pairs (i, j) with y_i < y_j and delta_i == event_of_interest;
// ties in y are excluded.
struct ComparablePairs {
  std::vector<std::pair<int, int>> pairs;
  int event_of_interest = 1;

  std::size_t size() const { return pairs.size(); }
  bool empty() const { return pairs.empty(); }
};

ComparablePairs comparable_pairs(const Eigen::VectorXd& y,
                                 const Eigen::VectorXi& delta,
                                 int event_of_interest);

// Sum over events of (yhat-y)^2 plus lambda1 times the same square over
// censored records predicted below their censoring time. No per-n
// normalization. Optionally fills d(loss)/d(yhat).
double censored_mse(const Eigen::VectorXd& y, const Eigen::VectorXi& delta,
                    const Eigen::VectorXd& yhat, double lambda1,
                    Eigen::VectorXd* grad = nullptr);

// Differentiable log-sigmoid lower bound on the concordance index,
// (1/|pairs|) * sum of [1 + log sigmoid(yhat_j - yhat_i)/log 2].
// Empty pair set yields nullopt (grad, if given, is zeroed).
std::optional<double> cstar(const ComparablePairs& pairs, const Eigen::VectorXd& yhat,
                            Eigen::VectorXd* grad = nullptr);
std::optional<double> cstar(const Eigen::VectorXd& y, const Eigen::VectorXi& delta,
                            const Eigen::VectorXd& yhat, int event_of_interest);

// censored_mse - lambda2 * cstar; the rank term is absent when there are no
// comparable pairs.
double total_loss(const Eigen::VectorXd& y, const Eigen::VectorXi& delta,
                  const Eigen::VectorXd& yhat, const LossParams& params,
                  const ComparablePairs& pairs, Eigen::VectorXd* grad = nullptr);
double total_loss(const Eigen::VectorXd& y, const Eigen::VectorXi& delta,
                  const Eigen::VectorXd& yhat, const LossParams& params);

// Competing-risks regression loss: per-cause MSE on the matching head,
// lambda0 penalties for either head predicting below a censored time, and
// cross penalties gated on the predicted-order indicators. The cross-penalty
// magnitude reads Y_i1/Y_i2 as the record's observed time.
double cr_censored_mse(const Eigen::VectorXd& y, const Eigen::VectorXi& delta,
                       const Eigen::VectorXd& yhat1, const Eigen::VectorXd& yhat2,
                       const CrLossParams& params,
                       Eigen::VectorXd* grad1 = nullptr,
                       Eigen::VectorXd* grad2 = nullptr);

// -(lambda3 * cstar over cause-1 pairs on yhat1 + lambda4 * cstar over
// cause-2 pairs on yhat2); a cause with no comparable pairs contributes 0.
double cr_rank_loss(const ComparablePairs& pairs1, const ComparablePairs& pairs2,
                    const Eigen::VectorXd& yhat1, const Eigen::VectorXd& yhat2,
                    const CrLossParams& params,
                    Eigen::VectorXd* grad1 = nullptr,
                    Eigen::VectorXd* grad2 = nullptr);
double cr_rank_loss(const Eigen::VectorXd& y, const Eigen::VectorXi& delta,
                    const Eigen::VectorXd& yhat1, const Eigen::VectorXd& yhat2,
                    const CrLossParams& params);

// Pairwise time-difference MSE over comparable pairs,
// (1/|pairs|) * sum of [(y_j - y_i) - (yhat_j - yhat_i)]^2.
std::optional<double> rankdeepsurv_rank_loss(const ComparablePairs& pairs,
                                             const Eigen::VectorXd& y,
                                             const Eigen::VectorXd& yhat,
                                             Eigen::VectorXd* grad = nullptr);
std::optional<double> rankdeepsurv_rank_loss(const Eigen::VectorXd& y,
                                             const Eigen::VectorXi& delta,
                                             const Eigen::VectorXd& yhat);

}  // namespace deepcent::losses
