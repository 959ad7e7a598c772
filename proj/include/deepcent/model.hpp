#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "deepcent/data.hpp"
#include "deepcent/losses.hpp"
#include "deepcent/nn.hpp"

namespace deepcent::model {

// Predictions are event times; outputs are clamped below at this value so
// downstream metrics never see nonpositive times.
inline constexpr double kMinPrediction = 1e-6;

enum class RankLossKind {
  cstar,         // log-sigmoid concordance lower bound, weighted by lambda2
  rankdeepsurv,  // pairwise time-difference MSE, weighted by lambda2
};

struct DeepCentConfig {
  std::vector<int> hidden_widths{32, 32};
  double dropout_rate = 0.1;
  int epochs = 300;
  double learning_rate = 1e-2;
  losses::LossParams loss_params{};
  RankLossKind rank_loss = RankLossKind::cstar;
  std::uint64_t seed = 1;
};

struct SingleModel {
  nn::Mlp net;
  std::vector<double> loss_trace;
  std::vector<std::string> covariate_names;
  DeepCentConfig config;
};

// Full-batch optimization of the combined regression + ranking loss.
SingleModel train_single(const data::Dataset& train, const DeepCentConfig& config);

Eigen::VectorXd predict(const SingleModel& model, const Eigen::MatrixXd& X);

struct CrNetConfig {
  std::vector<int> shared_widths{32, 32};
  std::vector<int> head_widths{16};
  double dropout_rate = 0.1;
  int epochs = 300;
  double learning_rate = 1e-2;
  losses::CrLossParams loss_params{};
  std::uint64_t seed = 1;
};

// Shared trunk with two cause-specific heads; each head consumes the trunk
// output concatenated with the raw covariates.
struct CrNet {
  nn::Mlp trunk;
  nn::Mlp head1;
  nn::Mlp head2;
};

struct CompetingModel {
  CrNet net;
  std::vector<double> loss_trace;
  std::vector<std::string> covariate_names;
  CrNetConfig config;
};

CompetingModel train_competing(const data::Dataset& train, const CrNetConfig& config);

std::pair<Eigen::VectorXd, Eigen::VectorXd> predict_competing(const CompetingModel& model,
                                                              const Eigen::MatrixXd& X);

struct PredictionInterval {
  double point = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  int n_draws = 0;
  double level = 0.0;  // confidence level, 1 - alpha
};

// B dropout-enabled forward passes (draw b seeded with seed + b); the point
// prediction is the dropout-disabled output and the bounds are the empirical
// alpha/2 and 1-alpha/2 percentiles of the draws.
PredictionInterval mc_dropout_interval(const SingleModel& model, const Eigen::VectorXd& x,
                                       int n_draws, double alpha, std::uint64_t seed);
std::pair<PredictionInterval, PredictionInterval> mc_dropout_interval(
    const CompetingModel& model, const Eigen::VectorXd& x, int n_draws, double alpha,
    std::uint64_t seed);

using AnyModel = std::variant<SingleModel, CompetingModel>;

data::Mode model_mode(const AnyModel& model);

// JSON container: format/version/mode/covariate_names/config/loss_trace plus
// the flat-text networks. Field names are documented in the README and stable.
void save_model(const AnyModel& model, const std::string& path);
AnyModel load_model(const std::string& path);

}  // namespace deepcent::model
