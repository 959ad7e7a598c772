#include "deepcent/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <json.hpp>

#include "deepcent/errors.hpp"

namespace deepcent::model {

namespace {

using json = nlohmann::json;

void check_common_config(double dropout, int epochs, double lr) {
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("dropout rate must lie in [0, 1)");
  if (epochs < 1) throw ConfigError("epochs must be at least 1");
  if (!(lr > 0.0)) throw ConfigError("learning rate must be positive");
}

std::vector<int> chain_widths(int input, const std::vector<int>& hidden, int output) {
  std::vector<int> widths;
  widths.push_back(input);
  widths.insert(widths.end(), hidden.begin(), hidden.end());
  if (output > 0) widths.push_back(output);
  return widths;
}

Eigen::VectorXd clamp_predictions(Eigen::VectorXd v) {
  return v.cwiseMax(kMinPrediction);
}

// percentile of a sorted sample with linear interpolation between order
// statistics
double quantile_sorted(const std::vector<double>& sorted, double p) {
  const std::size_t n = sorted.size();
  if (n == 1) return sorted[0];
  const double pos = p * static_cast<double>(n - 1);
  const std::size_t lo = static_cast<std::size_t>(pos);
  if (lo + 1 >= n) return sorted[n - 1];
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

Eigen::MatrixXd concat_columns(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  Eigen::MatrixXd out(a.rows(), a.cols() + b.cols());
  out.leftCols(a.cols()) = a;
  out.rightCols(b.cols()) = b;
  return out;
}

json config_to_json(const DeepCentConfig& c) {
  return json{{"hidden_widths", c.hidden_widths},
              {"dropout_rate", c.dropout_rate},
              {"epochs", c.epochs},
              {"learning_rate", c.learning_rate},
              {"lambda1", c.loss_params.lambda1},
              {"lambda2", c.loss_params.lambda2},
              {"rank_loss", c.rank_loss == RankLossKind::cstar ? "cstar" : "rankdeepsurv"},
              {"seed", c.seed}};
}

DeepCentConfig config_from_json(const json& j) {
  DeepCentConfig c;
  c.hidden_widths = j.at("hidden_widths").get<std::vector<int>>();
  c.dropout_rate = j.at("dropout_rate").get<double>();
  c.epochs = j.at("epochs").get<int>();
  c.learning_rate = j.at("learning_rate").get<double>();
  c.loss_params.lambda1 = j.at("lambda1").get<double>();
  c.loss_params.lambda2 = j.at("lambda2").get<double>();
  const std::string kind = j.at("rank_loss").get<std::string>();
  if (kind == "cstar") {
    c.rank_loss = RankLossKind::cstar;
  } else if (kind == "rankdeepsurv") {
    c.rank_loss = RankLossKind::rankdeepsurv;
  } else {
    throw DataError("model file: unknown rank_loss '" + kind + "'");
  }
  c.seed = j.at("seed").get<std::uint64_t>();
  return c;
}

json cr_config_to_json(const CrNetConfig& c) {
  return json{{"shared_widths", c.shared_widths},
              {"head_widths", c.head_widths},
              {"dropout_rate", c.dropout_rate},
              {"epochs", c.epochs},
              {"learning_rate", c.learning_rate},
              {"lambda0", c.loss_params.lambda0},
              {"lambda1", c.loss_params.lambda1},
              {"lambda2", c.loss_params.lambda2},
              {"lambda3", c.loss_params.lambda3},
              {"lambda4", c.loss_params.lambda4},
              {"seed", c.seed}};
}

CrNetConfig cr_config_from_json(const json& j) {
  CrNetConfig c;
  c.shared_widths = j.at("shared_widths").get<std::vector<int>>();
  c.head_widths = j.at("head_widths").get<std::vector<int>>();
  c.dropout_rate = j.at("dropout_rate").get<double>();
  c.epochs = j.at("epochs").get<int>();
  c.learning_rate = j.at("learning_rate").get<double>();
  c.loss_params.lambda0 = j.at("lambda0").get<double>();
  c.loss_params.lambda1 = j.at("lambda1").get<double>();
  c.loss_params.lambda2 = j.at("lambda2").get<double>();
  c.loss_params.lambda3 = j.at("lambda3").get<double>();
  c.loss_params.lambda4 = j.at("lambda4").get<double>();
  c.seed = j.at("seed").get<std::uint64_t>();
  return c;
}

}  // namespace

SingleModel train_single(const data::Dataset& train, const DeepCentConfig& config) {
  if (train.mode != data::Mode::single) {
    throw DataError("train_single: dataset mode is competing");
  }
  train.validate();
  check_common_config(config.dropout_rate, config.epochs, config.learning_rate);
  if (config.hidden_widths.empty()) throw ConfigError("at least one hidden layer is required");

  const Eigen::MatrixXd X = train.covariate_matrix();
  const Eigen::VectorXd y = train.times();
  const Eigen::VectorXi delta = train.events();
  if ((delta.array() == 1).count() == 0) {
    throw TrainingError("train_single: no observed events; the loss has no anchor");
  }

  Rng rng(config.seed);
  SingleModel model;
  model.covariate_names = train.covariate_names;
  model.config = config;
  model.net = nn::make_regression_net(
      chain_widths(static_cast<int>(X.cols()), config.hidden_widths, 1),
      config.dropout_rate, rng);

  const losses::ComparablePairs pairs = losses::comparable_pairs(y, delta, 1);
  nn::AdamState adam = nn::AdamState::for_net(model.net, config.learning_rate);
  Eigen::VectorXd grad;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    nn::ForwardCache cache;
    const Eigen::VectorXd yhat =
        nn::forward(model.net, X, /*dropout_enabled=*/true, &rng, &cache).col(0);
    double loss;
    if (config.rank_loss == RankLossKind::cstar) {
      loss = losses::total_loss(y, delta, yhat, config.loss_params, pairs, &grad);
    } else {
      loss = losses::censored_mse(y, delta, yhat, config.loss_params.lambda1, &grad);
      Eigen::VectorXd rank_grad;
      const auto rank = losses::rankdeepsurv_rank_loss(pairs, y, yhat, &rank_grad);
      if (rank) {
        loss += config.loss_params.lambda2 * *rank;
        grad += config.loss_params.lambda2 * rank_grad;
      }
    }
    nn::Gradients grads = nn::backward(model.net, cache, grad);
    nn::adam_step(model.net, grads, adam);
    model.loss_trace.push_back(loss);
  }
  return model;
}

Eigen::VectorXd predict(const SingleModel& model, const Eigen::MatrixXd& X) {
  return clamp_predictions(
      nn::forward(model.net, X, /*dropout_enabled=*/false, nullptr).col(0));
}

CompetingModel train_competing(const data::Dataset& train, const CrNetConfig& config) {
  if (train.mode != data::Mode::competing) {
    throw DataError("train_competing: dataset mode is single");
  }
  train.validate();
  check_common_config(config.dropout_rate, config.epochs, config.learning_rate);
  if (config.shared_widths.empty()) throw ConfigError("shared trunk needs at least one layer");

  const Eigen::MatrixXd X = train.covariate_matrix();
  const Eigen::VectorXd y = train.times();
  const Eigen::VectorXi delta = train.events();
  if ((delta.array() != 0).count() == 0) {
    throw TrainingError("train_competing: no observed events of either cause");
  }

  const int p = static_cast<int>(X.cols());
  Rng rng(config.seed);
  CompetingModel model;
  model.covariate_names = train.covariate_names;
  model.config = config;
  model.net.trunk = nn::make_feature_net(chain_widths(p, config.shared_widths, 0),
                                         config.dropout_rate, rng);
  const int r = model.net.trunk.output_width();
  model.net.head1 = nn::make_regression_net(chain_widths(r + p, config.head_widths, 1),
                                            config.dropout_rate, rng);
  model.net.head2 = nn::make_regression_net(chain_widths(r + p, config.head_widths, 1),
                                            config.dropout_rate, rng);

  const losses::ComparablePairs pairs1 = losses::comparable_pairs(y, delta, 1);
  const losses::ComparablePairs pairs2 = losses::comparable_pairs(y, delta, 2);
  nn::AdamState adam_trunk = nn::AdamState::for_net(model.net.trunk, config.learning_rate);
  nn::AdamState adam_head1 = nn::AdamState::for_net(model.net.head1, config.learning_rate);
  nn::AdamState adam_head2 = nn::AdamState::for_net(model.net.head2, config.learning_rate);

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    nn::ForwardCache trunk_cache, head1_cache, head2_cache;
    const Eigen::MatrixXd H =
        nn::forward(model.net.trunk, X, /*dropout_enabled=*/true, &rng, &trunk_cache);
    const Eigen::MatrixXd Z = concat_columns(H, X);
    const Eigen::VectorXd yhat1 =
        nn::forward(model.net.head1, Z, true, &rng, &head1_cache).col(0);
    const Eigen::VectorXd yhat2 =
        nn::forward(model.net.head2, Z, true, &rng, &head2_cache).col(0);

    Eigen::VectorXd g1, g2, r1, r2;
    double loss = losses::cr_censored_mse(y, delta, yhat1, yhat2, config.loss_params, &g1, &g2);
    loss += losses::cr_rank_loss(pairs1, pairs2, yhat1, yhat2, config.loss_params, &r1, &r2);
    g1 += r1;
    g2 += r2;

    nn::Gradients head1_grads = nn::backward(model.net.head1, head1_cache, g1);
    nn::Gradients head2_grads = nn::backward(model.net.head2, head2_cache, g2);
    const Eigen::MatrixXd dH =
        head1_grads.d_input.leftCols(r) + head2_grads.d_input.leftCols(r);
    nn::Gradients trunk_grads = nn::backward(model.net.trunk, trunk_cache, dH);

    nn::adam_step(model.net.trunk, trunk_grads, adam_trunk);
    nn::adam_step(model.net.head1, head1_grads, adam_head1);
    nn::adam_step(model.net.head2, head2_grads, adam_head2);
    model.loss_trace.push_back(loss);
  }
  return model;
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> predict_competing(const CompetingModel& model,
                                                              const Eigen::MatrixXd& X) {
  const Eigen::MatrixXd H = nn::forward(model.net.trunk, X, false, nullptr);
  const Eigen::MatrixXd Z = concat_columns(H, X);
  return {clamp_predictions(nn::forward(model.net.head1, Z, false, nullptr).col(0)),
          clamp_predictions(nn::forward(model.net.head2, Z, false, nullptr).col(0))};
}

namespace {

void check_interval_args(int n_draws, double alpha) {
  if (n_draws < 1) throw ConfigError("interval needs at least one draw");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
}

PredictionInterval interval_from_draws(double point, std::vector<double> draws,
                                       double alpha) {
  std::sort(draws.begin(), draws.end());
  PredictionInterval interval;
  interval.point = point;
  interval.lower = quantile_sorted(draws, alpha / 2.0);
  interval.upper = quantile_sorted(draws, 1.0 - alpha / 2.0);
  interval.n_draws = static_cast<int>(draws.size());
  interval.level = 1.0 - alpha;
  return interval;
}

}  // namespace

PredictionInterval mc_dropout_interval(const SingleModel& model, const Eigen::VectorXd& x,
                                       int n_draws, double alpha, std::uint64_t seed) {
  check_interval_args(n_draws, alpha);
  const Eigen::MatrixXd row = x.transpose();
  const double point = predict(model, row)[0];
  std::vector<double> draws(n_draws);
  for (int b = 0; b < n_draws; ++b) {
    Rng rng(seed + static_cast<std::uint64_t>(b));
    draws[b] = std::max(kMinPrediction,
                        nn::forward(model.net, row, true, &rng)(0, 0));
  }
  return interval_from_draws(point, std::move(draws), alpha);
}

std::pair<PredictionInterval, PredictionInterval> mc_dropout_interval(
    const CompetingModel& model, const Eigen::VectorXd& x, int n_draws, double alpha,
    std::uint64_t seed) {
  check_interval_args(n_draws, alpha);
  const Eigen::MatrixXd row = x.transpose();
  const auto [point1, point2] = predict_competing(model, row);
  std::vector<double> draws1(n_draws), draws2(n_draws);
  for (int b = 0; b < n_draws; ++b) {
    Rng rng(seed + static_cast<std::uint64_t>(b));
    const Eigen::MatrixXd h = nn::forward(model.net.trunk, row, true, &rng);
    const Eigen::MatrixXd z = concat_columns(h, row);
    draws1[b] = std::max(kMinPrediction, nn::forward(model.net.head1, z, true, &rng)(0, 0));
    draws2[b] = std::max(kMinPrediction, nn::forward(model.net.head2, z, true, &rng)(0, 0));
  }
  return {interval_from_draws(point1[0], std::move(draws1), alpha),
          interval_from_draws(point2[0], std::move(draws2), alpha)};
}

data::Mode model_mode(const AnyModel& model) {
  return std::holds_alternative<SingleModel>(model) ? data::Mode::single
                                                    : data::Mode::competing;
}

void save_model(const AnyModel& model, const std::string& path) {
  json j;
  j["format"] = "deepcent-model";
  j["version"] = 1;
  if (const auto* single = std::get_if<SingleModel>(&model)) {
    j["mode"] = "single";
    j["covariate_names"] = single->covariate_names;
    j["config"] = config_to_json(single->config);
    j["loss_trace"] = single->loss_trace;
    j["networks"] = json{{"net", nn::to_text(single->net)}};
  } else {
    const auto& competing = std::get<CompetingModel>(model);
    j["mode"] = "competing";
    j["covariate_names"] = competing.covariate_names;
    j["config"] = cr_config_to_json(competing.config);
    j["loss_trace"] = competing.loss_trace;
    j["networks"] = json{{"trunk", nn::to_text(competing.net.trunk)},
                         {"head1", nn::to_text(competing.net.head1)},
                         {"head2", nn::to_text(competing.net.head2)}};
  }
  std::ofstream out(path);
  if (!out) throw DataError("cannot open '" + path + "' for writing");
  out << j.dump(2) << '\n';
  out.flush();
  if (!out) throw DataError("write to '" + path + "' failed");
}

AnyModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw DataError("model file '" + path + "': " + e.what());
  }
  try {
    if (j.at("format") != "deepcent-model" || j.at("version") != 1) {
      throw DataError("model file '" + path + "': unrecognized format");
    }
    const std::string mode = j.at("mode").get<std::string>();
    if (mode == "single") {
      SingleModel model;
      model.covariate_names = j.at("covariate_names").get<std::vector<std::string>>();
      model.config = config_from_json(j.at("config"));
      model.loss_trace = j.at("loss_trace").get<std::vector<double>>();
      model.net = nn::from_text(j.at("networks").at("net").get<std::string>());
      return model;
    }
    if (mode == "competing") {
      CompetingModel model;
      model.covariate_names = j.at("covariate_names").get<std::vector<std::string>>();
      model.config = cr_config_from_json(j.at("config"));
      model.loss_trace = j.at("loss_trace").get<std::vector<double>>();
      model.net.trunk = nn::from_text(j.at("networks").at("trunk").get<std::string>());
      model.net.head1 = nn::from_text(j.at("networks").at("head1").get<std::string>());
      model.net.head2 = nn::from_text(j.at("networks").at("head2").get<std::string>());
      return model;
    }
    throw DataError("model file '" + path + "': unknown mode '" + mode + "'");
  } catch (const json::exception& e) {
    throw DataError("model file '" + path + "': " + e.what());
  }
}

}  // namespace deepcent::model
