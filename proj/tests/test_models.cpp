#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>

#include "deepcent/data.hpp"
#include "deepcent/errors.hpp"
#include "deepcent/metrics.hpp"
#include "deepcent/model.hpp"
#include "testutil.hpp"

using namespace deepcent;
using model::CompetingModel;
using model::CrNetConfig;
using model::DeepCentConfig;
using model::SingleModel;

namespace {

data::Dataset sim_single(int n, std::uint64_t seed) {
  data::SimConfig cfg;
  cfg.n = n;
  cfg.theta = 2.25;  // ~40% censoring under the default design
  cfg.seed = seed;
  return data::simulate_noncompeting(cfg);
}

data::Dataset sim_competing(int n, std::uint64_t seed) {
  data::CrSimConfig cfg;
  cfg.n = n;
  cfg.theta = 0.28125;
  cfg.seed = seed;
  return data::simulate_competing(cfg);
}

DeepCentConfig small_config() {
  DeepCentConfig cfg;
  cfg.hidden_widths = {16};
  cfg.epochs = 50;
  cfg.seed = 5;
  return cfg;
}

}  // namespace

TEST_CASE("training is deterministic for a fixed seed") {
  const data::Dataset train = sim_single(80, 3);
  const DeepCentConfig cfg = small_config();
  const SingleModel a = model::train_single(train, cfg);
  const SingleModel b = model::train_single(train, cfg);
  CHECK(nn::to_text(a.net) == nn::to_text(b.net));
  CHECK(a.loss_trace == b.loss_trace);

  DeepCentConfig other = cfg;
  other.seed += 1;
  const SingleModel c = model::train_single(train, other);
  CHECK(nn::to_text(a.net) != nn::to_text(c.net));
}

TEST_CASE("the training loss decreases on simulated data") {
  const data::Dataset train = sim_single(500, 7);
  DeepCentConfig cfg;  // defaults: (32,32), dropout 0.1, lr 1e-2
  cfg.epochs = 200;
  cfg.seed = 11;
  const SingleModel m = model::train_single(train, cfg);
  REQUIRE(m.loss_trace.size() == 200);
  CHECK(m.loss_trace.back() < m.loss_trace.front());
}

TEST_CASE("with the rank term off the net beats the best constant predictor") {
  data::Dataset train;
  train.mode = data::Mode::single;
  train.covariate_names = {"x1"};
  for (int i = 0; i < 80; ++i) {
    const double x = -2.0 + 4.0 * i / 79.0;
    train.records.push_back({{x}, 2.0 * x + 7.0, 1});
  }
  DeepCentConfig cfg;
  cfg.hidden_widths = {16};
  cfg.dropout_rate = 0.0;
  cfg.epochs = 500;
  cfg.learning_rate = 1e-2;
  cfg.loss_params.lambda2 = 0.0;
  cfg.seed = 2;
  const SingleModel m = model::train_single(train, cfg);
  const Eigen::VectorXd yhat = model::predict(m, train.covariate_matrix());
  const Eigen::VectorXd y = train.times();
  const double trained_mse = (yhat - y).squaredNorm() / y.size();
  const double best_constant_mse = (y.array() - y.mean()).square().sum() / y.size();
  CHECK(trained_mse < best_constant_mse);
}

TEST_CASE("all-censored training data is a training error") {
  data::Dataset train = sim_single(40, 9);
  for (auto& rec : train.records) rec.event = 0;
  CHECK_THROWS_AS(model::train_single(train, small_config()), TrainingError);

  data::Dataset cr = sim_competing(40, 9);
  for (auto& rec : cr.records) rec.event = 0;
  CHECK_THROWS_AS(model::train_competing(cr, CrNetConfig{}), TrainingError);
}

TEST_CASE("config and mode validation") {
  const data::Dataset train = sim_single(40, 13);
  DeepCentConfig cfg = small_config();
  cfg.epochs = 0;
  CHECK_THROWS_AS(model::train_single(train, cfg), ConfigError);
  cfg = small_config();
  cfg.dropout_rate = 1.0;
  CHECK_THROWS_AS(model::train_single(train, cfg), ConfigError);
  cfg = small_config();
  cfg.learning_rate = 0.0;
  CHECK_THROWS_AS(model::train_single(train, cfg), ConfigError);
  CHECK_THROWS_AS(model::train_competing(train, CrNetConfig{}), DataError);
  const data::Dataset cr = sim_competing(40, 13);
  CHECK_THROWS_AS(model::train_single(cr, small_config()), DataError);
}

TEST_CASE("prediction is deterministic, clamped, and row-independent") {
  const data::Dataset train = sim_single(60, 21);
  const SingleModel m = model::train_single(train, small_config());
  const Eigen::MatrixXd X = train.covariate_matrix();
  CHECK(model::predict(m, X) == model::predict(m, X));

  // permuting rows permutes predictions identically
  Eigen::MatrixXd reversed = X.colwise().reverse();
  const Eigen::VectorXd straight = model::predict(m, X);
  const Eigen::VectorXd back = model::predict(m, reversed).reverse();
  CHECK((straight - back).cwiseAbs().maxCoeff() == 0.0);

  // a network forced to emit a negative time clamps at the floor
  SingleModel forced = m;
  for (auto& layer : forced.net.layers()) {
    layer.weights.setZero();
    layer.bias.setZero();
  }
  forced.net.layers().back().bias[0] = -1.0;
  const Eigen::VectorXd clamped = model::predict(forced, X);
  CHECK(clamped.minCoeff() == model::kMinPrediction);
  CHECK(clamped.maxCoeff() == model::kMinPrediction);
}

TEST_CASE("competing training is deterministic and its loss decreases") {
  const data::Dataset train = sim_competing(500, 17);
  CrNetConfig cfg;
  cfg.epochs = 200;
  cfg.seed = 3;
  const CompetingModel a = model::train_competing(train, cfg);
  const CompetingModel b = model::train_competing(train, cfg);
  CHECK(nn::to_text(a.net.trunk) == nn::to_text(b.net.trunk));
  CHECK(nn::to_text(a.net.head1) == nn::to_text(b.net.head1));
  CHECK(nn::to_text(a.net.head2) == nn::to_text(b.net.head2));
  CHECK(a.loss_trace.back() < a.loss_trace.front());
}

TEST_CASE("competing architecture wiring") {
  const data::Dataset train = sim_competing(50, 23);
  CrNetConfig cfg;
  cfg.shared_widths = {8};
  cfg.head_widths = {};  // linear heads expose the wiring directly
  cfg.epochs = 5;
  cfg.seed = 31;
  const CompetingModel m = model::train_competing(train, cfg);
  const Eigen::MatrixXd X = train.covariate_matrix();

  SUBCASE("zeroed heads predict their biases for every record") {
    CompetingModel zeroed = m;
    zeroed.net.head1.layers()[0].weights.setZero();
    zeroed.net.head1.layers()[0].bias[0] = 0.7;
    zeroed.net.head2.layers()[0].weights.setZero();
    zeroed.net.head2.layers()[0].bias[0] = 0.4;
    const auto [p1, p2] = model::predict_competing(zeroed, X);
    CHECK((p1.array() == 0.7).all());
    CHECK((p2.array() == 0.4).all());
  }

  SUBCASE("perturbing one head leaves the other head's predictions unchanged") {
    const auto [base1, base2] = model::predict_competing(m, X);
    CompetingModel perturbed = m;
    perturbed.net.head2.layers()[0].weights.array() += 0.25;
    const auto [p1, p2] = model::predict_competing(perturbed, X);
    CHECK((p1 - base1).cwiseAbs().maxCoeff() == 0.0);
    CHECK((p2 - base2).cwiseAbs().maxCoeff() > 0.0);
  }

  SUBCASE("perturbing the trunk changes both heads") {
    const auto [base1, base2] = model::predict_competing(m, X);
    CompetingModel perturbed = m;
    perturbed.net.trunk.layers()[0].weights.array() += 0.25;
    const auto [p1, p2] = model::predict_competing(perturbed, X);
    CHECK((p1 - base1).cwiseAbs().maxCoeff() > 0.0);
    CHECK((p2 - base2).cwiseAbs().maxCoeff() > 0.0);
  }

  SUBCASE("the residual path keeps heads covariate-dependent under a frozen trunk") {
    CompetingModel frozen = m;
    frozen.net.trunk.layers()[0].weights.setZero();
    frozen.net.trunk.layers()[0].bias.setConstant(0.5);
    const auto [p1, p2] = model::predict_competing(frozen, X);
    bool varies1 = false, varies2 = false;
    for (int i = 1; i < X.rows(); ++i) {
      varies1 = varies1 || p1[i] != p1[0];
      varies2 = varies2 || p2[i] != p2[0];
    }
    CHECK(varies1);
    CHECK(varies2);
  }
}

TEST_CASE("monte carlo dropout intervals") {
  const data::Dataset train = sim_single(200, 41);
  DeepCentConfig cfg;
  cfg.hidden_widths = {32};
  cfg.dropout_rate = 0.3;
  cfg.epochs = 150;
  cfg.seed = 6;
  const SingleModel m = model::train_single(train, cfg);
  const Eigen::VectorXd x = train.covariate_matrix().row(0).transpose();

  SUBCASE("nondegenerate intervals around the point prediction") {
    const auto interval = model::mc_dropout_interval(m, x, 200, 0.05, 77);
    CHECK(interval.n_draws == 200);
    CHECK(interval.level == doctest::Approx(0.95));
    CHECK(interval.lower <= interval.upper);
    CHECK(interval.upper - interval.lower > 0.0);
    // percentiles of one sample are ordered around its median
    const auto median = model::mc_dropout_interval(m, x, 200, 0.999, 77);
    CHECK(interval.lower <= median.lower);
    CHECK(median.upper <= interval.upper);
    // reproducible for a fixed seed
    const auto again = model::mc_dropout_interval(m, x, 200, 0.05, 77);
    CHECK(again.lower == interval.lower);
    CHECK(again.upper == interval.upper);
  }

  SUBCASE("a single draw collapses the interval onto itself") {
    const auto interval = model::mc_dropout_interval(m, x, 1, 0.05, 3);
    CHECK(interval.lower == interval.upper);
  }

  SUBCASE("zero dropout collapses every draw onto the point prediction") {
    DeepCentConfig nodrop = cfg;
    nodrop.dropout_rate = 0.0;
    const SingleModel m0 = model::train_single(train, nodrop);
    const auto interval = model::mc_dropout_interval(m0, x, 50, 0.05, 9);
    CHECK(interval.lower == interval.point);
    CHECK(interval.upper == interval.point);
  }

  SUBCASE("argument validation") {
    CHECK_THROWS_AS(model::mc_dropout_interval(m, x, 0, 0.05, 1), ConfigError);
    CHECK_THROWS_AS(model::mc_dropout_interval(m, x, 10, 0.0, 1), ConfigError);
  }

  SUBCASE("competing intervals come per head") {
    const data::Dataset cr = sim_competing(150, 43);
    CrNetConfig ccfg;
    ccfg.shared_widths = {16};
    ccfg.dropout_rate = 0.3;
    ccfg.epochs = 100;
    ccfg.seed = 8;
    const CompetingModel cm = model::train_competing(cr, ccfg);
    const Eigen::VectorXd cx = cr.covariate_matrix().row(2).transpose();
    const auto [i1, i2] = model::mc_dropout_interval(cm, cx, 100, 0.05, 13);
    CHECK(i1.lower <= i1.upper);
    CHECK(i2.lower <= i2.upper);
    CHECK(i1.upper - i1.lower > 0.0);
    CHECK(i2.upper - i2.lower > 0.0);
  }
}

TEST_CASE("model files round-trip through the JSON container") {
  const std::string path = "deepcent_test_model.json";

  SUBCASE("single-risk model") {
    const data::Dataset train = sim_single(60, 51);
    const SingleModel m = model::train_single(train, small_config());
    model::save_model(model::AnyModel{m}, path);
    const model::AnyModel back = model::load_model(path);
    REQUIRE(model::model_mode(back) == data::Mode::single);
    const auto& restored = std::get<SingleModel>(back);
    CHECK(nn::to_text(restored.net) == nn::to_text(m.net));
    CHECK(restored.covariate_names == m.covariate_names);
    CHECK(restored.loss_trace == m.loss_trace);
    CHECK(restored.config.epochs == m.config.epochs);
    const Eigen::MatrixXd X = train.covariate_matrix();
    CHECK(model::predict(restored, X) == model::predict(m, X));
  }

  SUBCASE("competing model") {
    const data::Dataset train = sim_competing(60, 53);
    CrNetConfig cfg;
    cfg.epochs = 30;
    cfg.seed = 4;
    const CompetingModel m = model::train_competing(train, cfg);
    model::save_model(model::AnyModel{m}, path);
    const model::AnyModel back = model::load_model(path);
    REQUIRE(model::model_mode(back) == data::Mode::competing);
    const auto& restored = std::get<CompetingModel>(back);
    const Eigen::MatrixXd X = train.covariate_matrix();
    const auto [a1, a2] = model::predict_competing(restored, X);
    const auto [b1, b2] = model::predict_competing(m, X);
    CHECK(a1 == b1);
    CHECK(a2 == b2);
  }

  SUBCASE("unreadable or damaged files are data errors") {
    CHECK_THROWS_AS(model::load_model("no_such_model.json"), DataError);
    {
      std::FILE* f = std::fopen(path.c_str(), "w");
      std::fputs("{\"format\":\"other\"}", f);
      std::fclose(f);
    }
    CHECK_THROWS_AS(model::load_model(path), DataError);
  }

  std::remove(path.c_str());
}
