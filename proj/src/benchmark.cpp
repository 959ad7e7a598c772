#include "deepcent/benchmark.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>

#include "deepcent/errors.hpp"
#include "deepcent/metrics.hpp"
#include "deepcent/weibull.hpp"

namespace deepcent::bench {

namespace {

constexpr double kThetaTolerance = 0.01;

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::uint64_t method_seed(std::uint64_t base, int replicate, std::size_t method_index) {
  return base + 104729ULL * static_cast<std::uint64_t>(replicate + 1) +
         static_cast<std::uint64_t>(method_index);
}

void push_metric(std::vector<ResultRow>& rows, int rep, const std::string& method,
                 const std::string& metric, double value) {
  rows.push_back(ResultRow{rep, method, metric, value});
}

void score_single(std::vector<ResultRow>& rows, int rep, const std::string& method,
                  const data::Dataset& test, const Eigen::VectorXd& yhat) {
  const metrics::EvalReport report = metrics::evaluate(test, yhat);
  if (report.causes[0].c_index) {
    push_metric(rows, rep, method, "cindex", *report.causes[0].c_index);
  }
  if (report.causes[0].mse) {
    push_metric(rows, rep, method, "mse", *report.causes[0].mse);
  }
}

void score_competing(std::vector<ResultRow>& rows, int rep, const std::string& method,
                     const data::Dataset& test, const Eigen::VectorXd& yhat1,
                     const Eigen::VectorXd& yhat2) {
  const metrics::EvalReport report = metrics::evaluate(test, yhat1, &yhat2);
  for (int cause = 1; cause <= 2; ++cause) {
    const metrics::CauseReport& cr = report.causes[cause - 1];
    const std::string suffix = std::to_string(cause);
    if (cr.c_index) push_metric(rows, rep, method, "cindex" + suffix, *cr.c_index);
    if (cr.mse) push_metric(rows, rep, method, "mse" + suffix, *cr.mse);
  }
}

}  // namespace

model::DeepCentConfig default_single_net() {
  model::DeepCentConfig config;
  config.hidden_widths = {32, 32};
  config.dropout_rate = 0.1;
  config.epochs = 500;
  config.learning_rate = 1e-2;
  config.loss_params.lambda1 = 1.0;
  config.loss_params.lambda2 = 1.0;
  config.rank_loss = model::RankLossKind::cstar;
  return config;
}

model::DeepCentConfig default_rankdeepsurv_net() {
  model::DeepCentConfig config = default_single_net();
  // the comparison method fixes both loss weights at 1
  config.loss_params.lambda1 = 1.0;
  config.loss_params.lambda2 = 1.0;
  config.rank_loss = model::RankLossKind::rankdeepsurv;
  return config;
}

model::CrNetConfig default_competing_net() {
  model::CrNetConfig config;
  config.shared_widths = {32, 32};
  config.head_widths = {16};
  config.dropout_rate = 0.1;
  config.epochs = 500;
  config.learning_rate = 1e-2;
  config.loss_params = losses::CrLossParams{};
  return config;
}

std::vector<ResultRow> run_benchmark(const BenchmarkConfig& config) {
  if (config.n < 4) throw ConfigError("benchmark needs n >= 4");
  if (config.replicates < 1) throw ConfigError("benchmark needs at least one replicate");
  const std::vector<std::string>& known =
      config.mode == data::Mode::single ? kSingleMethods : kCompetingMethods;
  std::vector<std::string> methods = config.methods.empty() ? known : config.methods;
  for (const std::string& m : methods) {
    if (std::find(known.begin(), known.end(), m) == known.end()) {
      throw ConfigError("unknown benchmark method '" + m + "' for this mode");
    }
  }

  std::vector<ResultRow> rows;
  if (config.mode == data::Mode::single) {
    data::SimConfig sim;
    sim.seed = config.seed;
    sim.theta = data::calibrate_theta(sim, config.censoring, kThetaTolerance);
    for (int rep = 0; rep < config.replicates; ++rep) {
      data::SimConfig train_cfg = sim;
      train_cfg.n = config.n;
      train_cfg.seed = config.seed + 2ULL * static_cast<std::uint64_t>(rep);
      data::SimConfig test_cfg = sim;
      test_cfg.n = config.n / 2;
      test_cfg.seed = config.seed + 2ULL * static_cast<std::uint64_t>(rep) + 1ULL;
      const data::Dataset train = data::simulate_noncompeting(train_cfg);
      const data::Dataset test = data::simulate_noncompeting(test_cfg);
      const Eigen::MatrixXd x_test = test.covariate_matrix();

      for (std::size_t mi = 0; mi < methods.size(); ++mi) {
        const std::string& method = methods[mi];
        if (method == "weibull") {
          const baselines::WeibullModel fitted = baselines::fit_weibull(train);
          score_single(rows, rep, method, test, baselines::predict_weibull(fitted, x_test));
        } else {
          model::DeepCentConfig net = method == "deepcent" ? default_single_net()
                                                           : default_rankdeepsurv_net();
          net.seed = method_seed(config.seed, rep, mi);
          const model::SingleModel fitted = model::train_single(train, net);
          score_single(rows, rep, method, test, model::predict(fitted, x_test));
        }
      }
    }
    return rows;
  }

  data::CrSimConfig sim;
  sim.seed = config.seed;
  sim.theta = data::calibrate_theta(sim, config.censoring, kThetaTolerance);
  for (int rep = 0; rep < config.replicates; ++rep) {
    data::CrSimConfig train_cfg = sim;
    train_cfg.n = config.n;
    train_cfg.seed = config.seed + 2ULL * static_cast<std::uint64_t>(rep);
    data::CrSimConfig test_cfg = sim;
    test_cfg.n = config.n / 2;
    test_cfg.seed = config.seed + 2ULL * static_cast<std::uint64_t>(rep) + 1ULL;
    const data::Dataset train = data::simulate_competing(train_cfg);
    const data::Dataset test = data::simulate_competing(test_cfg);
    const Eigen::MatrixXd x_test = test.covariate_matrix();

    for (std::size_t mi = 0; mi < methods.size(); ++mi) {
      const std::string& method = methods[mi];
      if (method == "cr-weibull") {
        const auto [m1, m2] = baselines::fit_cause_specific_weibull(train);
        score_competing(rows, rep, method, test, baselines::predict_weibull(m1, x_test),
                        baselines::predict_weibull(m2, x_test));
      } else {
        model::CrNetConfig net = default_competing_net();
        net.seed = method_seed(config.seed, rep, mi);
        const model::CompetingModel fitted = model::train_competing(train, net);
        const auto [yhat1, yhat2] = model::predict_competing(fitted, x_test);
        score_competing(rows, rep, method, test, yhat1, yhat2);
      }
    }
  }
  return rows;
}

void write_benchmark_csv(const std::vector<ResultRow>& rows, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open '" + path + "' for writing");
  out << "replicate,method,metric,value\n";
  for (const ResultRow& row : rows) {
    out << row.replicate << ',' << row.method << ',' << row.metric << ','
        << format_double(row.value) << '\n';
  }
  out.flush();
  if (!out) throw DataError("write to '" + path + "' failed");
}

}  // namespace deepcent::bench
