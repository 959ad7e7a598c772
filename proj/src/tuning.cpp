#include "deepcent/tuning.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>

#include "deepcent/errors.hpp"
#include "deepcent/metrics.hpp"
#include "deepcent/rng.hpp"

namespace deepcent::tuning {

namespace {

constexpr std::size_t kMaxCartesianSize = 10'000'000;

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string join_widths(const std::vector<int>& widths) {
  std::string out;
  for (std::size_t i = 0; i < widths.size(); ++i) {
    if (i > 0) out += '|';
    out += std::to_string(widths[i]);
  }
  return out;
}

void check_nonempty(const Grid& grid, data::Mode mode) {
  auto need = [](bool ok, const char* what) {
    if (!ok) throw ConfigError(std::string("tuning grid: ") + what + " list is empty");
  };
  need(!grid.dropout_rates.empty(), "dropout");
  need(!grid.epochs.empty(), "epochs");
  need(!grid.learning_rates.empty(), "learning rate");
  need(!grid.lambda1s.empty(), "lambda1");
  need(!grid.lambda2s.empty(), "lambda2");
  if (mode == data::Mode::single) {
    need(!grid.hidden_widths.empty(), "hidden widths");
  } else {
    need(!grid.shared_widths.empty(), "shared widths");
    need(!grid.head_widths.empty(), "head widths");
    need(!grid.lambda0s.empty(), "lambda0");
    need(!grid.lambda3s.empty(), "lambda3");
    need(!grid.lambda4s.empty(), "lambda4");
  }
}

// Mixed-radix decode of a flat Cartesian index, last axis fastest.
std::variant<model::DeepCentConfig, model::CrNetConfig> decode_config(
    const Grid& grid, data::Mode mode, std::size_t index) {
  if (mode == data::Mode::single) {
    model::DeepCentConfig c;
    std::size_t rest = index;
    auto take = [&rest](std::size_t size) {
      const std::size_t pos = rest % size;
      rest /= size;
      return pos;
    };
    c.loss_params.lambda2 = grid.lambda2s[take(grid.lambda2s.size())];
    c.loss_params.lambda1 = grid.lambda1s[take(grid.lambda1s.size())];
    c.learning_rate = grid.learning_rates[take(grid.learning_rates.size())];
    c.epochs = grid.epochs[take(grid.epochs.size())];
    c.dropout_rate = grid.dropout_rates[take(grid.dropout_rates.size())];
    c.hidden_widths = grid.hidden_widths[take(grid.hidden_widths.size())];
    return c;
  }
  model::CrNetConfig c;
  std::size_t rest = index;
  auto take = [&rest](std::size_t size) {
    const std::size_t pos = rest % size;
    rest /= size;
    return pos;
  };
  c.loss_params.lambda4 = grid.lambda4s[take(grid.lambda4s.size())];
  c.loss_params.lambda3 = grid.lambda3s[take(grid.lambda3s.size())];
  c.loss_params.lambda2 = grid.lambda2s[take(grid.lambda2s.size())];
  c.loss_params.lambda1 = grid.lambda1s[take(grid.lambda1s.size())];
  c.loss_params.lambda0 = grid.lambda0s[take(grid.lambda0s.size())];
  c.learning_rate = grid.learning_rates[take(grid.learning_rates.size())];
  c.epochs = grid.epochs[take(grid.epochs.size())];
  c.dropout_rate = grid.dropout_rates[take(grid.dropout_rates.size())];
  c.head_widths = grid.head_widths[take(grid.head_widths.size())];
  c.shared_widths = grid.shared_widths[take(grid.shared_widths.size())];
  return c;
}

struct FoldScore {
  bool defined = false;
  double c_index = 0.0;
  double loss = 0.0;
};

FoldScore score_fold(const data::Dataset& train_part, const data::Dataset& valid_part,
                     const std::variant<model::DeepCentConfig, model::CrNetConfig>& config,
                     std::uint64_t train_seed) {
  const Eigen::VectorXd yv = valid_part.times();
  const Eigen::VectorXi dv = valid_part.events();
  FoldScore score;
  if (const auto* single = std::get_if<model::DeepCentConfig>(&config)) {
    model::DeepCentConfig c = *single;
    c.seed = train_seed;
    const model::SingleModel fitted = model::train_single(train_part, c);
    const Eigen::VectorXd yhat = model::predict(fitted, valid_part.covariate_matrix());
    const auto ci = metrics::harrell_c(yv, dv, yhat, 1);
    score.loss = losses::censored_mse(yv, dv, yhat, c.loss_params.lambda1);
    if (ci) {
      score.defined = true;
      score.c_index = *ci;
    }
    return score;
  }
  model::CrNetConfig c = std::get<model::CrNetConfig>(config);
  c.seed = train_seed;
  const model::CompetingModel fitted = model::train_competing(train_part, c);
  const auto [yhat1, yhat2] = model::predict_competing(fitted, valid_part.covariate_matrix());
  score.loss = losses::cr_censored_mse(yv, dv, yhat1, yhat2, c.loss_params);
  const auto c1 = metrics::harrell_c(yv, dv, yhat1, 1);
  const auto c2 = metrics::harrell_c(yv, dv, yhat2, 2);
  double sum = 0.0;
  int defined = 0;
  if (c1) {
    sum += *c1;
    ++defined;
  }
  if (c2) {
    sum += *c2;
    ++defined;
  }
  if (defined > 0) {
    score.defined = true;
    score.c_index = sum / defined;  // mean over causes with comparable pairs
  }
  return score;
}

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sd_of(const std::vector<double>& v, double mean) {
  if (v.size() < 2) return 0.0;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

}  // namespace

Grid Grid::defaults_single() {
  Grid g;
  g.hidden_widths = {{32}, {32, 32}, {64, 32}};
  g.dropout_rates = {0.1, 0.3};
  g.epochs = {200, 500};
  g.learning_rates = {1e-3, 1e-2};
  g.lambda1s = {0.1, 1.0, 10.0};
  g.lambda2s = {0.1, 1.0, 10.0};
  return g;
}

Grid Grid::defaults_competing() {
  Grid g;
  g.shared_widths = {{32}, {32, 32}};
  g.head_widths = {{16}, {32}};
  g.dropout_rates = {0.1, 0.3};
  g.epochs = {200, 500};
  g.learning_rates = {1e-3, 1e-2};
  g.lambda0s = {0.1, 1.0, 10.0};
  g.lambda1s = {0.1, 1.0, 10.0};
  g.lambda2s = {0.1, 1.0, 10.0};
  g.lambda3s = {0.1, 1.0, 10.0};
  g.lambda4s = {0.1, 1.0, 10.0};
  return g;
}

std::size_t Grid::cartesian_size(data::Mode mode) const {
  std::size_t size = dropout_rates.size() * epochs.size() * learning_rates.size() *
                     lambda1s.size() * lambda2s.size();
  if (mode == data::Mode::single) {
    size *= hidden_widths.size();
  } else {
    size *= shared_widths.size() * head_widths.size() * lambda0s.size() *
            lambda3s.size() * lambda4s.size();
  }
  return size;
}

TuneResult grid_search_cv(const data::Dataset& train, const Grid& grid, int k,
                          std::uint64_t seed, int budget) {
  if (k < 2) throw ConfigError("cross validation needs k >= 2");
  if (k > train.size()) throw ConfigError("cross validation needs k <= n");
  check_nonempty(grid, train.mode);
  const std::size_t grid_size = grid.cartesian_size(train.mode);
  if (grid_size > kMaxCartesianSize) {
    throw ConfigError("tuning grid has " + std::to_string(grid_size) +
                      " configs; trim the candidate lists");
  }

  std::vector<std::size_t> chosen(grid_size);
  std::iota(chosen.begin(), chosen.end(), std::size_t{0});
  if (budget > 0 && grid_size > static_cast<std::size_t>(budget)) {
    Rng rng(seed ^ 0x632be59bd9b4e019ULL);
    rng.shuffle(chosen);
    chosen.resize(static_cast<std::size_t>(budget));
    std::sort(chosen.begin(), chosen.end());
  }

  TuneResult result;
  result.grid_size = grid_size;
  result.folds = data::kfold_indices(train.size(), k, seed);

  // materialize per-fold train/validation datasets once
  std::vector<data::Dataset> fold_train, fold_valid;
  for (int f = 0; f < k; ++f) {
    std::vector<int> train_idx;
    for (int g = 0; g < k; ++g) {
      if (g == f) continue;
      train_idx.insert(train_idx.end(), result.folds[g].begin(), result.folds[g].end());
    }
    std::sort(train_idx.begin(), train_idx.end());
    fold_train.push_back(data::subset(train, train_idx));
    fold_valid.push_back(data::subset(train, result.folds[f]));
  }

  for (std::size_t ci : chosen) {
    ConfigScore cs;
    cs.grid_index = ci;
    cs.config = decode_config(grid, train.mode, ci);
    for (int f = 0; f < k; ++f) {
      // per-fold seed shared across configs so duplicates score identically
      const FoldScore fs = score_fold(fold_train[f], fold_valid[f], cs.config,
                                      seed + 1 + static_cast<std::uint64_t>(f));
      cs.fold_losses.push_back(fs.loss);
      if (fs.defined) cs.fold_c_indices.push_back(fs.c_index);
    }
    cs.valid_folds = static_cast<int>(cs.fold_c_indices.size());
    cs.mean_loss = mean_of(cs.fold_losses);
    cs.sd_loss = sd_of(cs.fold_losses, cs.mean_loss);
    if (cs.fold_c_indices.empty()) {
      cs.disqualified = true;
      cs.mean_c_index = std::numeric_limits<double>::quiet_NaN();
      cs.sd_c_index = std::numeric_limits<double>::quiet_NaN();
    } else {
      cs.mean_c_index = mean_of(cs.fold_c_indices);
      cs.sd_c_index = sd_of(cs.fold_c_indices, cs.mean_c_index);
    }
    result.scores.push_back(std::move(cs));
  }

  for (std::size_t i = 0; i < result.scores.size(); ++i) {
    const ConfigScore& cs = result.scores[i];
    if (cs.disqualified) continue;
    if (result.best < 0) {
      result.best = static_cast<int>(i);
      continue;
    }
    const ConfigScore& incumbent = result.scores[result.best];
    if (cs.mean_c_index > incumbent.mean_c_index ||
        (cs.mean_c_index == incumbent.mean_c_index && cs.mean_loss < incumbent.mean_loss)) {
      result.best = static_cast<int>(i);
    }
  }
  if (result.best < 0) {
    throw TrainingError("grid search: every config had undefined validation C-index");
  }
  return result;
}

void write_tuning_csv(const TuneResult& result, data::Mode mode, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open '" + path + "' for writing");
  if (mode == data::Mode::single) {
    out << "config_index,hidden,dropout,epochs,learning_rate,lambda1,lambda2,"
           "mean_cindex,sd_cindex,mean_loss,sd_loss,valid_folds,best\n";
  } else {
    out << "config_index,shared,head,dropout,epochs,learning_rate,lambda0,lambda1,"
           "lambda2,lambda3,lambda4,mean_cindex,sd_cindex,mean_loss,sd_loss,"
           "valid_folds,best\n";
  }
  for (std::size_t i = 0; i < result.scores.size(); ++i) {
    const ConfigScore& cs = result.scores[i];
    out << cs.grid_index << ',';
    if (const auto* c = std::get_if<model::DeepCentConfig>(&cs.config)) {
      out << join_widths(c->hidden_widths) << ',' << format_double(c->dropout_rate) << ','
          << c->epochs << ',' << format_double(c->learning_rate) << ','
          << format_double(c->loss_params.lambda1) << ','
          << format_double(c->loss_params.lambda2) << ',';
    } else {
      const auto& cc = std::get<model::CrNetConfig>(cs.config);
      out << join_widths(cc.shared_widths) << ',' << join_widths(cc.head_widths) << ','
          << format_double(cc.dropout_rate) << ',' << cc.epochs << ','
          << format_double(cc.learning_rate) << ','
          << format_double(cc.loss_params.lambda0) << ','
          << format_double(cc.loss_params.lambda1) << ','
          << format_double(cc.loss_params.lambda2) << ','
          << format_double(cc.loss_params.lambda3) << ','
          << format_double(cc.loss_params.lambda4) << ',';
    }
    out << format_double(cs.mean_c_index) << ',' << format_double(cs.sd_c_index) << ','
        << format_double(cs.mean_loss) << ',' << format_double(cs.sd_loss) << ','
        << cs.valid_folds << ',' << (static_cast<int>(i) == result.best ? 1 : 0) << '\n';
  }
  out.flush();
  if (!out) throw DataError("write to '" + path + "' failed");
}

}  // namespace deepcent::tuning
