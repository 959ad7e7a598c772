#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "deepcent/data.hpp"
#include "deepcent/model.hpp"

namespace deepcent::tuning {

// Candidate lists per hyperparameter; which lists apply depends on the
// dataset mode (hidden_widths for single, shared/head widths and
// lambda0/3/4 for competing).
struct Grid {
  std::vector<std::vector<int>> hidden_widths;
  std::vector<std::vector<int>> shared_widths;
  std::vector<std::vector<int>> head_widths;
  std::vector<double> dropout_rates;
  std::vector<int> epochs;
  std::vector<double> learning_rates;
  std::vector<double> lambda0s;
  std::vector<double> lambda1s;
  std::vector<double> lambda2s;
  std::vector<double> lambda3s;
  std::vector<double> lambda4s;

  static Grid defaults_single();
  static Grid defaults_competing();

  std::size_t cartesian_size(data::Mode mode) const;
};

struct ConfigScore {
  std::size_t grid_index = 0;  // position in the full Cartesian enumeration
  std::variant<model::DeepCentConfig, model::CrNetConfig> config;
  std::vector<double> fold_c_indices;  // only folds with comparable pairs
  std::vector<double> fold_losses;     // all folds
  double mean_c_index = 0.0;
  double sd_c_index = 0.0;
  double mean_loss = 0.0;
  double sd_loss = 0.0;
  int valid_folds = 0;
  bool disqualified = false;
};

struct TuneResult {
  int best = -1;  // index into scores
  std::vector<ConfigScore> scores;
  std::vector<std::vector<int>> folds;
  std::size_t grid_size = 0;  // full Cartesian size before any budget cap
};

// k-fold cross-validated grid search selecting the highest mean validation
// C-index; ties break by lower mean validation regression loss, then by grid
// order. A fold without comparable pairs is excluded from the C-index mean;
// a config undefined on every fold is disqualified. When the Cartesian
// product exceeds `budget` (> 0), that many configs are sampled uniformly
// without replacement.
TuneResult grid_search_cv(const data::Dataset& train, const Grid& grid, int k,
                          std::uint64_t seed, int budget = 0);

// One row per evaluated config: hyperparameters, mean/SD metrics, best flag.
void write_tuning_csv(const TuneResult& result, data::Mode mode, const std::string& path);

}  // namespace deepcent::tuning
