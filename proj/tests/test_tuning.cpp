#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "deepcent/data.hpp"
#include "deepcent/errors.hpp"
#include "deepcent/tuning.hpp"

using namespace deepcent;
using tuning::Grid;
using tuning::TuneResult;

namespace {

data::Dataset sim_single(int n, std::uint64_t seed) {
  data::SimConfig cfg;
  cfg.n = n;
  cfg.theta = 2.25;
  cfg.seed = seed;
  return data::simulate_noncompeting(cfg);
}

Grid tiny_grid() {
  Grid g;
  g.hidden_widths = {{4}};
  g.dropout_rates = {0.0};
  g.epochs = {10};
  g.learning_rates = {1e-2};
  g.lambda1s = {1.0};
  g.lambda2s = {1.0};
  return g;
}

}  // namespace

TEST_CASE("a singleton grid returns its only config with CV scores") {
  const data::Dataset train = sim_single(60, 3);
  const TuneResult result = tuning::grid_search_cv(train, tiny_grid(), 3, 7);
  REQUIRE(result.scores.size() == 1);
  CHECK(result.best == 0);
  CHECK(result.grid_size == 1);
  CHECK(result.scores[0].valid_folds == 3);
  CHECK(result.scores[0].mean_c_index > 0.0);
  CHECK(result.scores[0].mean_c_index <= 1.0);
}

TEST_CASE("duplicated configs earn identical scores") {
  const data::Dataset train = sim_single(60, 5);
  Grid g = tiny_grid();
  g.lambda2s = {1.0, 1.0};
  const TuneResult result = tuning::grid_search_cv(train, g, 3, 7);
  REQUIRE(result.scores.size() == 2);
  CHECK(result.scores[0].mean_c_index == result.scores[1].mean_c_index);
  CHECK(result.scores[0].sd_c_index == result.scores[1].sd_c_index);
  CHECK(result.scores[0].mean_loss == result.scores[1].mean_loss);
  CHECK(result.best == 0);  // exact tie resolves to grid order
}

TEST_CASE("fold hygiene and reported means") {
  const data::Dataset train = sim_single(50, 11);
  const TuneResult result = tuning::grid_search_cv(train, tiny_grid(), 5, 13);

  std::set<int> seen;
  for (const auto& fold : result.folds) {
    for (int idx : fold) CHECK(seen.insert(idx).second);
  }
  CHECK(static_cast<int>(seen.size()) == train.size());

  const auto& score = result.scores[0];
  double c_sum = 0.0;
  for (double c : score.fold_c_indices) c_sum += c;
  CHECK(score.mean_c_index ==
        doctest::Approx(c_sum / score.fold_c_indices.size()).epsilon(1e-14));
  double l_sum = 0.0;
  for (double l : score.fold_losses) l_sum += l;
  CHECK(score.mean_loss == doctest::Approx(l_sum / score.fold_losses.size()).epsilon(1e-14));
}

TEST_CASE("the rank term earns its keep on nonlinear data") {
  const data::Dataset train = sim_single(500, 21);
  Grid g;
  g.hidden_widths = {{32, 32}};
  g.dropout_rates = {0.1};
  g.epochs = {200};
  g.learning_rates = {1e-2};
  g.lambda1s = {1.0};
  g.lambda2s = {0.0, 1.0};
  const TuneResult result = tuning::grid_search_cv(train, g, 5, 23);
  REQUIRE(result.scores.size() == 2);
  const auto& winner = result.scores[result.best];
  const auto& loser = result.scores[1 - result.best];
  CHECK(winner.mean_c_index > loser.mean_c_index);
}

TEST_CASE("the budget samples without replacement in grid order") {
  const data::Dataset train = sim_single(40, 31);
  Grid g = tiny_grid();
  g.lambda1s = {0.1, 1.0};
  g.lambda2s = {0.1, 1.0};
  g.dropout_rates = {0.0, 0.2};
  CHECK(g.cartesian_size(data::Mode::single) == 8);
  const TuneResult result = tuning::grid_search_cv(train, g, 2, 41, /*budget=*/3);
  REQUIRE(result.scores.size() == 3);
  CHECK(result.grid_size == 8);
  std::set<std::size_t> indices;
  std::size_t prev = 0;
  bool first = true;
  for (const auto& score : result.scores) {
    CHECK(indices.insert(score.grid_index).second);
    if (!first) CHECK(score.grid_index > prev);
    prev = score.grid_index;
    first = false;
  }
  // deterministic resampling
  const TuneResult again = tuning::grid_search_cv(train, g, 2, 41, 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(again.scores[i].grid_index == result.scores[i].grid_index);
    CHECK(again.scores[i].mean_c_index == result.scores[i].mean_c_index);
  }
}

TEST_CASE("validation folds without comparable pairs are excluded or disqualify") {
  // censored records all have smaller times than every event, so a validation
  // fold is scoreable only if it holds two events with distinct times
  data::Dataset ds;
  ds.mode = data::Mode::single;
  ds.covariate_names = {"x1"};
  const double event_times[] = {10.0, 11.0, 12.0};
  for (double t : event_times) ds.records.push_back({{t / 10.0}, t, 1});
  for (int i = 1; i <= 3; ++i) ds.records.push_back({{i * 0.1}, static_cast<double>(i), 0});

  bool saw_partial = false;
  bool saw_disqualified = false;
  for (std::uint64_t seed = 0; seed < 40 && !(saw_partial && saw_disqualified); ++seed) {
    try {
      const TuneResult result = tuning::grid_search_cv(ds, tiny_grid(), 3, seed);
      const auto& score = result.scores[0];
      if (score.valid_folds > 0 && score.valid_folds < 3) saw_partial = true;
    } catch (const TrainingError&) {
      saw_disqualified = true;  // every fold undefined, or a fold lost all events
    }
  }
  CHECK(saw_partial);
  CHECK(saw_disqualified);
}

TEST_CASE("invalid tuning inputs are configuration errors") {
  const data::Dataset train = sim_single(20, 51);
  CHECK_THROWS_AS(tuning::grid_search_cv(train, tiny_grid(), 1, 1), ConfigError);
  CHECK_THROWS_AS(tuning::grid_search_cv(train, tiny_grid(), 21, 1), ConfigError);
  Grid empty = tiny_grid();
  empty.epochs.clear();
  CHECK_THROWS_AS(tuning::grid_search_cv(train, empty, 3, 1), ConfigError);
}

TEST_CASE("the tuning report lands on disk with one row per config") {
  const data::Dataset train = sim_single(40, 61);
  Grid g = tiny_grid();
  g.lambda2s = {0.1, 1.0};
  const TuneResult result = tuning::grid_search_cv(train, g, 2, 71);
  const std::string path = "deepcent_test_tuning.csv";
  tuning::write_tuning_csv(result, train.mode, path);

  std::ifstream in(path);
  REQUIRE(in.good());
  std::string line;
  std::getline(in, line);
  CHECK(line ==
        "config_index,hidden,dropout,epochs,learning_rate,lambda1,lambda2,"
        "mean_cindex,sd_cindex,mean_loss,sd_loss,valid_folds,best");
  int rows = 0, best_rows = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    ++rows;
    if (line.size() >= 2 && line.substr(line.size() - 2) == ",1") ++best_rows;
  }
  CHECK(rows == 2);
  CHECK(best_rows == 1);
  std::remove(path.c_str());
}

TEST_CASE("default grids are well formed") {
  CHECK(Grid::defaults_single().cartesian_size(data::Mode::single) == 216);
  CHECK(Grid::defaults_competing().cartesian_size(data::Mode::competing) > 1000);
}
