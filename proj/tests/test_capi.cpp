#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <cstring>
#include <string>
#include <vector>

#include "deepcent/deepcent.h"

namespace {

struct DatasetGuard {
  dc_dataset* ptr = nullptr;
  ~DatasetGuard() { dc_dataset_free(ptr); }
};

struct ModelGuard {
  dc_model* ptr = nullptr;
  ~ModelGuard() { dc_model_free(ptr); }
};

dc_sim_config default_sim(int n, long long seed) {
  dc_sim_config cfg{};
  cfg.n = n;
  cfg.base_rate = 2.0;
  cfg.beta = nullptr;
  cfg.n_beta = 0;
  cfg.group_multiplier = 2.0;
  cfg.theta = 2.25;
  cfg.seed = seed;
  return cfg;
}

dc_train_config small_train(const int* hidden, int n_hidden, long long seed) {
  dc_train_config cfg{};
  cfg.hidden = hidden;
  cfg.n_hidden = n_hidden;
  cfg.dropout = 0.1;
  cfg.epochs = 40;
  cfg.learning_rate = 1e-2;
  cfg.lambda1 = 1.0;
  cfg.lambda2 = 1.0;
  cfg.rank_loss = 0;
  cfg.seed = seed;
  return cfg;
}

}  // namespace

TEST_CASE("version and error strings are always available") {
  CHECK(std::string(dc_version()) == "0.1.0");
  CHECK(dc_last_error() != nullptr);
}

TEST_CASE("single-risk pipeline through the shared library") {
  dc_sim_config sim = default_sim(120, 7);
  double theta = 0.0;
  REQUIRE(dc_calibrate_theta_single(&sim, 0.40, 0.005, &theta) == DC_OK);
  CHECK(theta == doctest::Approx(2.25).epsilon(1e-12));
  sim.theta = theta;

  DatasetGuard ds;
  REQUIRE(dc_simulate_single(&sim, &ds.ptr) == DC_OK);
  CHECK(dc_dataset_size(ds.ptr) == 120);
  CHECK(dc_dataset_covariates(ds.ptr) == 5);
  CHECK(dc_dataset_mode(ds.ptr) == DC_MODE_SINGLE);
  CHECK(dc_dataset_has_truth(ds.ptr) == 1);

  REQUIRE(dc_dataset_save_csv(ds.ptr, "capi_data.csv") == DC_OK);
  REQUIRE(dc_dataset_save_truth_csv(ds.ptr, "capi_truth.csv") == DC_OK);

  DatasetGuard loaded;
  REQUIRE(dc_dataset_load_csv("capi_data.csv", &loaded.ptr) == DC_OK);
  CHECK(dc_dataset_has_truth(loaded.ptr) == 0);
  REQUIRE(dc_dataset_load_truth_csv(loaded.ptr, "capi_truth.csv") == DC_OK);
  CHECK(dc_dataset_has_truth(loaded.ptr) == 1);

  DatasetGuard train, test;
  REQUIRE(dc_dataset_split(loaded.ptr, 2.0 / 3.0, 3, &train.ptr, &test.ptr) == DC_OK);
  CHECK(dc_dataset_size(train.ptr) == 80);
  CHECK(dc_dataset_size(test.ptr) == 40);

  const int hidden[] = {16};
  const dc_train_config cfg = small_train(hidden, 1, 5);
  ModelGuard model;
  REQUIRE(dc_train_single(train.ptr, &cfg, &model.ptr) == DC_OK);
  CHECK(dc_model_mode(model.ptr) == DC_MODE_SINGLE);

  int trace_len = 0;
  std::vector<double> trace(64);
  REQUIRE(dc_model_loss_trace(model.ptr, trace.data(), 64, &trace_len) == DC_OK);
  CHECK(trace_len == 40);
  CHECK(trace[39] < trace[0]);

  std::vector<double> yhat(dc_dataset_size(test.ptr));
  REQUIRE(dc_predict(model.ptr, test.ptr, yhat.data(), nullptr) == DC_OK);
  for (double v : yhat) CHECK(v >= 1e-6);

  dc_eval_report report{};
  REQUIRE(dc_evaluate(test.ptr, yhat.data(), nullptr, &report) == DC_OK);
  CHECK(report.n == 40);
  CHECK(report.mse_uses_truth == 1);
  CHECK(report.c_index_defined[0] == 1);
  CHECK(report.c_index[0] >= 0.0);
  CHECK(report.c_index[0] <= 1.0);
  CHECK(report.mse_defined[0] == 1);

  REQUIRE(dc_model_save(model.ptr, "capi_model.json") == DC_OK);
  ModelGuard reloaded;
  REQUIRE(dc_model_load("capi_model.json", &reloaded.ptr) == DC_OK);
  std::vector<double> again(dc_dataset_size(test.ptr));
  REQUIRE(dc_predict(reloaded.ptr, test.ptr, again.data(), nullptr) == DC_OK);
  CHECK(std::memcmp(yhat.data(), again.data(), sizeof(double) * yhat.size()) == 0);

  std::vector<double> lower(dc_dataset_size(test.ptr)), upper(dc_dataset_size(test.ptr));
  REQUIRE(dc_predict_interval(model.ptr, test.ptr, 50, 0.05, 11, lower.data(), upper.data(),
                              nullptr, nullptr) == DC_OK);
  for (int i = 0; i < dc_dataset_size(test.ptr); ++i) CHECK(lower[i] <= upper[i]);

  std::remove("capi_data.csv");
  std::remove("capi_truth.csv");
  std::remove("capi_model.json");
}

TEST_CASE("competing pipeline through the shared library") {
  dc_cr_sim_config sim{};
  sim.n = 100;
  sim.rate1 = 2.0;
  sim.rate2 = 4.0;
  sim.beta = nullptr;
  sim.n_beta = 0;
  sim.group_multiplier = 2.0;
  sim.theta = 0.28125;
  sim.seed = 9;

  DatasetGuard ds;
  REQUIRE(dc_simulate_competing(&sim, &ds.ptr) == DC_OK);
  CHECK(dc_dataset_mode(ds.ptr) == DC_MODE_COMPETING);

  dc_cr_train_config cfg{};
  const int shared[] = {16};
  const int head[] = {8};
  cfg.shared = shared;
  cfg.n_shared = 1;
  cfg.head = head;
  cfg.n_head = 1;
  cfg.dropout = 0.1;
  cfg.epochs = 30;
  cfg.learning_rate = 1e-2;
  cfg.lambda0 = cfg.lambda1 = cfg.lambda2 = cfg.lambda3 = cfg.lambda4 = 1.0;
  cfg.seed = 13;
  ModelGuard model;
  REQUIRE(dc_train_competing(ds.ptr, &cfg, &model.ptr) == DC_OK);
  CHECK(dc_model_mode(model.ptr) == DC_MODE_COMPETING);

  const int n = dc_dataset_size(ds.ptr);
  std::vector<double> yhat1(n), yhat2(n);
  REQUIRE(dc_predict(model.ptr, ds.ptr, yhat1.data(), yhat2.data()) == DC_OK);

  dc_eval_report report{};
  REQUIRE(dc_evaluate(ds.ptr, yhat1.data(), yhat2.data(), &report) == DC_OK);
  CHECK(report.events[0] > 0);
  CHECK(report.events[1] > 0);
  CHECK(report.comparable_pairs[0] > 0);

  std::vector<double> l1(n), u1(n), l2(n), u2(n);
  REQUIRE(dc_predict_interval(model.ptr, ds.ptr, 30, 0.05, 3, l1.data(), u1.data(),
                              l2.data(), u2.data()) == DC_OK);
  for (int i = 0; i < n; ++i) {
    CHECK(l1[i] <= u1[i]);
    CHECK(l2[i] <= u2[i]);
  }
}

TEST_CASE("status codes and error messages cross the boundary") {
  dc_dataset* ds = nullptr;
  CHECK(dc_dataset_load_csv("definitely_missing.csv", &ds) == DC_ERR_DATA);
  CHECK(std::strlen(dc_last_error()) > 0);

  CHECK(dc_simulate_single(nullptr, &ds) == DC_ERR_CONFIG);

  dc_sim_config bad = default_sim(1, 1);  // n too small
  CHECK(dc_simulate_single(&bad, &ds) == DC_ERR_CONFIG);

  // mode mismatch between model and data names both modes
  dc_sim_config sim = default_sim(60, 21);
  DatasetGuard single_ds;
  REQUIRE(dc_simulate_single(&sim, &single_ds.ptr) == DC_OK);
  const int hidden[] = {8};
  const dc_train_config cfg = small_train(hidden, 1, 2);
  ModelGuard model;
  REQUIRE(dc_train_single(single_ds.ptr, &cfg, &model.ptr) == DC_OK);

  dc_cr_sim_config crsim{};
  crsim.n = 60;
  crsim.rate1 = 2.0;
  crsim.rate2 = 4.0;
  crsim.group_multiplier = 2.0;
  crsim.theta = 1.0;
  crsim.seed = 4;
  DatasetGuard cr_ds;
  REQUIRE(dc_simulate_competing(&crsim, &cr_ds.ptr) == DC_OK);

  std::vector<double> buf(60);
  CHECK(dc_predict(model.ptr, cr_ds.ptr, buf.data(), nullptr) == DC_ERR_DATA);
  const std::string message = dc_last_error();
  CHECK(message.find("single") != std::string::npos);
  CHECK(message.find("competing") != std::string::npos);

  // all-censored training data is a numeric/training failure
  dc_sim_config heavy = default_sim(30, 31);
  heavy.theta = 1e-4;
  DatasetGuard censored;
  REQUIRE(dc_simulate_single(&heavy, &censored.ptr) == DC_OK);
  dc_model* failed = nullptr;
  CHECK(dc_train_single(censored.ptr, &cfg, &failed) == DC_ERR_NUMERIC);
}

TEST_CASE("tuning and benchmark entry points") {
  CHECK(dc_tune_grid_size(nullptr, DC_MODE_SINGLE) == 216);

  dc_sim_config sim = default_sim(40, 17);
  DatasetGuard ds;
  REQUIRE(dc_simulate_single(&sim, &ds.ptr) == DC_OK);

  dc_grid grid{};
  const int hidden_flat[] = {4};
  const int hidden_offsets[] = {0, 1};
  grid.hidden_flat = hidden_flat;
  grid.hidden_offsets = hidden_offsets;
  grid.n_hidden = 1;
  const double dropout[] = {0.0};
  grid.dropout = dropout;
  grid.n_dropout = 1;
  const int epochs[] = {5};
  grid.epochs = epochs;
  grid.n_epochs = 1;
  const double lr[] = {1e-2};
  grid.learning_rate = lr;
  grid.n_learning_rate = 1;
  const double lambda[] = {1.0};
  grid.lambda1 = lambda;
  grid.n_lambda1 = 1;
  grid.lambda2 = lambda;
  grid.n_lambda2 = 1;
  CHECK(dc_tune_grid_size(&grid, DC_MODE_SINGLE) == 1);

  char best[1024] = {0};
  REQUIRE(dc_tune(ds.ptr, &grid, 2, 3, 0, "capi_tuning.csv", best, sizeof(best)) == DC_OK);
  CHECK(std::string(best).find("\"hidden\"") != std::string::npos);
  std::FILE* f = std::fopen("capi_tuning.csv", "r");
  REQUIRE(f != nullptr);
  std::fclose(f);
  std::remove("capi_tuning.csv");

  dc_benchmark_config bench{};
  bench.mode = DC_MODE_SINGLE;
  bench.n = 60;
  bench.censoring = 0.4;
  bench.replicates = 1;
  bench.seed = 5;
  bench.methods = "weibull";
  REQUIRE(dc_benchmark(&bench, "capi_bench.csv") == DC_OK);
  std::FILE* bf = std::fopen("capi_bench.csv", "r");
  REQUIRE(bf != nullptr);
  char header[64] = {0};
  REQUIRE(std::fgets(header, sizeof(header), bf) != nullptr);
  CHECK(std::string(header) == "replicate,method,metric,value\n");
  std::fclose(bf);
  std::remove("capi_bench.csv");

  bench.methods = "nonsense";
  CHECK(dc_benchmark(&bench, "capi_bench.csv") == DC_ERR_CONFIG);
}
