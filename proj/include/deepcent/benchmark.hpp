#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "deepcent/data.hpp"
#include "deepcent/model.hpp"

namespace deepcent::bench {

// Known method names per mode.
inline const std::vector<std::string> kSingleMethods = {"weibull", "deepcent",
                                                        "rankdeepsurv-loss"};
inline const std::vector<std::string> kCompetingMethods = {"cr-weibull", "cr-deepcent"};

struct BenchmarkConfig {
  data::Mode mode = data::Mode::single;
  int n = 500;               // training sample size; test sets use n/2
  double censoring = 0.4;    // target censoring proportion, theta calibrated once
  int replicates = 20;
  std::uint64_t seed = 1;
  std::vector<std::string> methods;  // empty -> all methods for the mode
};

struct ResultRow {
  int replicate = 0;
  std::string method;
  std::string metric;  // cindex / mse, or cindex1/cindex2/mse1/mse2
  double value = 0.0;
};

// Fixed small network configurations used by the benchmark methods.
model::DeepCentConfig default_single_net();
model::DeepCentConfig default_rankdeepsurv_net();
model::CrNetConfig default_competing_net();

// Per replicate: simulate train (n) and test (n/2) sets from the quadratic
// log-risk design, fit each method on train, score C-index and truth-based
// MSE on test. Rows are ordered by (replicate, method, metric).
std::vector<ResultRow> run_benchmark(const BenchmarkConfig& config);

void write_benchmark_csv(const std::vector<ResultRow>& rows, const std::string& path);

}  // namespace deepcent::bench
