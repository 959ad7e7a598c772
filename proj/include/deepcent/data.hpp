#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace deepcent::data {

enum class Mode { single, competing };

struct SurvivalRecord {
  std::vector<double> covariates;
  double time = 0.0;  // observed, > 0
  int event = 0;      // 0 censored, 1/2 observed event cause
};

// Immutable after construction. Simulation generators additionally retain the
// latent event times (per cause) and the realized censoring draw so that
// truth-based metrics and the construction invariants stay checkable.
struct Dataset {
  std::vector<SurvivalRecord> records;
  std::vector<std::string> covariate_names;
  Mode mode = Mode::single;
  std::vector<double> true_time1;   // simulation only; empty otherwise
  std::vector<double> true_time2;   // competing simulation only
  std::vector<double> censor_times; // simulation only

  int size() const { return static_cast<int>(records.size()); }
  int covariate_count() const { return static_cast<int>(covariate_names.size()); }
  bool has_truth() const { return !true_time1.empty(); }

  Eigen::MatrixXd covariate_matrix() const;
  Eigen::VectorXd times() const;
  Eigen::VectorXi events() const;

  void validate() const;
};

struct SimConfig {
  int n = 500;
  double base_rate = 2.0;                  // lambda
  std::vector<double> beta{5, -5, 2, -2};  // quadratic log-risk coefficients
  double group_multiplier = 2.0;           // kappa, applied to treated times
  double theta = 1.0;                      // censoring upper bound, may be +inf
  std::uint64_t seed = 1;
};

struct CrSimConfig {
  int n = 500;
  double rate1 = 2.0;
  double rate2 = 4.0;
  std::vector<double> beta{5, -5, 2};  // beta1..beta3
  double group_multiplier = 2.0;       // applies to cause-1 times only
  double theta = 1.0;
  std::uint64_t seed = 1;
};

// T ~ exponential with rate lambda * exp(sum beta_j x_j^2), x_j ~ U(-1,1),
// binary group covariate multiplying treated times, C ~ U(0, theta).
Dataset simulate_noncompeting(const SimConfig& config);

// Two latent exponential times with cause-specific quadratic rates sharing
// x1/x2; the group covariate multiplies cause-1 times only.
Dataset simulate_competing(const CrSimConfig& config);

// Bisection on theta over Monte Carlo censoring estimates (1e5 common-random
// draws) until |empirical - target| <= tolerance. config.theta is ignored.
double calibrate_theta(const SimConfig& config, double target_censoring, double tolerance);
double calibrate_theta(const CrSimConfig& config, double target_censoring, double tolerance);

// CSV with header `time,event,<covariates...>`; emission uses 17 significant
// digits. Mode is inferred from the event-column alphabet on load.
Dataset load_csv(const std::string& path);
void write_csv(const Dataset& dataset, const std::string& path);

// Sidecar with the latent event times of a simulated dataset: `id,true_time`
// or `id,true_time1,true_time2`, ids being 0-based row indices.
void write_truth_csv(const Dataset& dataset, const std::string& path);
void load_truth_csv(Dataset& dataset, const std::string& path);

std::pair<Dataset, Dataset> split(const Dataset& dataset, double fraction, std::uint64_t seed);

// Disjoint folds covering 0..n-1 with sizes differing by at most one;
// indices sorted within each fold.
std::vector<std::vector<int>> kfold_indices(int n, int k, std::uint64_t seed);

Dataset subset(const Dataset& dataset, const std::vector<int>& indices);

}  // namespace deepcent::data
