#pragma once

#include <Eigen/Core>
#include <optional>
#include <vector>

#include "deepcent/data.hpp"
#include "deepcent/losses.hpp"

namespace deepcent::metrics {

// Harrell's concordance: fraction of comparable pairs ranked concordantly.
// Prediction ties count 0 (strict indicator). No comparable pairs -> nullopt.
std::optional<double> harrell_c(const losses::ComparablePairs& pairs,
                                const Eigen::VectorXd& yhat);
std::optional<double> harrell_c(const Eigen::VectorXd& y, const Eigen::VectorXi& delta,
                                const Eigen::VectorXd& yhat, int event_of_interest);

// Mean squared error against simulation truth, over every observation.
double mse_true(const std::vector<double>& true_times, const Eigen::VectorXd& yhat);

// Mean squared error over observed events of the given cause; nullopt when
// there are none.
std::optional<double> mse_events(const Eigen::VectorXd& y, const Eigen::VectorXi& delta,
                                 const Eigen::VectorXd& yhat, int event_of_interest);

struct CauseReport {
  std::optional<double> c_index;
  std::optional<double> mse;
  long long comparable_pairs = 0;
  long long events = 0;
};

struct EvalReport {
  data::Mode mode = data::Mode::single;
  int n = 0;
  bool mse_from_truth = false;
  std::vector<CauseReport> causes;  // one entry (single) or two (competing)
};

// Per-cause C-index plus the applicable MSE: truth-based when the dataset
// carries simulation truth, event-only otherwise.
EvalReport evaluate(const data::Dataset& dataset, const Eigen::VectorXd& yhat1,
                    const Eigen::VectorXd* yhat2 = nullptr);

}  // namespace deepcent::metrics
