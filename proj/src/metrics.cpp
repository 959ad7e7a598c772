#include "deepcent/metrics.hpp"

#include <string>

#include "deepcent/errors.hpp"

namespace deepcent::metrics {

std::optional<double> harrell_c(const losses::ComparablePairs& pairs,
                                const Eigen::VectorXd& yhat) {
  if (pairs.empty()) return std::nullopt;
  long long concordant = 0;
  for (const auto& [i, j] : pairs.pairs) {
    if (i < 0 || j < 0 || i >= yhat.size() || j >= yhat.size()) {
      throw DataError("harrell_c: pair index out of range");
    }
    if (yhat[i] < yhat[j]) ++concordant;
  }
  return static_cast<double>(concordant) / static_cast<double>(pairs.size());
}

std::optional<double> harrell_c(const Eigen::VectorXd& y, const Eigen::VectorXi& delta,
                                const Eigen::VectorXd& yhat, int event_of_interest) {
  if (y.size() != yhat.size()) throw DataError("harrell_c: length mismatch");
  return harrell_c(losses::comparable_pairs(y, delta, event_of_interest), yhat);
}

double mse_true(const std::vector<double>& true_times, const Eigen::VectorXd& yhat) {
  if (static_cast<Eigen::Index>(true_times.size()) != yhat.size()) {
    throw DataError("mse_true: length mismatch");
  }
  if (true_times.empty()) throw DataError("mse_true: empty input");
  double total = 0.0;
  for (Eigen::Index i = 0; i < yhat.size(); ++i) {
    const double d = yhat[i] - true_times[static_cast<std::size_t>(i)];
    total += d * d;
  }
  return total / static_cast<double>(yhat.size());
}

std::optional<double> mse_events(const Eigen::VectorXd& y, const Eigen::VectorXi& delta,
                                 const Eigen::VectorXd& yhat, int event_of_interest) {
  if (y.size() != delta.size() || y.size() != yhat.size()) {
    throw DataError("mse_events: length mismatch");
  }
  double total = 0.0;
  long long count = 0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (delta[i] != event_of_interest) continue;
    const double d = yhat[i] - y[i];
    total += d * d;
    ++count;
  }
  if (count == 0) return std::nullopt;
  return total / static_cast<double>(count);
}

EvalReport evaluate(const data::Dataset& ds, const Eigen::VectorXd& yhat1,
                    const Eigen::VectorXd* yhat2) {
  if (ds.mode == data::Mode::competing && yhat2 == nullptr) {
    throw DataError("evaluate: competing dataset needs two prediction vectors");
  }
  if (ds.mode == data::Mode::single && yhat2 != nullptr) {
    throw DataError("evaluate: single-mode dataset got two prediction vectors");
  }
  if (yhat1.size() != ds.size() || (yhat2 && yhat2->size() != ds.size())) {
    throw DataError("evaluate: prediction count does not match dataset size (" +
                    std::to_string(yhat1.size()) + " vs " + std::to_string(ds.size()) + ")");
  }

  const Eigen::VectorXd y = ds.times();
  const Eigen::VectorXi delta = ds.events();

  EvalReport report;
  report.mode = ds.mode;
  report.n = ds.size();
  report.mse_from_truth = ds.has_truth();

  const int causes = ds.mode == data::Mode::competing ? 2 : 1;
  for (int cause = 1; cause <= causes; ++cause) {
    const Eigen::VectorXd& yh = cause == 1 ? yhat1 : *yhat2;
    const auto pairs = losses::comparable_pairs(y, delta, cause);
    CauseReport cr;
    cr.c_index = harrell_c(pairs, yh);
    cr.comparable_pairs = static_cast<long long>(pairs.size());
    cr.events = (delta.array() == cause).count();
    if (ds.has_truth()) {
      cr.mse = mse_true(cause == 1 ? ds.true_time1 : ds.true_time2, yh);
    } else {
      cr.mse = mse_events(y, delta, yh, cause);
    }
    report.causes.push_back(std::move(cr));
  }
  return report;
}

}  // namespace deepcent::metrics
