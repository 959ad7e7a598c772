#include "deepcent/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "deepcent/errors.hpp"
#include "deepcent/rng.hpp"

namespace deepcent::data {

namespace {

constexpr std::uint64_t kCalibrationStream = 0x517cc1b727220a95ULL;
constexpr int kCalibrationDraws = 100000;
constexpr int kMaxBisectionSteps = 60;

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void check_positive(double v, const char* name) {
  if (!(v > 0.0)) throw ConfigError(std::string(name) + " must be positive");
}

// Latent part of one noncompeting record: covariates (incl. binary group as
// the last entry) and the group-scaled event time. Draw order: uniforms,
// group, event time.
std::pair<std::vector<double>, double> draw_noncompeting_latent(const SimConfig& cfg, Rng& rng) {
  const int m = static_cast<int>(cfg.beta.size());
  std::vector<double> x(m + 1);
  double log_risk = 0.0;
  for (int j = 0; j < m; ++j) {
    x[j] = rng.uniform(-1.0, 1.0);
    log_risk += cfg.beta[j] * x[j] * x[j];
  }
  x[m] = rng.bernoulli(0.5) ? 1.0 : 0.0;
  const double rate = cfg.base_rate * std::exp(log_risk);
  double t = rng.exponential(rate);
  if (x[m] == 1.0) t *= cfg.group_multiplier;
  return {std::move(x), t};
}

struct CompetingLatent {
  std::vector<double> x;
  double t1;
  double t2;
};

CompetingLatent draw_competing_latent(const CrSimConfig& cfg, Rng& rng) {
  CompetingLatent d;
  d.x.resize(5);
  for (int j = 0; j < 4; ++j) d.x[j] = rng.uniform(-1.0, 1.0);
  d.x[4] = rng.bernoulli(0.5) ? 1.0 : 0.0;
  const double rate1 = cfg.rate1 * std::exp(cfg.beta[0] * d.x[0] * d.x[0] +
                                            cfg.beta[1] * d.x[1] * d.x[1] +
                                            cfg.beta[2] * d.x[2] * d.x[2]);
  const double rate2 = cfg.rate2 * std::exp(cfg.beta[0] * d.x[0] * d.x[0] +
                                            cfg.beta[1] * d.x[3] * d.x[3]);
  d.t1 = rng.exponential(rate1);
  if (d.x[4] == 1.0) d.t1 *= cfg.group_multiplier;
  d.t2 = rng.exponential(rate2);
  return d;
}

void validate_sim_common(int n, double theta, double kappa) {
  if (n < 2) throw ConfigError("sample size must be at least 2");
  check_positive(kappa, "group multiplier");
  if (!(theta > 0.0)) throw ConfigError("theta must be positive (or infinite)");
}

// Bisection on theta against a fixed set of (event time, censoring uniform)
// draws; the empirical censoring fraction is then monotone in theta.
double calibrate_from_draws(const std::vector<double>& event_time,
                            const std::vector<double>& cens_u, double target,
                            double tolerance) {
  if (!(target > 0.0 && target < 1.0)) {
    throw ConfigError("target censoring proportion must lie in (0, 1)");
  }
  check_positive(tolerance, "tolerance");
  const double m = static_cast<double>(event_time.size());
  auto censored_fraction = [&](double theta) {
    long censored = 0;
    for (std::size_t i = 0; i < event_time.size(); ++i) {
      if (theta * cens_u[i] < event_time[i]) ++censored;
    }
    return static_cast<double>(censored) / m;
  };

  double lo = 0.0;
  double hi = 1.0;
  int expansions = 0;
  while (censored_fraction(hi) > target) {
    hi *= 2.0;
    if (++expansions > 200) {
      throw NumericError("theta calibration: target " + format_double(target) +
                         " unattainable; censoring at theta=" + format_double(hi) +
                         " is " + format_double(censored_fraction(hi)));
    }
  }
  for (int iter = 0; iter < kMaxBisectionSteps; ++iter) {
    const double mid = 0.5 * (lo + hi);
    const double f = censored_fraction(mid);
    if (std::fabs(f - target) <= tolerance) return mid;
    if (f > target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  throw NumericError("theta calibration did not reach tolerance " +
                     format_double(tolerance) + "; bracket [" + format_double(lo) +
                     ", " + format_double(hi) + "] has censoring [" +
                     format_double(censored_fraction(lo)) + ", " +
                     format_double(censored_fraction(hi)) + "]");
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.push_back("");
  return cells;
}

double parse_double_cell(const std::string& cell, int line_no, const char* what) {
  const char* begin = cell.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0' || !std::isfinite(v)) {
    throw DataError("line " + std::to_string(line_no) + ": non-numeric " +
                    what + " cell '" + cell + "'");
  }
  return v;
}

long parse_int_cell(const std::string& cell, int line_no, const char* what) {
  const char* begin = cell.c_str();
  char* end = nullptr;
  const long v = std::strtol(begin, &end, 10);
  if (end == begin || *end != '\0') {
    throw DataError("line " + std::to_string(line_no) + ": non-integer " +
                    what + " cell '" + cell + "'");
  }
  return v;
}

std::string chomp(std::string line) {
  while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) {
    line.pop_back();
  }
  return line;
}

}  // namespace

Eigen::MatrixXd Dataset::covariate_matrix() const {
  Eigen::MatrixXd x(size(), covariate_count());
  for (int i = 0; i < size(); ++i) {
    if (static_cast<int>(records[i].covariates.size()) != covariate_count()) {
      throw DataError("record " + std::to_string(i) + " has inconsistent covariate count");
    }
    for (int j = 0; j < covariate_count(); ++j) x(i, j) = records[i].covariates[j];
  }
  return x;
}

Eigen::VectorXd Dataset::times() const {
  Eigen::VectorXd y(size());
  for (int i = 0; i < size(); ++i) y[i] = records[i].time;
  return y;
}

Eigen::VectorXi Dataset::events() const {
  Eigen::VectorXi d(size());
  for (int i = 0; i < size(); ++i) d[i] = records[i].event;
  return d;
}

void Dataset::validate() const {
  const int max_event = mode == Mode::single ? 1 : 2;
  for (int i = 0; i < size(); ++i) {
    const SurvivalRecord& rec = records[i];
    if (!(rec.time > 0.0) || !std::isfinite(rec.time)) {
      throw DataError("record " + std::to_string(i) + ": time must be positive");
    }
    if (rec.event < 0 || rec.event > max_event) {
      throw DataError("record " + std::to_string(i) + ": event indicator outside alphabet");
    }
    if (static_cast<int>(rec.covariates.size()) != covariate_count()) {
      throw DataError("record " + std::to_string(i) + ": covariate count mismatch");
    }
    for (double v : rec.covariates) {
      if (!std::isfinite(v)) {
        throw DataError("record " + std::to_string(i) + ": non-finite covariate");
      }
    }
  }
  if (!true_time1.empty() && static_cast<int>(true_time1.size()) != size()) {
    throw DataError("truth column length mismatch");
  }
  if (mode == Mode::competing && !true_time1.empty() &&
      true_time2.size() != true_time1.size()) {
    throw DataError("competing truth needs both cause columns");
  }
}

Dataset simulate_noncompeting(const SimConfig& cfg) {
  validate_sim_common(cfg.n, cfg.theta, cfg.group_multiplier);
  check_positive(cfg.base_rate, "base rate");
  if (cfg.beta.empty()) throw ConfigError("beta must be non-empty");

  Rng rng(cfg.seed);
  Dataset ds;
  ds.mode = Mode::single;
  const int m = static_cast<int>(cfg.beta.size());
  for (int j = 1; j <= m + 1; ++j) ds.covariate_names.push_back("x" + std::to_string(j));
  ds.records.reserve(cfg.n);
  for (int i = 0; i < cfg.n; ++i) {
    auto [x, t] = draw_noncompeting_latent(cfg, rng);
    const double c = std::isfinite(cfg.theta)
                         ? cfg.theta * rng.uniform_pos()
                         : std::numeric_limits<double>::infinity();
    SurvivalRecord rec;
    rec.covariates = std::move(x);
    if (t <= c) {
      rec.time = t;
      rec.event = 1;
    } else {
      rec.time = c;
      rec.event = 0;
    }
    ds.records.push_back(std::move(rec));
    ds.true_time1.push_back(t);
    ds.censor_times.push_back(c);
  }
  ds.validate();
  return ds;
}

Dataset simulate_competing(const CrSimConfig& cfg) {
  validate_sim_common(cfg.n, cfg.theta, cfg.group_multiplier);
  check_positive(cfg.rate1, "rate1");
  check_positive(cfg.rate2, "rate2");
  if (cfg.beta.size() != 3) {
    throw ConfigError("competing-risks design takes exactly three beta coefficients");
  }

  Rng rng(cfg.seed);
  Dataset ds;
  ds.mode = Mode::competing;
  for (int j = 1; j <= 5; ++j) ds.covariate_names.push_back("x" + std::to_string(j));
  ds.records.reserve(cfg.n);
  for (int i = 0; i < cfg.n; ++i) {
    CompetingLatent d = draw_competing_latent(cfg, rng);
    const double c = std::isfinite(cfg.theta)
                         ? cfg.theta * rng.uniform_pos()
                         : std::numeric_limits<double>::infinity();
    SurvivalRecord rec;
    rec.covariates = std::move(d.x);
    const double tmin = std::min(d.t1, d.t2);
    if (tmin <= c) {
      rec.time = tmin;
      rec.event = d.t1 <= d.t2 ? 1 : 2;
    } else {
      rec.time = c;
      rec.event = 0;
    }
    ds.records.push_back(std::move(rec));
    ds.true_time1.push_back(d.t1);
    ds.true_time2.push_back(d.t2);
    ds.censor_times.push_back(c);
  }
  ds.validate();
  return ds;
}

double calibrate_theta(const SimConfig& cfg, double target_censoring, double tolerance) {
  validate_sim_common(2, 1.0, cfg.group_multiplier);
  check_positive(cfg.base_rate, "base rate");
  if (cfg.beta.empty()) throw ConfigError("beta must be non-empty");
  Rng rng(cfg.seed ^ kCalibrationStream);
  std::vector<double> t(kCalibrationDraws), u(kCalibrationDraws);
  for (int i = 0; i < kCalibrationDraws; ++i) {
    t[i] = draw_noncompeting_latent(cfg, rng).second;
    u[i] = rng.uniform_pos();
  }
  return calibrate_from_draws(t, u, target_censoring, tolerance);
}

double calibrate_theta(const CrSimConfig& cfg, double target_censoring, double tolerance) {
  check_positive(cfg.rate1, "rate1");
  check_positive(cfg.rate2, "rate2");
  check_positive(cfg.group_multiplier, "group multiplier");
  if (cfg.beta.size() != 3) {
    throw ConfigError("competing-risks design takes exactly three beta coefficients");
  }
  Rng rng(cfg.seed ^ kCalibrationStream);
  std::vector<double> t(kCalibrationDraws), u(kCalibrationDraws);
  for (int i = 0; i < kCalibrationDraws; ++i) {
    CompetingLatent d = draw_competing_latent(cfg, rng);
    t[i] = std::min(d.t1, d.t2);
    u[i] = rng.uniform_pos();
  }
  return calibrate_from_draws(t, u, target_censoring, tolerance);
}

Dataset load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw DataError("'" + path + "': missing header");
  const std::vector<std::string> header = split_line(chomp(line));
  int time_col = -1, event_col = -1;
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (header[j] == "time") time_col = static_cast<int>(j);
    if (header[j] == "event") event_col = static_cast<int>(j);
  }
  if (time_col < 0 || event_col < 0) {
    throw DataError("'" + path + "': header must contain 'time' and 'event' columns");
  }

  Dataset ds;
  std::vector<int> cov_cols;
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (static_cast<int>(j) != time_col && static_cast<int>(j) != event_col) {
      cov_cols.push_back(static_cast<int>(j));
      ds.covariate_names.push_back(header[j]);
    }
  }

  bool competing = false;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    line = chomp(line);
    if (line.empty() && in.peek() == std::char_traits<char>::eof()) break;
    const std::vector<std::string> cells = split_line(line);
    if (cells.size() != header.size()) {
      throw DataError("line " + std::to_string(line_no) + ": expected " +
                      std::to_string(header.size()) + " cells, got " +
                      std::to_string(cells.size()));
    }
    SurvivalRecord rec;
    rec.time = parse_double_cell(cells[time_col], line_no, "time");
    if (!(rec.time > 0.0)) {
      throw DataError("line " + std::to_string(line_no) + ": time must be positive");
    }
    const long ev = parse_int_cell(cells[event_col], line_no, "event");
    if (ev < 0 || ev > 2) {
      throw DataError("line " + std::to_string(line_no) + ": event must be 0, 1, or 2 (got " +
                      std::to_string(ev) + ")");
    }
    rec.event = static_cast<int>(ev);
    if (rec.event == 2) competing = true;
    for (int j : cov_cols) {
      rec.covariates.push_back(parse_double_cell(cells[j], line_no, "covariate"));
    }
    ds.records.push_back(std::move(rec));
  }
  ds.mode = competing ? Mode::competing : Mode::single;
  ds.validate();
  return ds;
}

void write_csv(const Dataset& ds, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open '" + path + "' for writing");
  out << "time,event";
  for (const std::string& name : ds.covariate_names) out << ',' << name;
  out << '\n';
  for (const SurvivalRecord& rec : ds.records) {
    out << format_double(rec.time) << ',' << rec.event;
    for (double v : rec.covariates) out << ',' << format_double(v);
    out << '\n';
  }
  out.flush();
  if (!out) throw DataError("write to '" + path + "' failed");
}

void write_truth_csv(const Dataset& ds, const std::string& path) {
  if (!ds.has_truth()) throw DataError("dataset carries no simulation truth");
  std::ofstream out(path);
  if (!out) throw DataError("cannot open '" + path + "' for writing");
  if (ds.mode == Mode::single) {
    out << "id,true_time\n";
    for (int i = 0; i < ds.size(); ++i) {
      out << i << ',' << format_double(ds.true_time1[i]) << '\n';
    }
  } else {
    out << "id,true_time1,true_time2\n";
    for (int i = 0; i < ds.size(); ++i) {
      out << i << ',' << format_double(ds.true_time1[i]) << ','
          << format_double(ds.true_time2[i]) << '\n';
    }
  }
  out.flush();
  if (!out) throw DataError("write to '" + path + "' failed");
}

void load_truth_csv(Dataset& ds, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw DataError("'" + path + "': missing header");
  const std::vector<std::string> header = split_line(chomp(line));
  const bool single_truth = header == std::vector<std::string>{"id", "true_time"};
  const bool competing_truth =
      header == std::vector<std::string>{"id", "true_time1", "true_time2"};
  if (!single_truth && !competing_truth) {
    throw DataError("'" + path + "': unrecognized truth header");
  }
  if (single_truth && ds.mode == Mode::competing) {
    throw DataError("truth file is single-mode but dataset mode is competing");
  }
  if (competing_truth && ds.mode == Mode::single) {
    throw DataError("truth file is competing-mode but dataset mode is single");
  }

  std::vector<double> t1, t2;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    line = chomp(line);
    if (line.empty() && in.peek() == std::char_traits<char>::eof()) break;
    const std::vector<std::string> cells = split_line(line);
    if (cells.size() != header.size()) {
      throw DataError("line " + std::to_string(line_no) + ": ragged truth row");
    }
    const long id = parse_int_cell(cells[0], line_no, "id");
    if (id != static_cast<long>(t1.size())) {
      throw DataError("line " + std::to_string(line_no) + ": ids must be 0,1,2,... in order");
    }
    t1.push_back(parse_double_cell(cells[1], line_no, "true_time"));
    if (competing_truth) t2.push_back(parse_double_cell(cells[2], line_no, "true_time"));
  }
  if (static_cast<int>(t1.size()) != ds.size()) {
    throw DataError("truth file has " + std::to_string(t1.size()) + " rows but dataset has " +
                    std::to_string(ds.size()));
  }
  ds.true_time1 = std::move(t1);
  ds.true_time2 = std::move(t2);
}

std::pair<Dataset, Dataset> split(const Dataset& ds, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw ConfigError("split fraction must lie in (0, 1)");
  }
  const int n = ds.size();
  if (n < 2) throw ConfigError("split needs at least two records");
  const long n_train = std::llround(fraction * static_cast<double>(n));
  if (n_train <= 0 || n_train >= n) {
    throw ConfigError("split fraction yields an empty train or test part");
  }
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(seed);
  rng.shuffle(perm);
  std::vector<int> train_idx(perm.begin(), perm.begin() + n_train);
  std::vector<int> test_idx(perm.begin() + n_train, perm.end());
  std::sort(train_idx.begin(), train_idx.end());
  std::sort(test_idx.begin(), test_idx.end());
  return {subset(ds, train_idx), subset(ds, test_idx)};
}

std::vector<std::vector<int>> kfold_indices(int n, int k, std::uint64_t seed) {
  if (k < 2) throw ConfigError("k-fold needs k >= 2");
  if (k > n) throw ConfigError("k-fold needs k <= n");
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(seed);
  rng.shuffle(perm);
  std::vector<std::vector<int>> folds(k);
  const int base = n / k;
  const int extra = n % k;
  int pos = 0;
  for (int f = 0; f < k; ++f) {
    const int sz = base + (f < extra ? 1 : 0);
    folds[f].assign(perm.begin() + pos, perm.begin() + pos + sz);
    std::sort(folds[f].begin(), folds[f].end());
    pos += sz;
  }
  return folds;
}

Dataset subset(const Dataset& ds, const std::vector<int>& indices) {
  Dataset out;
  out.covariate_names = ds.covariate_names;
  out.mode = ds.mode;
  for (int i : indices) {
    if (i < 0 || i >= ds.size()) throw DataError("subset index out of range");
    out.records.push_back(ds.records[i]);
    if (!ds.true_time1.empty()) out.true_time1.push_back(ds.true_time1[i]);
    if (!ds.true_time2.empty()) out.true_time2.push_back(ds.true_time2[i]);
    if (!ds.censor_times.empty()) out.censor_times.push_back(ds.censor_times[i]);
  }
  return out;
}

}  // namespace deepcent::data
