#include "deepcent/deepcent.h"

#include <algorithm>
#include <cstring>
#include <json.hpp>
#include <string>
#include <vector>

#include "deepcent/benchmark.hpp"
#include "deepcent/data.hpp"
#include "deepcent/errors.hpp"
#include "deepcent/metrics.hpp"
#include "deepcent/model.hpp"
#include "deepcent/tuning.hpp"
#include "deepcent/version.hpp"

struct dc_dataset {
  deepcent::data::Dataset impl;
};

struct dc_model {
  deepcent::model::AnyModel impl;
};

namespace {

using json = nlohmann::json;

thread_local std::string t_last_error;

template <typename Fn>
dc_status wrap(Fn&& fn) {
  try {
    fn();
    return DC_OK;
  } catch (const deepcent::ConfigError& e) {
    t_last_error = e.what();
    return DC_ERR_CONFIG;
  } catch (const deepcent::DataError& e) {
    t_last_error = e.what();
    return DC_ERR_DATA;
  } catch (const std::exception& e) {
    t_last_error = e.what();
    return DC_ERR_NUMERIC;
  }
}

void require(bool ok, const char* what) {
  if (!ok) throw deepcent::ConfigError(what);
}

deepcent::data::SimConfig to_sim_config(const dc_sim_config& c) {
  deepcent::data::SimConfig cfg;
  cfg.n = c.n;
  cfg.base_rate = c.base_rate;
  if (c.beta != nullptr) cfg.beta.assign(c.beta, c.beta + c.n_beta);
  cfg.group_multiplier = c.group_multiplier;
  cfg.theta = c.theta;
  cfg.seed = static_cast<std::uint64_t>(c.seed);
  return cfg;
}

deepcent::data::CrSimConfig to_cr_sim_config(const dc_cr_sim_config& c) {
  deepcent::data::CrSimConfig cfg;
  cfg.n = c.n;
  cfg.rate1 = c.rate1;
  cfg.rate2 = c.rate2;
  if (c.beta != nullptr) cfg.beta.assign(c.beta, c.beta + c.n_beta);
  cfg.group_multiplier = c.group_multiplier;
  cfg.theta = c.theta;
  cfg.seed = static_cast<std::uint64_t>(c.seed);
  return cfg;
}

deepcent::model::DeepCentConfig to_train_config(const dc_train_config& c) {
  deepcent::model::DeepCentConfig cfg;
  require(c.hidden != nullptr && c.n_hidden > 0, "train config needs hidden widths");
  cfg.hidden_widths.assign(c.hidden, c.hidden + c.n_hidden);
  cfg.dropout_rate = c.dropout;
  cfg.epochs = c.epochs;
  cfg.learning_rate = c.learning_rate;
  cfg.loss_params.lambda1 = c.lambda1;
  cfg.loss_params.lambda2 = c.lambda2;
  require(c.rank_loss == 0 || c.rank_loss == 1, "rank_loss must be 0 or 1");
  cfg.rank_loss = c.rank_loss == 0 ? deepcent::model::RankLossKind::cstar
                                   : deepcent::model::RankLossKind::rankdeepsurv;
  cfg.seed = static_cast<std::uint64_t>(c.seed);
  return cfg;
}

deepcent::model::CrNetConfig to_cr_train_config(const dc_cr_train_config& c) {
  deepcent::model::CrNetConfig cfg;
  require(c.shared != nullptr && c.n_shared > 0, "train config needs shared trunk widths");
  cfg.shared_widths.assign(c.shared, c.shared + c.n_shared);
  cfg.head_widths.clear();
  if (c.head != nullptr && c.n_head > 0) cfg.head_widths.assign(c.head, c.head + c.n_head);
  cfg.dropout_rate = c.dropout;
  cfg.epochs = c.epochs;
  cfg.learning_rate = c.learning_rate;
  cfg.loss_params.lambda0 = c.lambda0;
  cfg.loss_params.lambda1 = c.lambda1;
  cfg.loss_params.lambda2 = c.lambda2;
  cfg.loss_params.lambda3 = c.lambda3;
  cfg.loss_params.lambda4 = c.lambda4;
  cfg.seed = static_cast<std::uint64_t>(c.seed);
  return cfg;
}

std::vector<std::vector<int>> unflatten(const int* flat, const int* offsets, int n) {
  std::vector<std::vector<int>> out;
  for (int i = 0; i < n; ++i) {
    out.emplace_back(flat + offsets[i], flat + offsets[i + 1]);
  }
  return out;
}

deepcent::tuning::Grid to_grid(const dc_grid* grid, deepcent::data::Mode mode) {
  deepcent::tuning::Grid out = mode == deepcent::data::Mode::single
                                   ? deepcent::tuning::Grid::defaults_single()
                                   : deepcent::tuning::Grid::defaults_competing();
  if (grid == nullptr) return out;
  if (grid->hidden_flat != nullptr) {
    require(grid->hidden_offsets != nullptr, "hidden widths need offsets");
    out.hidden_widths = unflatten(grid->hidden_flat, grid->hidden_offsets, grid->n_hidden);
  }
  if (grid->shared_flat != nullptr) {
    require(grid->shared_offsets != nullptr, "shared widths need offsets");
    out.shared_widths = unflatten(grid->shared_flat, grid->shared_offsets, grid->n_shared);
  }
  if (grid->head_flat != nullptr) {
    require(grid->head_offsets != nullptr, "head widths need offsets");
    out.head_widths = unflatten(grid->head_flat, grid->head_offsets, grid->n_head);
  }
  if (grid->dropout != nullptr) out.dropout_rates.assign(grid->dropout, grid->dropout + grid->n_dropout);
  if (grid->epochs != nullptr) out.epochs.assign(grid->epochs, grid->epochs + grid->n_epochs);
  if (grid->learning_rate != nullptr) {
    out.learning_rates.assign(grid->learning_rate, grid->learning_rate + grid->n_learning_rate);
  }
  if (grid->lambda0 != nullptr) out.lambda0s.assign(grid->lambda0, grid->lambda0 + grid->n_lambda0);
  if (grid->lambda1 != nullptr) out.lambda1s.assign(grid->lambda1, grid->lambda1 + grid->n_lambda1);
  if (grid->lambda2 != nullptr) out.lambda2s.assign(grid->lambda2, grid->lambda2 + grid->n_lambda2);
  if (grid->lambda3 != nullptr) out.lambda3s.assign(grid->lambda3, grid->lambda3 + grid->n_lambda3);
  if (grid->lambda4 != nullptr) out.lambda4s.assign(grid->lambda4, grid->lambda4 + grid->n_lambda4);
  return out;
}

json widths_json(const std::vector<int>& widths) { return json(widths); }

json best_config_json(const deepcent::tuning::TuneResult& result) {
  const auto& best = result.scores[static_cast<std::size_t>(result.best)];
  json j;
  j["grid_index"] = best.grid_index;
  j["mean_cindex"] = best.mean_c_index;
  j["sd_cindex"] = best.sd_c_index;
  j["mean_loss"] = best.mean_loss;
  j["sd_loss"] = best.sd_loss;
  j["valid_folds"] = best.valid_folds;
  if (const auto* c = std::get_if<deepcent::model::DeepCentConfig>(&best.config)) {
    j["mode"] = "single";
    j["hidden"] = widths_json(c->hidden_widths);
    j["dropout"] = c->dropout_rate;
    j["epochs"] = c->epochs;
    j["learning_rate"] = c->learning_rate;
    j["lambda1"] = c->loss_params.lambda1;
    j["lambda2"] = c->loss_params.lambda2;
  } else {
    const auto& cc = std::get<deepcent::model::CrNetConfig>(best.config);
    j["mode"] = "competing";
    j["shared"] = widths_json(cc.shared_widths);
    j["head"] = widths_json(cc.head_widths);
    j["dropout"] = cc.dropout_rate;
    j["epochs"] = cc.epochs;
    j["learning_rate"] = cc.learning_rate;
    j["lambda0"] = cc.loss_params.lambda0;
    j["lambda1"] = cc.loss_params.lambda1;
    j["lambda2"] = cc.loss_params.lambda2;
    j["lambda3"] = cc.loss_params.lambda3;
    j["lambda4"] = cc.loss_params.lambda4;
  }
  return j;
}

std::vector<std::string> split_methods(const char* methods) {
  std::vector<std::string> out;
  if (methods == nullptr) return out;
  std::string current;
  for (const char* p = methods; *p != '\0'; ++p) {
    if (*p == ',') {
      if (!current.empty()) out.push_back(current);
      current.clear();
    } else {
      current += *p;
    }
  }
  if (!current.empty()) out.push_back(current);
  return out;
}

void check_model_dataset(const dc_model* model, const dc_dataset* ds) {
  const deepcent::data::Mode model_mode = deepcent::model::model_mode(model->impl);
  if (model_mode != ds->impl.mode) {
    const auto name = [](deepcent::data::Mode m) {
      return m == deepcent::data::Mode::single ? "single" : "competing";
    };
    throw deepcent::DataError(std::string("model mode is ") + name(model_mode) +
                              " but dataset mode is " + name(ds->impl.mode));
  }
}

}  // namespace

extern "C" {

const char* dc_version(void) { return deepcent::kVersion; }

const char* dc_last_error(void) { return t_last_error.c_str(); }

dc_status dc_dataset_load_csv(const char* path, dc_dataset** out) {
  return wrap([&] {
    require(path != nullptr && out != nullptr, "null argument");
    *out = new dc_dataset{deepcent::data::load_csv(path)};
  });
}

dc_status dc_dataset_save_csv(const dc_dataset* ds, const char* path) {
  return wrap([&] {
    require(ds != nullptr && path != nullptr, "null argument");
    deepcent::data::write_csv(ds->impl, path);
  });
}

dc_status dc_dataset_load_truth_csv(dc_dataset* ds, const char* path) {
  return wrap([&] {
    require(ds != nullptr && path != nullptr, "null argument");
    deepcent::data::load_truth_csv(ds->impl, path);
  });
}

dc_status dc_dataset_save_truth_csv(const dc_dataset* ds, const char* path) {
  return wrap([&] {
    require(ds != nullptr && path != nullptr, "null argument");
    deepcent::data::write_truth_csv(ds->impl, path);
  });
}

void dc_dataset_free(dc_dataset* ds) { delete ds; }

int dc_dataset_size(const dc_dataset* ds) { return ds == nullptr ? 0 : ds->impl.size(); }

int dc_dataset_covariates(const dc_dataset* ds) {
  return ds == nullptr ? 0 : ds->impl.covariate_count();
}

dc_mode dc_dataset_mode(const dc_dataset* ds) {
  return ds != nullptr && ds->impl.mode == deepcent::data::Mode::competing
             ? DC_MODE_COMPETING
             : DC_MODE_SINGLE;
}

int dc_dataset_has_truth(const dc_dataset* ds) {
  return ds != nullptr && ds->impl.has_truth() ? 1 : 0;
}

dc_status dc_dataset_split(const dc_dataset* ds, double fraction, long long seed,
                           dc_dataset** train, dc_dataset** test) {
  return wrap([&] {
    require(ds != nullptr && train != nullptr && test != nullptr, "null argument");
    auto [tr, te] =
        deepcent::data::split(ds->impl, fraction, static_cast<std::uint64_t>(seed));
    *train = new dc_dataset{std::move(tr)};
    *test = new dc_dataset{std::move(te)};
  });
}

dc_status dc_simulate_single(const dc_sim_config* config, dc_dataset** out) {
  return wrap([&] {
    require(config != nullptr && out != nullptr, "null argument");
    *out = new dc_dataset{deepcent::data::simulate_noncompeting(to_sim_config(*config))};
  });
}

dc_status dc_simulate_competing(const dc_cr_sim_config* config, dc_dataset** out) {
  return wrap([&] {
    require(config != nullptr && out != nullptr, "null argument");
    *out = new dc_dataset{deepcent::data::simulate_competing(to_cr_sim_config(*config))};
  });
}

dc_status dc_calibrate_theta_single(const dc_sim_config* config, double target,
                                    double tolerance, double* theta_out) {
  return wrap([&] {
    require(config != nullptr && theta_out != nullptr, "null argument");
    *theta_out = deepcent::data::calibrate_theta(to_sim_config(*config), target, tolerance);
  });
}

dc_status dc_calibrate_theta_competing(const dc_cr_sim_config* config, double target,
                                       double tolerance, double* theta_out) {
  return wrap([&] {
    require(config != nullptr && theta_out != nullptr, "null argument");
    *theta_out =
        deepcent::data::calibrate_theta(to_cr_sim_config(*config), target, tolerance);
  });
}

dc_status dc_train_single(const dc_dataset* ds, const dc_train_config* config,
                          dc_model** out) {
  return wrap([&] {
    require(ds != nullptr && config != nullptr && out != nullptr, "null argument");
    *out = new dc_model{deepcent::model::train_single(ds->impl, to_train_config(*config))};
  });
}

dc_status dc_train_competing(const dc_dataset* ds, const dc_cr_train_config* config,
                             dc_model** out) {
  return wrap([&] {
    require(ds != nullptr && config != nullptr && out != nullptr, "null argument");
    *out =
        new dc_model{deepcent::model::train_competing(ds->impl, to_cr_train_config(*config))};
  });
}

dc_status dc_model_save(const dc_model* model, const char* path) {
  return wrap([&] {
    require(model != nullptr && path != nullptr, "null argument");
    deepcent::model::save_model(model->impl, path);
  });
}

dc_status dc_model_load(const char* path, dc_model** out) {
  return wrap([&] {
    require(path != nullptr && out != nullptr, "null argument");
    *out = new dc_model{deepcent::model::load_model(path)};
  });
}

void dc_model_free(dc_model* model) { delete model; }

dc_mode dc_model_mode(const dc_model* model) {
  return model != nullptr &&
                 deepcent::model::model_mode(model->impl) == deepcent::data::Mode::competing
             ? DC_MODE_COMPETING
             : DC_MODE_SINGLE;
}

dc_status dc_model_loss_trace(const dc_model* model, double* out, int cap, int* n_out) {
  return wrap([&] {
    require(model != nullptr && n_out != nullptr, "null argument");
    const std::vector<double>& trace =
        std::holds_alternative<deepcent::model::SingleModel>(model->impl)
            ? std::get<deepcent::model::SingleModel>(model->impl).loss_trace
            : std::get<deepcent::model::CompetingModel>(model->impl).loss_trace;
    *n_out = static_cast<int>(trace.size());
    if (out != nullptr) {
      const int n = std::min<int>(cap, static_cast<int>(trace.size()));
      std::memcpy(out, trace.data(), sizeof(double) * static_cast<std::size_t>(n));
    }
  });
}

dc_status dc_predict(const dc_model* model, const dc_dataset* ds, double* yhat1,
                     double* yhat2) {
  return wrap([&] {
    require(model != nullptr && ds != nullptr && yhat1 != nullptr, "null argument");
    check_model_dataset(model, ds);
    const Eigen::MatrixXd X = ds->impl.covariate_matrix();
    if (const auto* single = std::get_if<deepcent::model::SingleModel>(&model->impl)) {
      require(yhat2 == nullptr, "single-risk models produce one prediction column");
      const Eigen::VectorXd pred = deepcent::model::predict(*single, X);
      std::memcpy(yhat1, pred.data(), sizeof(double) * static_cast<std::size_t>(pred.size()));
    } else {
      require(yhat2 != nullptr, "competing models produce two prediction columns");
      const auto& competing = std::get<deepcent::model::CompetingModel>(model->impl);
      const auto [p1, p2] = deepcent::model::predict_competing(competing, X);
      std::memcpy(yhat1, p1.data(), sizeof(double) * static_cast<std::size_t>(p1.size()));
      std::memcpy(yhat2, p2.data(), sizeof(double) * static_cast<std::size_t>(p2.size()));
    }
  });
}

dc_status dc_predict_interval(const dc_model* model, const dc_dataset* ds, int n_draws,
                              double alpha, long long seed, double* lower1, double* upper1,
                              double* lower2, double* upper2) {
  return wrap([&] {
    require(model != nullptr && ds != nullptr && lower1 != nullptr && upper1 != nullptr,
            "null argument");
    check_model_dataset(model, ds);
    const Eigen::MatrixXd X = ds->impl.covariate_matrix();
    if (const auto* single = std::get_if<deepcent::model::SingleModel>(&model->impl)) {
      require(lower2 == nullptr && upper2 == nullptr,
              "single-risk models produce one interval pair");
      for (int i = 0; i < X.rows(); ++i) {
        const auto interval = deepcent::model::mc_dropout_interval(
            *single, X.row(i).transpose(), n_draws, alpha,
            static_cast<std::uint64_t>(seed) + static_cast<std::uint64_t>(i));
        lower1[i] = interval.lower;
        upper1[i] = interval.upper;
      }
    } else {
      require(lower2 != nullptr && upper2 != nullptr,
              "competing models produce two interval pairs");
      const auto& competing = std::get<deepcent::model::CompetingModel>(model->impl);
      for (int i = 0; i < X.rows(); ++i) {
        const auto [i1, i2] = deepcent::model::mc_dropout_interval(
            competing, X.row(i).transpose(), n_draws, alpha,
            static_cast<std::uint64_t>(seed) + static_cast<std::uint64_t>(i));
        lower1[i] = i1.lower;
        upper1[i] = i1.upper;
        lower2[i] = i2.lower;
        upper2[i] = i2.upper;
      }
    }
  });
}

dc_status dc_evaluate(const dc_dataset* ds, const double* yhat1, const double* yhat2,
                      dc_eval_report* out) {
  return wrap([&] {
    require(ds != nullptr && yhat1 != nullptr && out != nullptr, "null argument");
    const int n = ds->impl.size();
    const Eigen::VectorXd p1 = Eigen::Map<const Eigen::VectorXd>(yhat1, n);
    Eigen::VectorXd p2;
    if (yhat2 != nullptr) p2 = Eigen::Map<const Eigen::VectorXd>(yhat2, n);
    const deepcent::metrics::EvalReport report =
        deepcent::metrics::evaluate(ds->impl, p1, yhat2 != nullptr ? &p2 : nullptr);
    std::memset(out, 0, sizeof(*out));
    out->n = report.n;
    out->mse_uses_truth = report.mse_from_truth ? 1 : 0;
    for (std::size_t c = 0; c < report.causes.size(); ++c) {
      const auto& cause = report.causes[c];
      out->c_index_defined[c] = cause.c_index.has_value();
      out->c_index[c] = cause.c_index.value_or(0.0);
      out->mse_defined[c] = cause.mse.has_value();
      out->mse[c] = cause.mse.value_or(0.0);
      out->comparable_pairs[c] = cause.comparable_pairs;
      out->events[c] = cause.events;
    }
  });
}

long long dc_tune_grid_size(const dc_grid* grid, dc_mode mode) {
  try {
    const deepcent::data::Mode m = mode == DC_MODE_COMPETING
                                       ? deepcent::data::Mode::competing
                                       : deepcent::data::Mode::single;
    return static_cast<long long>(to_grid(grid, m).cartesian_size(m));
  } catch (const std::exception& e) {
    t_last_error = e.what();
    return -1;
  }
}

dc_status dc_tune(const dc_dataset* ds, const dc_grid* grid, int k, long long seed,
                  int budget, const char* report_csv_path, char* best_json, size_t cap) {
  return wrap([&] {
    require(ds != nullptr && report_csv_path != nullptr, "null argument");
    const deepcent::tuning::Grid g = to_grid(grid, ds->impl.mode);
    const deepcent::tuning::TuneResult result = deepcent::tuning::grid_search_cv(
        ds->impl, g, k, static_cast<std::uint64_t>(seed), budget);
    deepcent::tuning::write_tuning_csv(result, ds->impl.mode, report_csv_path);
    if (best_json != nullptr && cap > 0) {
      const std::string text = best_config_json(result).dump();
      std::strncpy(best_json, text.c_str(), cap - 1);
      best_json[cap - 1] = '\0';
    }
  });
}

dc_status dc_benchmark(const dc_benchmark_config* config, const char* out_csv_path) {
  return wrap([&] {
    require(config != nullptr && out_csv_path != nullptr, "null argument");
    deepcent::bench::BenchmarkConfig cfg;
    cfg.mode = config->mode == DC_MODE_COMPETING ? deepcent::data::Mode::competing
                                                 : deepcent::data::Mode::single;
    cfg.n = config->n;
    cfg.censoring = config->censoring;
    cfg.replicates = config->replicates;
    cfg.seed = static_cast<std::uint64_t>(config->seed);
    cfg.methods = split_methods(config->methods);
    deepcent::bench::write_benchmark_csv(deepcent::bench::run_benchmark(cfg), out_csv_path);
  });
}

}  // extern "C"
