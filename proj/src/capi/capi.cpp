#include "genrel/genrel.h"

#include <cstring>
#include <string>

#include "core/config.hpp"
#include "core/errors.hpp"
#include "core/estimators.hpp"
#include "core/report_io.hpp"
#include "core/simulation.hpp"
#include "core/rng.hpp"
#include "core/table_io.hpp"

namespace {

thread_local std::string g_last_error;

genrel_status status_from(genrel::ErrorCode code) {
  using genrel::ErrorCode;
  switch (code) {
    case ErrorCode::ok: return GENREL_OK;
    case ErrorCode::invalid_argument: return GENREL_ERR_INVALID_ARGUMENT;
    case ErrorCode::empty_dataset: return GENREL_ERR_EMPTY_DATASET;
    case ErrorCode::ragged_rows: return GENREL_ERR_RAGGED_ROWS;
    case ErrorCode::no_trait_observed: return GENREL_ERR_NO_TRAIT_OBSERVED;
    case ErrorCode::non_finite_value: return GENREL_ERR_NON_FINITE_VALUE;
    case ErrorCode::too_few_observations: return GENREL_ERR_TOO_FEW_OBSERVATIONS;
    case ErrorCode::mismatched_plan: return GENREL_ERR_MISMATCHED_PLAN;
    case ErrorCode::fold_leakage: return GENREL_ERR_FOLD_LEAKAGE;
    case ErrorCode::empty_fold: return GENREL_ERR_EMPTY_FOLD;
    case ErrorCode::degenerate_response: return GENREL_ERR_DEGENERATE_RESPONSE;
    case ErrorCode::too_few_rows: return GENREL_ERR_TOO_FEW_ROWS;
    case ErrorCode::singular_system: return GENREL_ERR_SINGULAR_SYSTEM;
    case ErrorCode::non_finite_loss: return GENREL_ERR_NON_FINITE_LOSS;
    case ErrorCode::dimension_mismatch: return GENREL_ERR_DIMENSION_MISMATCH;
    case ErrorCode::non_positive_genetic_variance:
      return GENREL_ERR_NON_POSITIVE_GENETIC_VARIANCE;
    case ErrorCode::degenerate_variance: return GENREL_ERR_DEGENERATE_VARIANCE;
    case ErrorCode::out_of_range: return GENREL_ERR_OUT_OF_RANGE;
    case ErrorCode::bad_spec: return GENREL_ERR_BAD_SPEC;
    case ErrorCode::header_mismatch: return GENREL_ERR_HEADER_MISMATCH;
    case ErrorCode::inconsistent_indicator: return GENREL_ERR_INCONSISTENT_INDICATOR;
    case ErrorCode::non_numeric_cell: return GENREL_ERR_NON_NUMERIC_CELL;
    case ErrorCode::config_error: return GENREL_ERR_CONFIG;
    case ErrorCode::io_error: return GENREL_ERR_IO;
    case ErrorCode::serialization_invariant: return GENREL_ERR_SERIALIZATION_INVARIANT;
    case ErrorCode::all_replications_failed: return GENREL_ERR_ALL_REPLICATIONS_FAILED;
    case ErrorCode::unsupported: return GENREL_ERR_UNSUPPORTED;
    case ErrorCode::internal: return GENREL_ERR_INTERNAL;
  }
  return GENREL_ERR_INTERNAL;
}

template <typename Fn>
genrel_status guarded(Fn&& fn) {
  try {
    fn();
    return GENREL_OK;
  } catch (const genrel::Error& e) {
    g_last_error = e.what();
    return status_from(e.code());
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return GENREL_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return GENREL_ERR_INTERNAL;
  }
}

genrel_status require(bool ok, const char* message) {
  if (ok) return GENREL_OK;
  g_last_error = message;
  return GENREL_ERR_INVALID_ARGUMENT;
}

}  // namespace

struct genrel_dataset {
  genrel::Dataset data;
};

struct genrel_options {
  genrel::RunConfig config;
};

struct genrel_report {
  genrel::EstimateReport report;
  std::string summary;
};

struct genrel_mc_table {
  genrel::MonteCarloTable table;
  std::string text;
};

extern "C" {

const char* genrel_version(void) { return GENREL_VERSION_STRING; }

const char* genrel_status_name(genrel_status status) {
  switch (status) {
    case GENREL_OK: return "Ok";
    case GENREL_ERR_INVALID_ARGUMENT: return "InvalidArgument";
    case GENREL_ERR_EMPTY_DATASET: return "EmptyDataset";
    case GENREL_ERR_RAGGED_ROWS: return "RaggedRows";
    case GENREL_ERR_NO_TRAIT_OBSERVED: return "NoTraitObserved";
    case GENREL_ERR_NON_FINITE_VALUE: return "NonFiniteValue";
    case GENREL_ERR_TOO_FEW_OBSERVATIONS: return "TooFewObservations";
    case GENREL_ERR_MISMATCHED_PLAN: return "MismatchedPlan";
    case GENREL_ERR_FOLD_LEAKAGE: return "FoldLeakage";
    case GENREL_ERR_EMPTY_FOLD: return "EmptyFold";
    case GENREL_ERR_DEGENERATE_RESPONSE: return "DegenerateResponse";
    case GENREL_ERR_TOO_FEW_ROWS: return "TooFewRows";
    case GENREL_ERR_SINGULAR_SYSTEM: return "SingularSystem";
    case GENREL_ERR_NON_FINITE_LOSS: return "NonFiniteLoss";
    case GENREL_ERR_DIMENSION_MISMATCH: return "DimensionMismatch";
    case GENREL_ERR_NON_POSITIVE_GENETIC_VARIANCE: return "NonPositiveGeneticVariance";
    case GENREL_ERR_DEGENERATE_VARIANCE: return "DegenerateVariance";
    case GENREL_ERR_OUT_OF_RANGE: return "OutOfRange";
    case GENREL_ERR_BAD_SPEC: return "BadSpec";
    case GENREL_ERR_HEADER_MISMATCH: return "HeaderMismatch";
    case GENREL_ERR_INCONSISTENT_INDICATOR: return "InconsistentIndicator";
    case GENREL_ERR_NON_NUMERIC_CELL: return "NonNumericCell";
    case GENREL_ERR_CONFIG: return "ConfigError";
    case GENREL_ERR_IO: return "IoError";
    case GENREL_ERR_SERIALIZATION_INVARIANT: return "SerializationInvariant";
    case GENREL_ERR_ALL_REPLICATIONS_FAILED: return "AllReplicationsFailed";
    case GENREL_ERR_UNSUPPORTED: return "Unsupported";
    case GENREL_ERR_INTERNAL: return "InternalError";
  }
  return "UnknownError";
}

const char* genrel_last_error(void) { return g_last_error.c_str(); }

genrel_status genrel_dataset_create(const double* x, int64_t n, int64_t p,
                                    const double* y, const uint8_t* t_y,
                                    const double* z, const uint8_t* t_z,
                                    genrel_dataset** out) {
  if (auto s = require(x && out && n > 0 && p > 0, "need x, out, n > 0, p > 0")) return s;
  return guarded([&] {
    Eigen::MatrixXd xm(n, p);
    for (int64_t i = 0; i < n; ++i) {
      for (int64_t j = 0; j < p; ++j) xm(i, j) = x[i * p + j];
    }
    Eigen::VectorXd yv = Eigen::VectorXd::Zero(n), zv = Eigen::VectorXd::Zero(n);
    std::vector<std::uint8_t> ty(static_cast<std::size_t>(n), 0),
        tz(static_cast<std::size_t>(n), 0);
    for (int64_t i = 0; i < n; ++i) {
      if (y) {
        ty[static_cast<std::size_t>(i)] = t_y ? t_y[i] : 1;
        if (ty[static_cast<std::size_t>(i)]) yv(i) = y[i];
      }
      if (z) {
        tz[static_cast<std::size_t>(i)] = t_z ? t_z[i] : 1;
        if (tz[static_cast<std::size_t>(i)]) zv(i) = z[i];
      }
    }
    *out = new genrel_dataset{genrel::Dataset(std::move(xm), std::move(yv), std::move(zv),
                                              std::move(ty), std::move(tz))};
  });
}

genrel_status genrel_dataset_from_csv(const char* path, genrel_dataset** out) {
  if (auto s = require(path && out, "need path and out")) return s;
  return guarded([&] { *out = new genrel_dataset{genrel::read_table(path)}; });
}

void genrel_dataset_free(genrel_dataset* dataset) { delete dataset; }

int64_t genrel_dataset_rows(const genrel_dataset* d) { return d ? d->data.rows() : 0; }
int64_t genrel_dataset_cols(const genrel_dataset* d) { return d ? d->data.cols() : 0; }
int64_t genrel_dataset_count_y(const genrel_dataset* d) { return d ? d->data.count_y() : 0; }
int64_t genrel_dataset_count_z(const genrel_dataset* d) { return d ? d->data.count_z() : 0; }
int64_t genrel_dataset_count_overlap(const genrel_dataset* d) {
  return d ? d->data.count_overlap() : 0;
}

genrel_status genrel_options_create(genrel_options** out) {
  if (auto s = require(out != nullptr, "need out")) return s;
  return guarded([&] { *out = new genrel_options{}; });
}

void genrel_options_free(genrel_options* options) { delete options; }

genrel_status genrel_options_load(genrel_options* options, const char* path_or_preset) {
  if (auto s = require(options && path_or_preset, "need options and path")) return s;
  return guarded([&] { genrel::load_config_or_preset(options->config, path_or_preset); });
}

genrel_status genrel_options_set(genrel_options* options, const char* dotted_key,
                                 const char* value) {
  if (auto s = require(options && dotted_key && value, "need options, key, value")) return s;
  return guarded([&] { genrel::set_config_key(options->config, dotted_key, value); });
}

const char* genrel_options_out_path(const genrel_options* options) {
  if (!options || !options->config.out_path) return nullptr;
  return options->config.out_path->c_str();
}

genrel_status genrel_load_data(const genrel_options* options, genrel_dataset** out) {
  if (auto s = require(options && out, "need options and out")) return s;
  return guarded([&] {
    const genrel::RunConfig& c = options->config;
    if (c.data_path) {
      *out = new genrel_dataset{genrel::read_table(*c.data_path)};
    } else if (c.dgp) {
      *out = new genrel_dataset{genrel::generate(*c.dgp, genrel::mix_seed(c.seed, 0x0D))};
    } else {
      genrel::raise(genrel::ErrorCode::config_error,
                    "no data source: set data.path or a [data] DGP");
    }
  });
}

genrel_status genrel_estimate(const genrel_dataset* dataset, const genrel_options* options,
                              genrel_report** out) {
  if (auto s = require(dataset && options && out, "need dataset, options, out")) return s;
  return guarded([&] {
    const genrel::RunConfig& c = options->config;
    genrel::EstimateOptions opts;
    opts.learner_m = c.learner_m;
    opts.learner_h = c.learner_h;
    if (opts.learner_m.kind == genrel::LearnerKind::oracle && !opts.learner_m.oracle_fn) {
      if (!c.dgp) genrel::raise(genrel::ErrorCode::unsupported,
                                "oracle learner needs a DGP data source");
      opts.learner_m.oracle_fn = genrel::true_m(*c.dgp);
    }
    if (opts.learner_h.kind == genrel::LearnerKind::oracle && !opts.learner_h.oracle_fn) {
      if (!c.dgp) genrel::raise(genrel::ErrorCode::unsupported,
                                "oracle learner needs a DGP data source");
      opts.learner_h.oracle_fn = genrel::true_h(*c.dgp);
    }
    opts.g1 = c.g1;
    opts.g2 = c.g2;
    opts.alpha = c.alpha;
    opts.seed = c.seed;
    opts.variance_variant = c.variance_variant;
    genrel::EstimateReport report = c.target == genrel::Target::covariance
                                        ? genrel::estimate_covariance(dataset->data, opts)
                                        : genrel::estimate_correlation(dataset->data, opts);
    auto* handle = new genrel_report{std::move(report), {}};
    handle->summary = genrel::summary_line(handle->report);
    *out = handle;
  });
}

genrel_status genrel_estimate_point(const genrel_dataset* dataset,
                                    const genrel_options* options, const char* method,
                                    double* out) {
  if (auto s = require(dataset && options && method && out,
                       "need dataset, options, method, out")) {
    return s;
  }
  return guarded([&] {
    const genrel::RunConfig& c = options->config;
    const std::string name = method;
    if (name == "fullsample") {
      *out = genrel::estimate_covariance_fullsample(dataset->data, c.learner_m, c.learner_h,
                                                    c.seed);
    } else if (name == "naive") {
      *out = genrel::estimate_covariance_naive(dataset->data, c.learner_m, c.learner_h,
                                               c.seed);
    } else {
      genrel::raise(genrel::ErrorCode::invalid_argument,
                    "method must be fullsample or naive");
    }
  });
}

void genrel_report_free(genrel_report* report) { delete report; }

double genrel_report_point(const genrel_report* r) { return r->report.point; }
double genrel_report_se(const genrel_report* r) { return r->report.se; }
double genrel_report_ci_lower(const genrel_report* r) { return r->report.ci_lower; }
double genrel_report_ci_upper(const genrel_report* r) { return r->report.ci_upper; }
double genrel_report_alpha(const genrel_report* r) { return r->report.alpha; }
const char* genrel_report_summary(const genrel_report* r) { return r->summary.c_str(); }

genrel_status genrel_report_write(const genrel_report* report, const char* path) {
  if (auto s = require(report && path, "need report and path")) return s;
  return guarded([&] { genrel::write_report(genrel::report_items(report->report), path); });
}

genrel_status genrel_simulate(const genrel_options* options, genrel_mc_table** out) {
  if (auto s = require(options && out, "need options and out")) return s;
  return guarded([&] {
    const genrel::RunConfig& c = options->config;
    if (!c.dgp) genrel::raise(genrel::ErrorCode::config_error,
                              "simulate needs a [data] source = exN_... DGP");
    genrel::MonteCarloTable table = genrel::run_monte_carlo(
        *c.dgp, genrel::estimator_config(c), c.reps, c.alpha, c.seed);
    auto* handle = new genrel_mc_table{std::move(table), {}};
    handle->text = genrel::render_table(handle->table);
    *out = handle;
  });
}

void genrel_mc_table_free(genrel_mc_table* table) { delete table; }

double genrel_mc_table_cp(const genrel_mc_table* t) { return t->table.has_ci ? t->table.cp : -1.0; }
double genrel_mc_table_bias(const genrel_mc_table* t) { return t->table.bias; }
double genrel_mc_table_rbias(const genrel_mc_table* t) {
  return t->table.has_rbias ? t->table.rbias : -1.0;
}
double genrel_mc_table_len(const genrel_mc_table* t) {
  return t->table.has_ci ? t->table.len : -1.0;
}
double genrel_mc_table_se(const genrel_mc_table* t) {
  return t->table.has_ci ? t->table.se_mean : -1.0;
}
double genrel_mc_table_mc_sd(const genrel_mc_table* t) { return t->table.mc_sd; }
double genrel_mc_table_truth(const genrel_mc_table* t) { return t->table.truth; }
int64_t genrel_mc_table_reps(const genrel_mc_table* t) { return t->table.reps; }
int64_t genrel_mc_table_failures(const genrel_mc_table* t) { return t->table.failures; }
const char* genrel_mc_table_text(const genrel_mc_table* t) { return t->text.c_str(); }

genrel_status genrel_mc_table_write(const genrel_mc_table* table, const char* path) {
  if (auto s = require(table && path, "need table and path")) return s;
  return guarded([&] { genrel::write_report(genrel::report_items(table->table), path); });
}

genrel_status genrel_oracle(const genrel_options* options, int64_t draws, double* truth,
                            double* mc_se) {
  if (auto s = require(options && truth && mc_se, "need options, truth, mc_se")) return s;
  return guarded([&] {
    const genrel::RunConfig& c = options->config;
    if (!c.dgp) genrel::raise(genrel::ErrorCode::config_error,
                              "oracle needs a [data] source = exN_... DGP");
    const long n_draws = draws > 0 ? static_cast<long>(draws) : c.draws;
    const genrel::OracleEstimate est =
        genrel::true_value_oracle(*c.dgp, c.target, n_draws, c.seed);
    *truth = est.value;
    *mc_se = est.mc_se;
  });
}

}  // extern "C"
