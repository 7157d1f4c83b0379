#include "core/simulation.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <memory>
#include <mutex>
#include <numbers>
#include <sstream>
#include <vector>

#include "core/errors.hpp"
#include "core/parallel.hpp"
#include "core/rng.hpp"

namespace genrel {

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

constexpr double kArCoefficient = 0.6;
constexpr long kEx3TruthDraws = 10'000'000;
constexpr std::uint64_t kEx3TruthSeed = 0x657833ULL;

double sigmoid(double t) { return 1.0 / (1.0 + std::exp(-t)); }

double sigma_entry(long i, long j, bool identity) {
  if (identity) return i == j ? 1.0 : 0.0;
  return std::pow(kArCoefficient, std::abs(i - j));
}

// Exact Cholesky factor of the AR(0.6) covariance, cached per dimension.
std::shared_ptr<const MatrixXd> cholesky_factor(long p, bool identity) {
  static std::mutex mutex;
  static std::map<std::pair<long, bool>, std::shared_ptr<const MatrixXd>> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find({p, identity});
  if (it != cache.end()) return it->second;

  MatrixXd sigma(p, p);
  for (long i = 0; i < p; ++i) {
    for (long j = 0; j < p; ++j) sigma(i, j) = sigma_entry(i, j, identity);
  }
  auto factor = std::make_shared<MatrixXd>(Eigen::LLT<MatrixXd>(sigma).matrixL());
  cache.insert({{p, identity}, factor});
  return factor;
}

struct Coefficients {
  VectorXd beta, gamma;
};

Coefficients coefficients_for(const DgpSpec& spec) {
  Coefficients c;
  c.beta = VectorXd::Zero(spec.p);
  c.gamma = VectorXd::Zero(spec.p);
  switch (spec.example) {
    case ExampleDgp::ex1_linear_cov:
      for (long j = 1; j <= spec.s1; ++j) {
        c.beta(j - 1) = 0.4 * (1.0 + static_cast<double>(j) / (2.0 * spec.s1));
      }
      for (long j = 1; j <= spec.s2; ++j) {
        c.gamma(j - 1) = 0.3 * (1.0 - static_cast<double>(j) / (2.0 * spec.s2));
      }
      break;
    case ExampleDgp::ex2_linear_corr:
      for (long j = 1; j <= spec.s1; ++j) {
        c.beta(j - 1) = 1.0 + static_cast<double>(j) / (2.0 * spec.s1);
      }
      // gamma lives on the next s2 coordinates, decreasing from 2 along its
      // own support
      for (long k = 1; k <= spec.s2; ++k) {
        c.gamma(spec.s1 + k - 1) = 2.0 * (1.0 - static_cast<double>(k) / (2.0 * spec.s2));
      }
      break;
    case ExampleDgp::ex4_logistic:
      for (long j = 1; j <= spec.s1; ++j) {
        c.beta(j - 1) = 0.2 * (1.0 + static_cast<double>(j) / (2.0 * spec.s1));
      }
      for (long j = 1; j <= spec.s2; ++j) {
        c.gamma(j - 1) = 0.3 * (1.0 - static_cast<double>(j) / (2.0 * spec.s2));
      }
      break;
    case ExampleDgp::ex3_nonlinear:
      break;
  }
  return c;
}

void validate(const DgpSpec& spec) {
  if (spec.p < 1) raise(ErrorCode::bad_spec, "p must be >= 1");
  if (spec.n_y < 1 || spec.n_z < 1) raise(ErrorCode::bad_spec, "n_y and n_z must be >= 1");
  if (spec.s1 < 0 || spec.s2 < 0) raise(ErrorCode::bad_spec, "sparsity must be >= 0");
  switch (spec.example) {
    case ExampleDgp::ex1_linear_cov:
    case ExampleDgp::ex4_logistic:
      if (spec.s1 > spec.p || spec.s2 > spec.p) {
        raise(ErrorCode::bad_spec, "sparsity exceeds dimension");
      }
      break;
    case ExampleDgp::ex2_linear_corr:
      if (spec.s1 + spec.s2 > spec.p) {
        raise(ErrorCode::bad_spec, "s1 + s2 must not exceed p");
      }
      if (spec.s1 < 1 || spec.s2 < 1) {
        raise(ErrorCode::bad_spec, "the correlation example needs s1 >= 1 and s2 >= 1");
      }
      break;
    case ExampleDgp::ex3_nonlinear:
      if (spec.p < 6) raise(ErrorCode::bad_spec, "the nonlinear example needs p >= 6");
      break;
  }
  if (spec.overlap == Overlap::full && spec.n_y != spec.n_z) {
    raise(ErrorCode::bad_spec, "full overlap draws one sample, so n_y must equal n_z");
  }
}

double ex3_m(Eigen::Ref<const Eigen::RowVectorXd> x) {
  return -5.0 + 2.0 * std::sin(std::numbers::pi * x(0) * x(1)) +
         4.0 * (x(2) - 0.5) * (x(2) - 0.5) + 2.0 * x(4) + x(5);
}

double ex3_h(Eigen::Ref<const Eigen::RowVectorXd> x) {
  return 3.0 * std::sin(x(0)) + x(2) * x(2) * x(2) + std::exp(x(3));
}

double quad_form(const VectorXd& a, const VectorXd& b, bool identity) {
  double total = 0.0;
  for (long i = 0; i < a.size(); ++i) {
    if (a(i) == 0.0) continue;
    for (long j = 0; j < b.size(); ++j) {
      if (b(j) == 0.0) continue;
      total += a(i) * sigma_entry(i, j, identity) * b(j);
    }
  }
  return total;
}

// Minimal predictor dimension whose marginal law determines m and h.
long oracle_dims(const DgpSpec& spec) {
  switch (spec.example) {
    case ExampleDgp::ex3_nonlinear:
      return 6;
    case ExampleDgp::ex2_linear_corr:
      return std::max<long>(1, spec.s1 + spec.s2);
    default:
      return std::max<long>(1, std::max(spec.s1, spec.s2));
  }
}

struct CachedTruth {
  double covariance = 0.0, rho = 0.0;
  double cov_se = 0.0, rho_se = 0.0;
};

CachedTruth ex3_cached_truth() {
  static std::once_flag once;
  static CachedTruth cached;
  std::call_once(once, [] {
    DgpSpec probe;
    probe.example = ExampleDgp::ex3_nonlinear;
    probe.p = 6;
    probe.n_y = probe.n_z = 1;
    const OracleEstimate cov =
        true_value_oracle(probe, Target::covariance, kEx3TruthDraws, kEx3TruthSeed);
    const OracleEstimate rho =
        true_value_oracle(probe, Target::correlation, kEx3TruthDraws, kEx3TruthSeed);
    cached = {cov.value, rho.value, cov.mc_se, rho.mc_se};
  });
  return cached;
}

}  // namespace

const char* example_name(ExampleDgp e) {
  switch (e) {
    case ExampleDgp::ex1_linear_cov: return "ex1_linear_cov";
    case ExampleDgp::ex2_linear_corr: return "ex2_linear_corr";
    case ExampleDgp::ex3_nonlinear: return "ex3_nonlinear";
    case ExampleDgp::ex4_logistic: return "ex4_logistic";
  }
  return "?";
}

const char* overlap_name(Overlap o) { return o == Overlap::full ? "full" : "none"; }

ExampleDgp example_from_name(const std::string& name) {
  if (name == "ex1_linear_cov") return ExampleDgp::ex1_linear_cov;
  if (name == "ex2_linear_corr") return ExampleDgp::ex2_linear_corr;
  if (name == "ex3_nonlinear") return ExampleDgp::ex3_nonlinear;
  if (name == "ex4_logistic") return ExampleDgp::ex4_logistic;
  raise(ErrorCode::config_error, "unknown example '" + name + "'");
}

std::string DgpSpec::describe() const {
  std::ostringstream out;
  out << example_name(example) << "(n_y=" << n_y << ",n_z=" << n_z << ",p=" << p
      << ",s1=" << s1 << ",s2=" << s2 << ",overlap=" << overlap_name(overlap);
  if (identity_sigma) out << ",sigma=identity";
  out << ")";
  return out.str();
}

const char* method_name(Method m) {
  switch (m) {
    case Method::crossfit: return "crossfit";
    case Method::fullsample: return "fullsample";
    case Method::naive: return "naive";
  }
  return "?";
}

Dataset generate(const DgpSpec& spec, std::uint64_t seed) {
  validate(spec);
  Rng rng(mix_seed(seed, 0xDA7AULL));
  const auto factor = cholesky_factor(spec.p, spec.identity_sigma);
  const Coefficients coef = coefficients_for(spec);

  const long rows = spec.overlap == Overlap::full ? spec.n_y : spec.n_y + spec.n_z;
  MatrixXd x(rows, spec.p);
  VectorXd y = VectorXd::Zero(rows), z = VectorXd::Zero(rows);
  std::vector<std::uint8_t> t_y(static_cast<std::size_t>(rows), 0),
      t_z(static_cast<std::size_t>(rows), 0);

  VectorXd standard(spec.p);
  for (long i = 0; i < rows; ++i) {
    for (long j = 0; j < spec.p; ++j) standard(j) = rng.normal();
    if (spec.identity_sigma) {
      x.row(i) = standard.transpose();
    } else {
      x.row(i) = ((*factor) * standard).transpose();
    }

    const bool want_y = spec.overlap == Overlap::full || i < spec.n_y;
    const bool want_z = spec.overlap == Overlap::full || i >= spec.n_y;
    switch (spec.example) {
      case ExampleDgp::ex1_linear_cov:
      case ExampleDgp::ex2_linear_corr:
        if (want_y) y(i) = x.row(i).dot(coef.beta) + rng.normal();
        if (want_z) z(i) = x.row(i).dot(coef.gamma) + rng.normal();
        break;
      case ExampleDgp::ex3_nonlinear:
        if (want_y) y(i) = ex3_m(x.row(i)) + rng.normal();
        if (want_z) z(i) = ex3_h(x.row(i)) + rng.normal();
        break;
      case ExampleDgp::ex4_logistic:
        if (want_y) y(i) = rng.bernoulli(sigmoid(x.row(i).dot(coef.beta))) ? 1.0 : 0.0;
        if (want_z) z(i) = rng.bernoulli(sigmoid(x.row(i).dot(coef.gamma))) ? 1.0 : 0.0;
        break;
    }
    t_y[static_cast<std::size_t>(i)] = want_y ? 1 : 0;
    t_z[static_cast<std::size_t>(i)] = want_z ? 1 : 0;
  }
  return Dataset(std::move(x), std::move(y), std::move(z), std::move(t_y), std::move(t_z));
}

OracleFn true_m(const DgpSpec& spec) {
  validate(spec);
  switch (spec.example) {
    case ExampleDgp::ex3_nonlinear:
      return [](Eigen::Ref<const Eigen::RowVectorXd> x) { return ex3_m(x); };
    case ExampleDgp::ex4_logistic: {
      const VectorXd beta = coefficients_for(spec).beta;
      return [beta](Eigen::Ref<const Eigen::RowVectorXd> x) {
        return sigmoid(x.dot(beta));
      };
    }
    default: {
      const VectorXd beta = coefficients_for(spec).beta;
      return [beta](Eigen::Ref<const Eigen::RowVectorXd> x) { return x.dot(beta); };
    }
  }
}

OracleFn true_h(const DgpSpec& spec) {
  validate(spec);
  switch (spec.example) {
    case ExampleDgp::ex3_nonlinear:
      return [](Eigen::Ref<const Eigen::RowVectorXd> x) { return ex3_h(x); };
    case ExampleDgp::ex4_logistic: {
      const VectorXd gamma = coefficients_for(spec).gamma;
      return [gamma](Eigen::Ref<const Eigen::RowVectorXd> x) {
        return sigmoid(x.dot(gamma));
      };
    }
    default: {
      const VectorXd gamma = coefficients_for(spec).gamma;
      return [gamma](Eigen::Ref<const Eigen::RowVectorXd> x) { return x.dot(gamma); };
    }
  }
}

Link example_link(const DgpSpec& spec) {
  return spec.example == ExampleDgp::ex4_logistic ? Link{LinkKind::logit, 1e-6}
                                                  : Link{LinkKind::identity, 1e-6};
}

double dgp_truth(const DgpSpec& spec, Target target) {
  validate(spec);
  if (spec.example == ExampleDgp::ex3_nonlinear) {
    const CachedTruth t = ex3_cached_truth();
    return target == Target::covariance ? t.covariance : t.rho;
  }
  const Coefficients c = coefficients_for(spec);
  const double cov = quad_form(c.beta, c.gamma, spec.identity_sigma);
  if (target == Target::covariance) return cov;
  const double vy = quad_form(c.beta, c.beta, spec.identity_sigma);
  const double vz = quad_form(c.gamma, c.gamma, spec.identity_sigma);
  if (vy <= 0.0 || vz <= 0.0) {
    raise(ErrorCode::bad_spec, "correlation truth undefined: a genetic variance is zero");
  }
  return cov / std::sqrt(vy * vz);
}

std::optional<double> dgp_truth_mc_se(const DgpSpec& spec) {
  if (spec.example != ExampleDgp::ex3_nonlinear) return std::nullopt;
  return ex3_cached_truth().cov_se;
}

std::string dgp_truth_provenance(const DgpSpec& spec) {
  if (spec.example == ExampleDgp::ex3_nonlinear) {
    return "mc-oracle(draws=" + std::to_string(kEx3TruthDraws) + ")";
  }
  return "closed-form";
}

OracleEstimate true_value_oracle(const DgpSpec& spec, Target target, long draws,
                                 std::uint64_t seed) {
  validate(spec);
  if (draws < 100'000) raise(ErrorCode::bad_spec, "oracle needs at least 1e5 draws");

  const long dims = oracle_dims(spec);
  const auto factor = cholesky_factor(dims, spec.identity_sigma);
  DgpSpec reduced = spec;
  reduced.p = dims;
  const OracleFn m = true_m(reduced);
  const OracleFn h = true_h(reduced);
  const Link link = example_link(spec);

  const auto draw_pair = [&](Rng& rng, VectorXd& standard, Eigen::RowVectorXd& x) {
    for (long j = 0; j < dims; ++j) standard(j) = rng.normal();
    if (spec.identity_sigma) {
      x = standard.transpose();
    } else {
      x = ((*factor) * standard).transpose();
    }
    return std::pair<double, double>(link.eval(m(x)), link.eval(h(x)));
  };

  // pass 1: means
  double sum_a = 0.0, sum_b = 0.0;
  {
    Rng rng(mix_seed(seed, 0x04AC1Eull));
    VectorXd standard(dims);
    Eigen::RowVectorXd x(dims);
    for (long i = 0; i < draws; ++i) {
      const auto [a, b] = draw_pair(rng, standard, x);
      sum_a += a;
      sum_b += b;
    }
  }
  const double mean_a = sum_a / static_cast<double>(draws);
  const double mean_b = sum_b / static_cast<double>(draws);

  // pass 2 (same stream): centered moments and influence-based MC errors
  double cov_sum = 0.0, va_sum = 0.0, vb_sum = 0.0;
  double cov_sq = 0.0;
  {
    Rng rng(mix_seed(seed, 0x04AC1Eull));
    VectorXd standard(dims);
    Eigen::RowVectorXd x(dims);
    for (long i = 0; i < draws; ++i) {
      const auto [a, b] = draw_pair(rng, standard, x);
      const double da = a - mean_a, db = b - mean_b;
      cov_sum += da * db;
      va_sum += da * da;
      vb_sum += db * db;
      cov_sq += da * db * da * db;
    }
  }
  const double inv = 1.0 / static_cast<double>(draws);
  const double cov = cov_sum * inv;
  const double va = va_sum * inv, vb = vb_sum * inv;
  const double cov_if_var = cov_sq * inv - cov * cov;

  OracleEstimate out;
  if (target == Target::covariance) {
    out.value = cov;
    out.mc_se = std::sqrt(std::max(0.0, cov_if_var) * inv);
    return out;
  }

  if (va <= 0.0 || vb <= 0.0) {
    out.value = 0.0;
    out.mc_se = 0.0;
    return out;
  }
  const double rho = cov / std::sqrt(va * vb);
  // pass 3: sd of the correlation influence values
  double if_sq = 0.0;
  {
    Rng rng(mix_seed(seed, 0x04AC1Eull));
    VectorXd standard(dims);
    Eigen::RowVectorXd x(dims);
    for (long i = 0; i < draws; ++i) {
      const auto [a, b] = draw_pair(rng, standard, x);
      const double da = a - mean_a, db = b - mean_b;
      const double inf = (da * db - cov) / std::sqrt(va * vb) -
                         0.5 * rho * ((da * da - va) / va) -
                         0.5 * rho * ((db * db - vb) / vb);
      if_sq += inf * inf;
    }
  }
  out.value = rho;
  out.mc_se = std::sqrt(if_sq * inv * inv);
  return out;
}

EstimatorFn make_estimator(const EstimatorConfig& config, const DgpSpec* dgp) {
  EstimatorConfig bound = config;
  if (bound.learner_m.kind == LearnerKind::oracle && !bound.learner_m.oracle_fn) {
    if (!dgp) raise(ErrorCode::unsupported, "oracle learner needs a known DGP");
    bound.learner_m.oracle_fn = true_m(*dgp);
  }
  if (bound.learner_h.kind == LearnerKind::oracle && !bound.learner_h.oracle_fn) {
    if (!dgp) raise(ErrorCode::unsupported, "oracle learner needs a known DGP");
    bound.learner_h.oracle_fn = true_h(*dgp);
  }

  return [bound](const Dataset& data, std::uint64_t seed) {
    PointEstimate result;
    switch (bound.method) {
      case Method::crossfit: {
        EstimateOptions opts;
        opts.learner_m = bound.learner_m;
        opts.learner_h = bound.learner_h;
        opts.g1 = bound.g1;
        opts.g2 = bound.g2;
        opts.alpha = bound.alpha;
        opts.seed = seed;
        opts.variance_variant = bound.variance_variant;
        const EstimateReport report = bound.target == Target::covariance
                                          ? estimate_covariance(data, opts)
                                          : estimate_correlation(data, opts);
        result.point = report.point;
        result.se = report.se;
        result.ci = std::pair<double, double>(report.ci_lower, report.ci_upper);
        break;
      }
      case Method::fullsample:
        if (bound.target != Target::covariance) {
          raise(ErrorCode::unsupported, "the no-split estimator targets covariance only");
        }
        result.point =
            estimate_covariance_fullsample(data, bound.learner_m, bound.learner_h, seed);
        break;
      case Method::naive:
        if (bound.target != Target::covariance) {
          raise(ErrorCode::unsupported, "the plug-in estimator targets covariance only");
        }
        result.point =
            estimate_covariance_naive(data, bound.learner_m, bound.learner_h, seed);
        break;
    }
    return result;
  };
}

MonteCarloTable run_monte_carlo(const DgpSpec& dgp, const EstimatorConfig& config,
                                long reps, double alpha, std::uint64_t base_seed) {
  const EstimatorFn estimator = make_estimator(config, &dgp);
  const double truth = dgp_truth(dgp, config.target);
  MonteCarloTable table = run_monte_carlo(dgp, estimator, reps, alpha, base_seed, truth,
                                          dgp_truth_provenance(dgp), dgp_truth_mc_se(dgp));
  table.estimator_desc = std::string(target_name(config.target)) + "/" +
                         method_name(config.method) + " m=" + config.learner_m.describe() +
                         " h=" + config.learner_h.describe() + " links=" +
                         config.g1.name() + "," + config.g2.name();
  return table;
}

MonteCarloTable run_monte_carlo(const DgpSpec& dgp, const EstimatorFn& estimator,
                                long reps, double alpha, std::uint64_t base_seed,
                                double truth, const std::string& truth_provenance,
                                std::optional<double> truth_mc_se) {
  if (reps < 1) raise(ErrorCode::bad_spec, "reps must be >= 1");

  struct RepOutcome {
    bool ok = false;
    PointEstimate estimate;
    std::string error;
  };
  std::vector<RepOutcome> outcomes(static_cast<std::size_t>(reps));

  parallel_for(static_cast<std::size_t>(reps), [&](std::size_t r) {
    const std::uint64_t rep_seed = mix_seed(base_seed, 0x5eed0000ULL + r);
    RepOutcome& slot = outcomes[r];
    try {
      const Dataset data = generate(dgp, mix_seed(rep_seed, 0x0D));
      slot.estimate = estimator(data, mix_seed(rep_seed, 0x0E));
      slot.ok = true;
    } catch (const Error& e) {
      slot.error = error_code_name(e.code());
    }
  });

  MonteCarloTable table;
  table.dgp_desc = dgp.describe();
  table.reps = reps;
  table.truth = truth;
  table.truth_provenance = truth_provenance;
  table.truth_mc_se = truth_mc_se;
  table.alpha = alpha;
  table.base_seed = base_seed;

  double point_sum = 0.0, se_sum = 0.0, len_sum = 0.0;
  long covered = 0, with_ci = 0;
  for (const RepOutcome& o : outcomes) {
    if (!o.ok) {
      ++table.failures;
      ++table.failure_counts[o.error];
      continue;
    }
    ++table.successes;
    point_sum += o.estimate.point;
    if (o.estimate.ci) {
      ++with_ci;
      len_sum += o.estimate.ci->second - o.estimate.ci->first;
      if (o.estimate.ci->first <= truth && truth <= o.estimate.ci->second) ++covered;
    }
    if (o.estimate.se) se_sum += *o.estimate.se;
  }
  if (table.successes == 0) {
    raise(ErrorCode::all_replications_failed, "all " + std::to_string(reps) +
                                                  " replications failed");
  }

  table.mean_point = point_sum / static_cast<double>(table.successes);
  double sq = 0.0;
  for (const RepOutcome& o : outcomes) {
    if (!o.ok) continue;
    const double d = o.estimate.point - table.mean_point;
    sq += d * d;
  }
  table.mc_sd = table.successes > 1
                    ? std::sqrt(sq / static_cast<double>(table.successes - 1))
                    : 0.0;
  table.bias = std::abs(table.mean_point - truth);
  table.has_rbias = truth != 0.0;
  table.rbias = table.has_rbias ? table.bias / std::abs(truth) : 0.0;
  table.has_ci = with_ci == table.successes && with_ci > 0;
  if (table.has_ci) {
    table.cp = static_cast<double>(covered) / static_cast<double>(table.successes);
    table.len = len_sum / static_cast<double>(table.successes);
    table.se_mean = se_sum / static_cast<double>(table.successes);
  }
  return table;
}

std::string render_table(const MonteCarloTable& t) {
  std::ostringstream out;
  out.precision(6);
  out << "dgp\testimator\treps\tok\tfailed\ttruth\tCP\tBIAS\trBIAS\tLEN\tSE\tMC_SD\n";
  out << t.dgp_desc << "\t" << (t.estimator_desc.empty() ? "-" : t.estimator_desc) << "\t"
      << t.reps << "\t" << t.successes << "\t" << t.failures << "\t" << t.truth << "\t";
  if (t.has_ci) {
    out << t.cp;
  } else {
    out << "na";
  }
  out << "\t" << t.bias << "\t";
  if (t.has_rbias) {
    out << t.rbias;
  } else {
    out << "na";
  }
  out << "\t";
  if (t.has_ci) {
    out << t.len << "\t" << t.se_mean;
  } else {
    out << "na\tna";
  }
  out << "\t" << t.mc_sd << "\n";
  return out.str();
}

}  // namespace genrel
