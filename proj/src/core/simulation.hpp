#ifndef GENREL_SIMULATION_HPP
#define GENREL_SIMULATION_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>

#include "core/dataset.hpp"
#include "core/estimators.hpp"
#include "core/learners.hpp"
#include "core/link.hpp"

namespace genrel {

enum class ExampleDgp { ex1_linear_cov, ex2_linear_corr, ex3_nonlinear, ex4_logistic };
enum class Overlap { full, none };

const char* example_name(ExampleDgp e);
const char* overlap_name(Overlap o);
ExampleDgp example_from_name(const std::string& name);

struct DgpSpec {
  ExampleDgp example = ExampleDgp::ex1_linear_cov;
  long n_y = 0, n_z = 0;
  long p = 0;
  long s1 = 0, s2 = 0;
  Overlap overlap = Overlap::full;
  bool identity_sigma = false;  // test hook; production always uses AR(0.6)

  std::string describe() const;
};

// Draws one dataset from the example's data-generating process.
Dataset generate(const DgpSpec& spec, std::uint64_t seed);

// True regression functions of the example (for oracle learners).
OracleFn true_m(const DgpSpec& spec);
OracleFn true_h(const DgpSpec& spec);

// Canonical link pair of the example (logit for the binary example).
Link example_link(const DgpSpec& spec);

// Closed-form target value where one exists (ex1/ex2/ex4); the nonlinear
// example's truth comes from a cached Monte Carlo oracle run.
double dgp_truth(const DgpSpec& spec, Target target);
std::optional<double> dgp_truth_mc_se(const DgpSpec& spec);
std::string dgp_truth_provenance(const DgpSpec& spec);

struct OracleEstimate {
  double value = 0.0;
  double mc_se = 0.0;
};

// Brute-force Monte Carlo evaluation of cov[g1{m(X)}, g2{h(X)}] (or the
// correlation) over fresh draws of X using the true regression functions.
OracleEstimate true_value_oracle(const DgpSpec& spec, Target target, long draws,
                                 std::uint64_t seed);

enum class Method { crossfit, fullsample, naive };
const char* method_name(Method m);

struct PointEstimate {
  double point = 0.0;
  std::optional<double> se;
  std::optional<std::pair<double, double>> ci;
};

using EstimatorFn = std::function<PointEstimate(const Dataset&, std::uint64_t)>;

struct EstimatorConfig {
  Target target = Target::covariance;
  Method method = Method::crossfit;
  LearnerSpec learner_m, learner_h;
  Link g1, g2;
  double alpha = 0.05;
  VarianceVariant variance_variant = VarianceVariant::proposition2;
};

// Binds an estimator closure; oracle learners resolve to the DGP's true
// regression functions when a spec is given.
EstimatorFn make_estimator(const EstimatorConfig& config, const DgpSpec* dgp);

struct MonteCarloTable {
  std::string dgp_desc, estimator_desc;
  long reps = 0, successes = 0, failures = 0;
  std::map<std::string, long> failure_counts;  // by error name
  double truth = 0.0;
  std::string truth_provenance;
  std::optional<double> truth_mc_se;
  double alpha = 0.05;
  std::uint64_t base_seed = 0;

  bool has_ci = false;     // point-only estimators report bias columns only
  double cp = 0.0;         // fraction of CIs containing the truth
  double bias = 0.0;       // |mean estimate - truth|
  bool has_rbias = false;  // false when truth == 0
  double rbias = 0.0;
  double len = 0.0;        // mean CI width
  double se_mean = 0.0;    // mean of the estimated standard errors
  double mc_sd = 0.0;      // sample sd of the point estimates
  double mean_point = 0.0;
};

MonteCarloTable run_monte_carlo(const DgpSpec& dgp, const EstimatorConfig& config,
                                long reps, double alpha, std::uint64_t base_seed);

// Stub-friendly variant used by tests: caller supplies the estimator and truth.
MonteCarloTable run_monte_carlo(const DgpSpec& dgp, const EstimatorFn& estimator,
                                long reps, double alpha, std::uint64_t base_seed,
                                double truth, const std::string& truth_provenance,
                                std::optional<double> truth_mc_se = std::nullopt);

// Delimited one-row table (header + values, tab separated).
std::string render_table(const MonteCarloTable& table);

}  // namespace genrel

#endif
