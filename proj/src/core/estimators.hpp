#ifndef GENREL_ESTIMATORS_HPP
#define GENREL_ESTIMATORS_HPP

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "core/dataset.hpp"
#include "core/learners.hpp"
#include "core/link.hpp"

namespace genrel {

enum class Target { covariance, correlation };

// Form of the quadratic term in the S_yy / S_zz variance pieces under
// non-identity links. The two candidate displays disagree on a g' factor;
// proposition2 is the default, theorem5 is kept as a sensitivity switch.
enum class VarianceVariant { proposition2, theorem5 };

const char* target_name(Target t);
const char* variance_variant_name(VarianceVariant v);

// z with Phi(z) = 1 - alpha_half, |error| <= 1e-8.
double normal_quantile(double alpha_half);

// Per-row influence pieces of one evaluation fold, computed from nuisance
// fits trained on the complementary fold.
struct InfluencePieces {
  std::vector<long> eval_rows;
  Eigen::VectorXd delta;              // delta-hat per eval row
  Eigen::VectorXd s_yz, s_yy, s_zz;   // centered influence values
  double i_n = 0.0;
  double b0y = 0.0, b0z = 0.0;
  double gbar1 = 0.0, gbar2 = 0.0;
  long n_y = 0, n_z = 0, n0 = 0, n = 0;

  double k_value() const { return s_yz.squaredNorm(); }
  double rho() const;                  // errors if b0y or b0z is nonpositive
  double j_value(double rho_n) const;
};

InfluencePieces influence_pieces(const Dataset& d, const std::vector<long>& eval_rows,
                                 const RegressionFit& m_fit, const RegressionFit& h_fit,
                                 const Link& g1, const Link& g2,
                                 VarianceVariant variant = VarianceVariant::proposition2);

struct EstimateOptions {
  LearnerSpec learner_m;
  LearnerSpec learner_h;
  Link g1;
  Link g2;
  double alpha = 0.05;
  std::uint64_t seed = 1;
  VarianceVariant variance_variant = VarianceVariant::proposition2;
};

struct FoldDiagnostics {
  double i_n = 0.0;      // estimate with this fold as evaluation fold
  double b0y = 0.0, b0z = 0.0;
  double rho = 0.0;      // correlation target only
  double k = 0.0;        // covariance variance piece
  double j = 0.0;        // correlation variance piece
  long n_y = 0, n_z = 0, n0 = 0, n = 0;
};

struct EstimateReport {
  Target target = Target::covariance;
  double point = 0.0;
  double se = 0.0;
  double ci_lower = 0.0, ci_upper = 0.0;
  double alpha = 0.05;
  double z = 0.0;
  FoldDiagnostics fold[2];  // [k]: fold k+1 used as evaluation fold
  SampleCounts counts;
  std::string learner_m_desc, learner_h_desc;
  std::string link1_name, link2_name;
  double clip_eps = 1e-6;
  std::uint64_t seed = 0;
  std::string mean_convention;  // "trait-means" (identity) or "fold-prediction-means"
  VarianceVariant variance_variant = VarianceVariant::proposition2;
  bool rho_out_of_range = false;
  bool fold_imbalance = false;
};

EstimateReport estimate_covariance(const Dataset& d, const EstimateOptions& opts);
EstimateReport estimate_correlation(const Dataset& d, const EstimateOptions& opts);

// No-split estimators (point value only, no standard error). Identity links.
double estimate_covariance_fullsample(const Dataset& d, const LearnerSpec& learner_m,
                                      const LearnerSpec& learner_h, std::uint64_t seed);
double estimate_covariance_naive(const Dataset& d, const LearnerSpec& learner_m,
                                 const LearnerSpec& learner_h, std::uint64_t seed);

}  // namespace genrel

#endif
