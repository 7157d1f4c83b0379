#include "core/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <unordered_set>

#include "core/errors.hpp"
#include "core/rng.hpp"

namespace genrel {

using Eigen::MatrixXd;
using Eigen::VectorXd;

const char* target_name(Target t) {
  return t == Target::covariance ? "covariance" : "correlation";
}

const char* variance_variant_name(VarianceVariant v) {
  return v == VarianceVariant::proposition2 ? "proposition2" : "theorem5";
}

namespace {

double phi_pdf(double z) {
  return std::exp(-0.5 * z * z) * 0.3989422804014326779;
}

double phi_cdf(double z) { return 0.5 * std::erfc(-z * 0.7071067811865475244); }

// Acklam's rational approximation to the standard normal quantile.
double acklam_inverse(double p) {
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double p_low = 0.02425;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  if (p > 1.0 - p_low) {
    const double q = std::sqrt(-2.0 * std::log(1.0 - p));
    return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double q = p - 0.5;
  const double r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

void check_no_leakage(const RegressionFit& fit, const Dataset& d,
                      const std::unordered_set<long>& eval_set, const char* role) {
  if (fit.dataset_tag != d.tag() || fit.trained_rows.empty()) return;
  for (long row : fit.trained_rows) {
    if (eval_set.count(row)) {
      raise(ErrorCode::fold_leakage,
            std::string(role) + " fit was trained on evaluation-fold row " +
                std::to_string(row));
    }
  }
}

MatrixXd gather_rows(const Eigen::MatrixXd& x, const std::vector<long>& rows) {
  MatrixXd out(static_cast<long>(rows.size()), x.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<long>(i)) = x.row(rows[i]);
  return out;
}

struct FoldFits {
  RegressionFit m;
  RegressionFit h;
};

FoldFits fit_fold(const Dataset& d, const std::vector<long>& train_rows,
                  const EstimateOptions& opts, int fold_index) {
  std::vector<long> rows_y, rows_z;
  for (long row : train_rows) {
    if (d.y_observed(row)) rows_y.push_back(row);
    if (d.z_observed(row)) rows_z.push_back(row);
  }
  if (rows_y.empty() || rows_z.empty()) {
    raise(ErrorCode::empty_fold, "training fold " + std::to_string(fold_index + 1) +
                                     " lacks observations of one trait");
  }

  FoldFits fits;
  {
    MatrixXd x = gather_rows(d.x(), rows_y);
    VectorXd y(static_cast<long>(rows_y.size()));
    for (std::size_t i = 0; i < rows_y.size(); ++i) y(static_cast<long>(i)) = d.y()(rows_y[i]);
    fits.m = fit_learner(x, y, opts.learner_m,
                         mix_seed(opts.seed, 0x10 + static_cast<std::uint64_t>(fold_index)));
    fits.m.trained_rows = rows_y;
    fits.m.dataset_tag = d.tag();
  }
  {
    MatrixXd x = gather_rows(d.x(), rows_z);
    VectorXd z(static_cast<long>(rows_z.size()));
    for (std::size_t i = 0; i < rows_z.size(); ++i) z(static_cast<long>(i)) = d.z()(rows_z[i]);
    fits.h = fit_learner(x, z, opts.learner_h,
                         mix_seed(opts.seed, 0x20 + static_cast<std::uint64_t>(fold_index)));
    fits.h.trained_rows = rows_z;
    fits.h.dataset_tag = d.tag();
  }
  return fits;
}

struct TwoFoldPieces {
  InfluencePieces eval_on_fold2;  // fits from fold 1
  InfluencePieces eval_on_fold1;  // fits from fold 2
  FoldPlan plan;
};

TwoFoldPieces cross_fit(const Dataset& d, const EstimateOptions& opts) {
  if (d.count_y() < 4 || d.count_z() < 4) {
    raise(ErrorCode::too_few_observations,
          "cross-fitting needs N_y >= 4 and N_z >= 4, have N_y=" +
              std::to_string(d.count_y()) + ", N_z=" + std::to_string(d.count_z()));
  }
  TwoFoldPieces out;
  out.plan = make_fold_plan(d, mix_seed(opts.seed, 0x01));
  const std::vector<long> rows1 = out.plan.fold_rows(1);
  const std::vector<long> rows2 = out.plan.fold_rows(2);

  const FoldFits fits1 = fit_fold(d, rows1, opts, 0);
  out.eval_on_fold2 = influence_pieces(d, rows2, fits1.m, fits1.h, opts.g1, opts.g2,
                                       opts.variance_variant);
  const FoldFits fits2 = fit_fold(d, rows2, opts, 1);
  out.eval_on_fold1 = influence_pieces(d, rows1, fits2.m, fits2.h, opts.g1, opts.g2,
                                       opts.variance_variant);
  return out;
}

void fill_common(EstimateReport& report, const Dataset& d, const EstimateOptions& opts,
                 const TwoFoldPieces& pieces) {
  report.alpha = opts.alpha;
  report.z = normal_quantile(opts.alpha / 2.0);
  report.counts = counts(d, pieces.plan);
  report.learner_m_desc = opts.learner_m.describe();
  report.learner_h_desc = opts.learner_h.describe();
  report.link1_name = opts.g1.name();
  report.link2_name = opts.g2.name();
  report.clip_eps = opts.g1.clip_eps;
  report.seed = opts.seed;
  report.variance_variant = opts.variance_variant;
  report.mean_convention = (opts.g1.is_identity() && opts.g2.is_identity())
                               ? "trait-means"
                               : "fold-prediction-means";
  report.fold_imbalance = std::abs(report.counts.fold_n0[0] - report.counts.fold_n0[1]) >= 1;

  const InfluencePieces* by_eval[2] = {&pieces.eval_on_fold1, &pieces.eval_on_fold2};
  for (int k = 0; k < 2; ++k) {
    report.fold[k].i_n = by_eval[k]->i_n;
    report.fold[k].b0y = by_eval[k]->b0y;
    report.fold[k].b0z = by_eval[k]->b0z;
    report.fold[k].k = by_eval[k]->k_value();
    report.fold[k].n_y = by_eval[k]->n_y;
    report.fold[k].n_z = by_eval[k]->n_z;
    report.fold[k].n0 = by_eval[k]->n0;
    report.fold[k].n = by_eval[k]->n;
  }
}

}  // namespace

double normal_quantile(double alpha_half) {
  if (!(alpha_half > 0.0 && alpha_half < 1.0)) {
    raise(ErrorCode::out_of_range, "alpha/2 must lie strictly inside (0, 1)");
  }
  const double p = 1.0 - alpha_half;
  double z = acklam_inverse(p);
  for (int i = 0; i < 2; ++i) {
    z -= (phi_cdf(z) - p) / phi_pdf(z);
  }
  return z;
}

double InfluencePieces::rho() const {
  if (b0y <= 0.0 || b0z <= 0.0) {
    raise(ErrorCode::non_positive_genetic_variance,
          "estimated genetic variance is not positive (B0y=" + std::to_string(b0y) +
              ", B0z=" + std::to_string(b0z) + ")");
  }
  return i_n / std::sqrt(b0y * b0z);
}

double InfluencePieces::j_value(double rho_n) const {
  const double root = std::sqrt(b0y * b0z);
  double total = 0.0;
  for (long i = 0; i < s_yz.size(); ++i) {
    const double phi = s_yz(i) / root - rho_n * s_yy(i) / (2.0 * b0y) -
                       rho_n * s_zz(i) / (2.0 * b0z);
    total += phi * phi;
  }
  return total;
}

InfluencePieces influence_pieces(const Dataset& d, const std::vector<long>& eval_rows,
                                 const RegressionFit& m_fit, const RegressionFit& h_fit,
                                 const Link& g1, const Link& g2, VarianceVariant variant) {
  if (eval_rows.empty()) raise(ErrorCode::empty_fold, "evaluation fold is empty");
  std::unordered_set<long> eval_set(eval_rows.begin(), eval_rows.end());
  check_no_leakage(m_fit, d, eval_set, "m");
  check_no_leakage(h_fit, d, eval_set, "h");

  InfluencePieces out;
  out.eval_rows = eval_rows;
  const long ne = static_cast<long>(eval_rows.size());
  for (long row : eval_rows) {
    out.n_y += d.y_observed(row) ? 1 : 0;
    out.n_z += d.z_observed(row) ? 1 : 0;
    out.n0 += (d.y_observed(row) && d.z_observed(row)) ? 1 : 0;
  }
  out.n = out.n_y + out.n_z - out.n0;
  if (out.n_y == 0 || out.n_z == 0) {
    raise(ErrorCode::empty_fold, "evaluation fold lacks observations of one trait");
  }

  const MatrixXd xe = gather_rows(d.x(), eval_rows);
  const VectorXd m_hat = predict(m_fit, xe);
  const VectorXd h_hat = predict(h_fit, xe);

  const bool identity_links = g1.is_identity() && g2.is_identity();
  VectorXd g1_hat(ne), g2_hat(ne), g1_deriv(ne), g2_deriv(ne);
  if (identity_links) {
    g1_hat = m_hat;
    g2_hat = h_hat;
    g1_deriv.setOnes();
    g2_deriv.setOnes();
    // Identity links center the nuisance predictions at the fold trait means.
    double y_sum = 0.0, z_sum = 0.0;
    for (long i = 0; i < ne; ++i) {
      const long row = eval_rows[static_cast<std::size_t>(i)];
      if (d.y_observed(row)) y_sum += d.y()(row);
      if (d.z_observed(row)) z_sum += d.z()(row);
    }
    out.gbar1 = y_sum / static_cast<double>(out.n_y);
    out.gbar2 = z_sum / static_cast<double>(out.n_z);
  } else {
    for (long i = 0; i < ne; ++i) {
      g1_hat(i) = g1.eval(m_hat(i));
      g1_deriv(i) = g1.deriv(m_hat(i));
      g2_hat(i) = g2.eval(h_hat(i));
      g2_deriv(i) = g2.deriv(h_hat(i));
    }
    out.gbar1 = g1_hat.sum() / static_cast<double>(out.n);
    out.gbar2 = g2_hat.sum() / static_cast<double>(out.n);
  }

  const double inv_ny = 1.0 / static_cast<double>(out.n_y);
  const double inv_nz = 1.0 / static_cast<double>(out.n_z);
  const double inv_n = 1.0 / static_cast<double>(out.n);

  VectorXd a1 = VectorXd::Zero(ne), a2 = VectorXd::Zero(ne), a3(ne);
  VectorXd vy = VectorXd::Zero(ne), vz = VectorXd::Zero(ne);  // residual variance addends
  double sum1 = 0.0, sum2 = 0.0, sum3 = 0.0;
  double sum_vy = 0.0, sum_vz = 0.0, sum_q1 = 0.0, sum_q2 = 0.0;
  for (long i = 0; i < ne; ++i) {
    const long row = eval_rows[static_cast<std::size_t>(i)];
    const double c1 = g1_hat(i) - out.gbar1;
    const double c2 = g2_hat(i) - out.gbar2;
    if (d.y_observed(row)) {
      a1(i) = g1_deriv(i) * (d.y()(row) - m_hat(i)) * c2;
      sum1 += a1(i);
      vy(i) = 2.0 * g1_deriv(i) * (d.y()(row) - m_hat(i)) * c1;
      sum_vy += vy(i);
    }
    if (d.z_observed(row)) {
      a2(i) = g2_deriv(i) * (d.z()(row) - h_hat(i)) * c1;
      sum2 += a2(i);
      vz(i) = 2.0 * g2_deriv(i) * (d.z()(row) - h_hat(i)) * c2;
      sum_vz += vz(i);
    }
    a3(i) = c1 * c2;
    sum3 += a3(i);
    sum_q1 += c1 * c1;
    sum_q2 += c2 * c2;
  }

  out.i_n = sum1 * inv_ny + sum2 * inv_nz + sum3 * inv_n;
  out.b0y = sum_vy * inv_ny + sum_q1 * inv_n;
  out.b0z = sum_vz * inv_nz + sum_q2 * inv_n;

  out.delta.resize(ne);
  out.s_yz.resize(ne);
  out.s_yy.resize(ne);
  out.s_zz.resize(ne);
  for (long i = 0; i < ne; ++i) {
    const double c1 = g1_hat(i) - out.gbar1;
    const double c2 = g2_hat(i) - out.gbar2;
    out.delta(i) = a1(i) * inv_ny + a2(i) * inv_nz + a3(i) * inv_n;
    out.s_yz(i) = out.delta(i) - out.i_n * inv_n;
    const double q1_factor = variant == VarianceVariant::theorem5 ? g1_deriv(i) : 1.0;
    const double q2_factor = variant == VarianceVariant::theorem5 ? g2_deriv(i) : 1.0;
    out.s_yy(i) = vy(i) * inv_ny + q1_factor * (c1 * c1 - out.b0y) * inv_n;
    out.s_zz(i) = vz(i) * inv_nz + q2_factor * (c2 * c2 - out.b0z) * inv_n;
  }
  return out;
}

EstimateReport estimate_covariance(const Dataset& d, const EstimateOptions& opts) {
  const TwoFoldPieces pieces = cross_fit(d, opts);

  EstimateReport report;
  report.target = Target::covariance;
  fill_common(report, d, opts, pieces);

  const double k1 = pieces.eval_on_fold2.k_value();
  const double k2 = pieces.eval_on_fold1.k_value();
  if (k1 + k2 == 0.0) {
    raise(ErrorCode::degenerate_variance, "both fold variance pieces are exactly zero");
  }
  report.point = (pieces.eval_on_fold2.i_n + pieces.eval_on_fold1.i_n) / 2.0;
  report.se = std::sqrt((k1 + k2) / 4.0);
  report.ci_lower = report.point - report.z * report.se;
  report.ci_upper = report.point + report.z * report.se;
  return report;
}

EstimateReport estimate_correlation(const Dataset& d, const EstimateOptions& opts) {
  const TwoFoldPieces pieces = cross_fit(d, opts);

  EstimateReport report;
  report.target = Target::correlation;
  fill_common(report, d, opts, pieces);

  const double rho_a = pieces.eval_on_fold2.rho();
  const double rho_b = pieces.eval_on_fold1.rho();
  const double j1 = pieces.eval_on_fold2.j_value(rho_a);
  const double j2 = pieces.eval_on_fold1.j_value(rho_b);
  report.fold[1].rho = rho_a;
  report.fold[1].j = j1;
  report.fold[0].rho = rho_b;
  report.fold[0].j = j2;

  report.point = (rho_a + rho_b) / 2.0;
  report.se = std::sqrt((j1 + j2) / 4.0);
  report.ci_lower = report.point - report.z * report.se;
  report.ci_upper = report.point + report.z * report.se;
  report.rho_out_of_range = report.point < -1.0 || report.point > 1.0;
  return report;
}

namespace {

struct FullSampleFits {
  RegressionFit m;
  RegressionFit h;
  VectorXd m_hat, h_hat;  // on all rows
  double ybar = 0.0, zbar = 0.0;
};

FullSampleFits fit_full(const Dataset& d, const LearnerSpec& learner_m,
                        const LearnerSpec& learner_h, std::uint64_t seed) {
  if (d.count_y() < 2 || d.count_z() < 2) {
    raise(ErrorCode::too_few_observations, "need N_y >= 2 and N_z >= 2");
  }
  std::vector<long> rows_y, rows_z;
  double y_sum = 0.0, z_sum = 0.0;
  for (long i = 0; i < d.rows(); ++i) {
    if (d.y_observed(i)) {
      rows_y.push_back(i);
      y_sum += d.y()(i);
    }
    if (d.z_observed(i)) {
      rows_z.push_back(i);
      z_sum += d.z()(i);
    }
  }

  FullSampleFits out;
  {
    MatrixXd x = gather_rows(d.x(), rows_y);
    VectorXd y(static_cast<long>(rows_y.size()));
    for (std::size_t i = 0; i < rows_y.size(); ++i) y(static_cast<long>(i)) = d.y()(rows_y[i]);
    out.m = fit_learner(x, y, learner_m, mix_seed(seed, 0x30));
  }
  {
    MatrixXd x = gather_rows(d.x(), rows_z);
    VectorXd z(static_cast<long>(rows_z.size()));
    for (std::size_t i = 0; i < rows_z.size(); ++i) z(static_cast<long>(i)) = d.z()(rows_z[i]);
    out.h = fit_learner(x, z, learner_h, mix_seed(seed, 0x40));
  }
  out.m_hat = predict(out.m, d.x());
  out.h_hat = predict(out.h, d.x());
  out.ybar = y_sum / static_cast<double>(d.count_y());
  out.zbar = z_sum / static_cast<double>(d.count_z());
  return out;
}

}  // namespace

double estimate_covariance_fullsample(const Dataset& d, const LearnerSpec& learner_m,
                                      const LearnerSpec& learner_h, std::uint64_t seed) {
  const FullSampleFits f = fit_full(d, learner_m, learner_h, seed);
  double sum1 = 0.0, sum2 = 0.0, sum3 = 0.0;
  for (long i = 0; i < d.rows(); ++i) {
    if (d.y_observed(i)) sum1 += (d.y()(i) - f.m_hat(i)) * (f.h_hat(i) - f.zbar);
    if (d.z_observed(i)) sum2 += (f.m_hat(i) - f.ybar) * (d.z()(i) - f.h_hat(i));
    sum3 += (f.m_hat(i) - f.ybar) * (f.h_hat(i) - f.zbar);
  }
  return sum1 / static_cast<double>(d.count_y()) + sum2 / static_cast<double>(d.count_z()) +
         sum3 / static_cast<double>(d.rows());
}

double estimate_covariance_naive(const Dataset& d, const LearnerSpec& learner_m,
                                 const LearnerSpec& learner_h, std::uint64_t seed) {
  const FullSampleFits f = fit_full(d, learner_m, learner_h, seed);
  double prod_sum = 0.0;
  for (long i = 0; i < d.rows(); ++i) prod_sum += f.m_hat(i) * f.h_hat(i);
  return prod_sum / static_cast<double>(d.rows()) - f.ybar * f.zbar;
}

}  // namespace genrel
