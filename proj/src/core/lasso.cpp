#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "core/errors.hpp"
#include "core/learners.hpp"
#include "core/rng.hpp"

namespace genrel {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

double soft_threshold(double v, double lam) {
  if (v > lam) return v - lam;
  if (v < -lam) return v + lam;
  return 0.0;
}

double sigmoid(double t) { return 1.0 / (1.0 + std::exp(-t)); }

struct Standardized {
  MatrixXd xs;
  VectorXd mean;
  VectorXd scale;  // population sd; 0 marks a constant column (excluded)
};

Standardized standardize(const Eigen::Ref<const MatrixXd>& x) {
  const long n = x.rows(), p = x.cols();
  Standardized s;
  s.xs.resize(n, p);
  s.mean.resize(p);
  s.scale.resize(p);
  for (long j = 0; j < p; ++j) {
    const double mu = x.col(j).mean();
    const double sd = std::sqrt((x.col(j).array() - mu).square().sum() / static_cast<double>(n));
    s.mean(j) = mu;
    s.scale(j) = sd;
    if (sd > 0.0) {
      s.xs.col(j) = (x.col(j).array() - mu) / sd;
    } else {
      s.xs.col(j).setZero();
    }
  }
  return s;
}

void check_monotone(std::vector<double>& trace, double obj) {
  if (!std::isfinite(obj)) {
    raise(ErrorCode::non_finite_loss, "lasso objective became non-finite");
  }
  if (!trace.empty() && obj > trace.back() + 1e-10 * (1.0 + std::abs(trace.back()))) {
    raise(ErrorCode::internal, "coordinate descent objective increased between sweeps");
  }
  trace.push_back(obj);
}

// Cyclic coordinate descent for (1/2n)||yc - Xs b||^2 + lambda ||b||_1 on
// standardized predictors. Warm-started via `beta`; full sweeps alternate
// with active-set sweeps until the largest coefficient move drops below tol.
int gaussian_cd(const MatrixXd& xs, const VectorXd& yc, const VectorXd& col_sq_n,
                double lambda, int max_iter, double tol, VectorXd& beta,
                std::vector<double>* trace) {
  const long n = xs.rows(), p = xs.cols();
  VectorXd r = yc - xs * beta;
  const double inv_n = 1.0 / static_cast<double>(n);

  auto sweep = [&](bool active_only) {
    double max_delta = 0.0;
    for (long j = 0; j < p; ++j) {
      if (col_sq_n(j) == 0.0) continue;
      const double old = beta(j);
      if (active_only && old == 0.0) continue;
      const double rho = xs.col(j).dot(r) * inv_n + col_sq_n(j) * old;
      const double updated = soft_threshold(rho, lambda) / col_sq_n(j);
      if (updated != old) {
        r.noalias() -= xs.col(j) * (updated - old);
        beta(j) = updated;
        max_delta = std::max(max_delta, std::abs(updated - old));
      }
    }
    return max_delta;
  };
  auto objective = [&] {
    return 0.5 * inv_n * r.squaredNorm() + lambda * beta.template lpNorm<1>();
  };

  int sweeps = 0;
  while (sweeps < max_iter) {
    const double delta_full = sweep(false);
    ++sweeps;
    if (trace) check_monotone(*trace, objective());
    if (delta_full < tol) break;
    while (sweeps < max_iter) {
      const double delta_active = sweep(true);
      ++sweeps;
      if (trace) check_monotone(*trace, objective());
      if (delta_active < tol) break;
    }
  }
  return sweeps;
}

// One weighted coordinate-descent solve of the IRLS quadratic surrogate.
void weighted_cd(const MatrixXd& xs, const VectorXd& zz, const VectorXd& w,
                 double lambda, int max_iter, double tol, double& b0, VectorXd& beta) {
  const long n = xs.rows(), p = xs.cols();
  const double inv_n = 1.0 / static_cast<double>(n);
  const double w_sum = w.sum();
  VectorXd denom(p);
  for (long j = 0; j < p; ++j) {
    denom(j) = (w.array() * xs.col(j).array().square()).sum() * inv_n;
  }
  VectorXd r = zz - VectorXd::Constant(n, b0) - xs * beta;

  int sweeps = 0;
  double max_delta = std::numeric_limits<double>::infinity();
  while (sweeps < max_iter && max_delta >= tol) {
    max_delta = 0.0;
    const double b0_step = w.dot(r) / w_sum;
    if (b0_step != 0.0) {
      b0 += b0_step;
      r.array() -= b0_step;
      max_delta = std::abs(b0_step);
    }
    for (long j = 0; j < p; ++j) {
      if (denom(j) == 0.0) continue;
      const double old = beta(j);
      const double rho = (w.array() * xs.col(j).array() * r.array()).sum() * inv_n +
                         denom(j) * old;
      const double updated = soft_threshold(rho, lambda) / denom(j);
      if (updated != old) {
        r.noalias() -= xs.col(j) * (updated - old);
        beta(j) = updated;
        max_delta = std::max(max_delta, std::abs(updated - old));
      }
    }
    ++sweeps;
  }
}

// IRLS wrapper around weighted_cd for the penalized logistic loss.
void binomial_fit(const MatrixXd& xs, const VectorXd& y, double lambda, int max_iter,
                  double tol, double& b0, VectorXd& beta) {
  const long n = xs.rows();
  constexpr int kMaxOuter = 50;
  constexpr double kMinWeight = 1e-5;
  for (int outer = 0; outer < kMaxOuter; ++outer) {
    VectorXd eta = VectorXd::Constant(n, b0) + xs * beta;
    VectorXd prob = eta.unaryExpr([](double t) { return sigmoid(t); });
    VectorXd w = (prob.array() * (1.0 - prob.array())).cwiseMax(kMinWeight);
    VectorXd zz = eta + ((y - prob).array() / w.array()).matrix();

    const double b0_before = b0;
    const VectorXd beta_before = beta;
    weighted_cd(xs, zz, w, lambda, max_iter, tol, b0, beta);

    const double change = std::max((beta - beta_before).cwiseAbs().maxCoeff(),
                                   std::abs(b0 - b0_before));
    if (!std::isfinite(change)) {
      raise(ErrorCode::non_finite_loss, "penalized logistic fit diverged");
    }
    if (change < tol) break;
  }
}

VectorXd make_lambda_grid(double lambda_max, int size, double min_ratio) {
  VectorXd grid(size);
  if (size == 1) {
    grid(0) = lambda_max;
    return grid;
  }
  const double log_max = std::log(lambda_max);
  const double log_min = std::log(lambda_max * min_ratio);
  for (int i = 0; i < size; ++i) {
    grid(i) = std::exp(log_max + (log_min - log_max) * i / (size - 1.0));
  }
  return grid;
}

double lambda_max_for(const Standardized& s, const VectorXd& y, Family family) {
  const long n = s.xs.rows();
  const double center = y.mean();
  const VectorXd resid = y.array() - center;
  double lam = 0.0;
  for (long j = 0; j < s.xs.cols(); ++j) {
    if (s.scale(j) == 0.0) continue;
    lam = std::max(lam, std::abs(s.xs.col(j).dot(resid)) / static_cast<double>(n));
  }
  (void)family;  // same screening bound works for both families
  return lam > 0.0 ? lam : 1.0;
}

// Fit the descending path on (x, y); returns standardized-space coefficients
// per lambda plus intercepts. Trace, when requested, covers only the last
// (smallest-lambda) segment so it reflects a single-objective descent.
struct PathResult {
  MatrixXd beta;       // p x L, standardized space
  VectorXd intercept;  // L, standardized space
  Standardized stats;
  int sweeps_last = 0;
};

PathResult fit_path(const Eigen::Ref<const MatrixXd>& x, const VectorXd& y,
                    const VectorXd& grid, Family family, const LassoSpec& spec,
                    std::vector<double>* trace_last) {
  PathResult out;
  out.stats = standardize(x);
  const long n = x.rows(), p = x.cols();
  const long L = grid.size();
  out.beta.setZero(p, L);
  out.intercept.resize(L);

  VectorXd col_sq_n(p);
  for (long j = 0; j < p; ++j) {
    col_sq_n(j) = out.stats.scale(j) == 0.0
                      ? 0.0
                      : out.stats.xs.col(j).squaredNorm() / static_cast<double>(n);
  }

  VectorXd beta = VectorXd::Zero(p);
  if (family == Family::gaussian) {
    const double ybar = y.mean();
    const VectorXd yc = y.array() - ybar;
    for (long l = 0; l < L; ++l) {
      std::vector<double>* trace = (trace_last && l == L - 1) ? trace_last : nullptr;
      out.sweeps_last = gaussian_cd(out.stats.xs, yc, col_sq_n, grid(l), spec.max_iter,
                                    spec.tol, beta, trace);
      out.beta.col(l) = beta;
      out.intercept(l) = ybar;
    }
  } else {
    const double pbar = std::clamp(y.mean(), 1e-12, 1.0 - 1e-12);
    double b0 = std::log(pbar / (1.0 - pbar));
    for (long l = 0; l < L; ++l) {
      binomial_fit(out.stats.xs, y, grid(l), spec.max_iter, spec.tol, b0, beta);
      out.beta.col(l) = beta;
      out.intercept(l) = b0;
    }
  }
  return out;
}

VectorXd path_predictions(const PathResult& path, const Eigen::Ref<const MatrixXd>& x,
                          long lambda_index, Family family) {
  const long n = x.rows();
  VectorXd eta = VectorXd::Constant(n, path.intercept(lambda_index));
  for (long j = 0; j < x.cols(); ++j) {
    const double b = path.beta(j, lambda_index);
    if (b == 0.0 || path.stats.scale(j) == 0.0) continue;
    eta.noalias() +=
        ((x.col(j).array() - path.stats.mean(j)) / path.stats.scale(j)).matrix() * b;
  }
  if (family == Family::binomial) {
    eta = eta.unaryExpr([](double t) { return sigmoid(t); });
  }
  return eta;
}

double validation_loss(const VectorXd& pred, const VectorXd& y, Family family) {
  if (family == Family::gaussian) {
    return (pred - y).squaredNorm() / static_cast<double>(y.size());
  }
  double nll = 0.0;
  for (long i = 0; i < y.size(); ++i) {
    const double pr = std::clamp(pred(i), 1e-12, 1.0 - 1e-12);
    nll -= y(i) * std::log(pr) + (1.0 - y(i)) * std::log(1.0 - pr);
  }
  return nll / static_cast<double>(y.size());
}

}  // namespace

RegressionFit fit_lasso(const Eigen::Ref<const MatrixXd>& x,
                        const Eigen::Ref<const VectorXd>& y,
                        const LearnerSpec& spec, std::uint64_t seed) {
  const long n = x.rows(), p = x.cols();
  if (n != y.size()) raise(ErrorCode::dimension_mismatch, "x and y row counts differ");
  const bool run_cv = !spec.lasso.fixed_lambda.has_value();
  if (n < 2 || (run_cv && n < spec.lasso.cv_folds)) {
    raise(ErrorCode::too_few_rows, "lasso needs at least " +
                                       std::to_string(run_cv ? spec.lasso.cv_folds : 2) +
                                       " rows, got " + std::to_string(n));
  }
  if (spec.lasso.cv_folds < 2) raise(ErrorCode::bad_spec, "cv_folds must be >= 2");

  if (spec.family == Family::gaussian) {
    const double sd = std::sqrt((y.array() - y.mean()).square().sum() / static_cast<double>(n));
    if (sd == 0.0) raise(ErrorCode::degenerate_response, "response has zero variance");
  } else {
    for (long i = 0; i < n; ++i) {
      if (y(i) != 0.0 && y(i) != 1.0) {
        raise(ErrorCode::invalid_argument, "binomial response must be 0/1");
      }
    }
    const double mean = y.mean();
    if (mean == 0.0 || mean == 1.0) {
      raise(ErrorCode::degenerate_response, "binomial response has a single class");
    }
  }

  const Standardized full_stats = standardize(x);
  VectorXd grid;
  if (spec.lasso.fixed_lambda) {
    grid = VectorXd::Constant(1, *spec.lasso.fixed_lambda);
  } else {
    grid = make_lambda_grid(lambda_max_for(full_stats, y, spec.family),
                            spec.lasso.lambda_grid_size, spec.lasso.lambda_min_ratio);
  }

  const std::uint64_t cv_seed = spec.seed.value_or(seed);
  long best_index = 0;
  VectorXd cv_mean = VectorXd::Zero(grid.size());
  if (run_cv) {
    std::vector<long> order(static_cast<std::size_t>(n));
    for (long i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
    Rng rng(mix_seed(cv_seed, 0x63766c61ULL));
    rng.shuffle(order);

    const int folds = spec.lasso.cv_folds;
    for (int k = 0; k < folds; ++k) {
      const long lo = static_cast<long>(k) * n / folds;
      const long hi = static_cast<long>(k + 1) * n / folds;
      const long n_val = hi - lo;
      const long n_train = n - n_val;
      MatrixXd x_train(n_train, p), x_val(n_val, p);
      VectorXd y_train(n_train), y_val(n_val);
      long it = 0, iv = 0;
      for (long i = 0; i < n; ++i) {
        const long row = order[static_cast<std::size_t>(i)];
        if (i >= lo && i < hi) {
          x_val.row(iv) = x.row(row);
          y_val(iv++) = y(row);
        } else {
          x_train.row(it) = x.row(row);
          y_train(it++) = y(row);
        }
      }
      const PathResult path = fit_path(x_train, y_train, grid, spec.family, spec.lasso, nullptr);
      for (long l = 0; l < grid.size(); ++l) {
        cv_mean(l) += validation_loss(path_predictions(path, x_val, l, spec.family), y_val,
                                      spec.family);
      }
    }
    cv_mean /= static_cast<double>(folds);
    for (long l = 1; l < grid.size(); ++l) {
      if (cv_mean(l) < cv_mean(best_index)) best_index = l;  // ties keep larger lambda
    }
  }

  // refit on all rows down to the selected lambda
  const VectorXd refit_grid = grid.head(best_index + 1);
  RegressionFit fit;
  fit.objective_trace.clear();
  const PathResult path = fit_path(x, y, refit_grid, spec.family, spec.lasso,
                                   &fit.objective_trace);

  fit.kind = LearnerKind::lasso;
  fit.family = spec.family;
  fit.coef.setZero(p);
  for (long j = 0; j < p; ++j) {
    if (path.stats.scale(j) > 0.0) {
      fit.coef(j) = path.beta(j, best_index) / path.stats.scale(j);
    }
  }
  fit.intercept = path.intercept(best_index) - fit.coef.dot(path.stats.mean);
  fit.selected_lambda = grid(best_index);
  fit.lambda_grid = grid;
  fit.cv_loss = run_cv ? cv_mean : VectorXd();
  fit.input_width = p;
  return fit;
}

}  // namespace genrel
