#include "core/dataset.hpp"

#include <atomic>
#include <cmath>
#include <string>

#include "core/errors.hpp"
#include "core/rng.hpp"

namespace genrel {

namespace {

std::uint64_t next_dataset_tag() {
  static std::atomic<std::uint64_t> counter{1};
  return counter.fetch_add(1);
}

// Observation pattern of a row. Overlapping rows form their own stratum so
// that a unit's y-role and z-role can never land in different folds.
enum Stratum : int { kBoth = 0, kYOnly = 1, kZOnly = 2 };

}  // namespace

Dataset::Dataset(Eigen::MatrixXd x, Eigen::VectorXd y, Eigen::VectorXd z,
                 std::vector<std::uint8_t> t_y, std::vector<std::uint8_t> t_z)
    : x_(std::move(x)), y_(std::move(y)), z_(std::move(z)),
      t_y_(std::move(t_y)), t_z_(std::move(t_z)) {
  const long n = x_.rows();
  if (n == 0) raise(ErrorCode::empty_dataset, "dataset has no rows");
  if (x_.cols() == 0) raise(ErrorCode::empty_dataset, "dataset has no predictors");
  if (y_.size() != n || z_.size() != n ||
      static_cast<long>(t_y_.size()) != n || static_cast<long>(t_z_.size()) != n) {
    raise(ErrorCode::ragged_rows, "trait/indicator length does not match row count");
  }
  for (long i = 0; i < n; ++i) {
    if (!t_y_[i] && !t_z_[i]) {
      raise(ErrorCode::no_trait_observed, "row " + std::to_string(i) + " observes neither trait");
    }
    for (long j = 0; j < x_.cols(); ++j) {
      if (!std::isfinite(x_(i, j))) {
        raise(ErrorCode::non_finite_value,
              "predictor (" + std::to_string(i) + ", " + std::to_string(j) + ") is not finite");
      }
    }
    if (t_y_[i] && !std::isfinite(y_(i))) {
      raise(ErrorCode::non_finite_value, "y value at row " + std::to_string(i) + " is not finite");
    }
    if (t_z_[i] && !std::isfinite(z_(i))) {
      raise(ErrorCode::non_finite_value, "z value at row " + std::to_string(i) + " is not finite");
    }
    if (!t_y_[i]) y_(i) = 0.0;
    if (!t_z_[i]) z_(i) = 0.0;
    n_y_ += t_y_[i] ? 1 : 0;
    n_z_ += t_z_[i] ? 1 : 0;
    n0_ += (t_y_[i] && t_z_[i]) ? 1 : 0;
  }
  tag_ = next_dataset_tag();
}

Dataset Dataset::from_rows(const std::vector<RowSpec>& rows) {
  if (rows.empty()) raise(ErrorCode::empty_dataset, "no rows given");
  const std::size_t p = rows.front().x.size();
  if (p == 0) raise(ErrorCode::empty_dataset, "rows carry no predictors");

  const long n = static_cast<long>(rows.size());
  Eigen::MatrixXd x(n, static_cast<long>(p));
  Eigen::VectorXd y = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd z = Eigen::VectorXd::Zero(n);
  std::vector<std::uint8_t> t_y(rows.size(), 0), t_z(rows.size(), 0);

  for (long i = 0; i < n; ++i) {
    const RowSpec& r = rows[static_cast<std::size_t>(i)];
    if (r.x.size() != p) {
      raise(ErrorCode::ragged_rows, "row " + std::to_string(i) + " has " +
                                        std::to_string(r.x.size()) + " predictors, expected " +
                                        std::to_string(p));
    }
    for (std::size_t j = 0; j < p; ++j) x(i, static_cast<long>(j)) = r.x[j];
    if (r.y) {
      t_y[static_cast<std::size_t>(i)] = 1;
      y(i) = *r.y;
    }
    if (r.z) {
      t_z[static_cast<std::size_t>(i)] = 1;
      z(i) = *r.z;
    }
  }
  return Dataset(std::move(x), std::move(y), std::move(z), std::move(t_y), std::move(t_z));
}

std::vector<long> FoldPlan::fold_rows(int fold) const {
  std::vector<long> out;
  for (long i = 0; i < rows(); ++i) {
    if (assignment[static_cast<std::size_t>(i)] == fold) out.push_back(i);
  }
  return out;
}

FoldPlan make_fold_plan(const Dataset& d, std::uint64_t seed) {
  if (d.count_y() < 2 || d.count_z() < 2) {
    raise(ErrorCode::too_few_observations,
          "need at least two observations of each trait to split, have N_y=" +
              std::to_string(d.count_y()) + ", N_z=" + std::to_string(d.count_z()));
  }

  const long n = d.rows();
  std::vector<long> order(static_cast<std::size_t>(n));
  for (long i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  Rng rng(mix_seed(seed, 0x666f6c64ULL));
  rng.shuffle(order);

  // Walk the shuffled order and alternate fold labels within each stratum.
  // Even positions go to fold 1, so an odd stratum's extra unit lands there.
  FoldPlan plan;
  plan.assignment.assign(static_cast<std::size_t>(n), 0);
  plan.seed = seed;
  plan.dataset_tag = d.tag();
  long stratum_count[3] = {0, 0, 0};
  for (long idx : order) {
    const int s = d.y_observed(idx) ? (d.z_observed(idx) ? kBoth : kYOnly) : kZOnly;
    plan.assignment[static_cast<std::size_t>(idx)] =
        (stratum_count[s] % 2 == 0) ? 1 : 2;
    ++stratum_count[s];
  }
  return plan;
}

SampleCounts counts(const Dataset& d, const FoldPlan& plan) {
  if (plan.rows() != d.rows() || plan.dataset_tag != d.tag()) {
    raise(ErrorCode::mismatched_plan, "fold plan does not belong to this dataset");
  }
  SampleCounts c;
  for (long i = 0; i < d.rows(); ++i) {
    const int k = plan.assignment[static_cast<std::size_t>(i)] - 1;
    c.fold_n_y[k] += d.y_observed(i) ? 1 : 0;
    c.fold_n_z[k] += d.z_observed(i) ? 1 : 0;
    c.fold_n0[k] += (d.y_observed(i) && d.z_observed(i)) ? 1 : 0;
  }
  for (int k = 0; k < 2; ++k) {
    c.fold_n[k] = c.fold_n_y[k] + c.fold_n_z[k] - c.fold_n0[k];
  }
  c.total_n_y = d.count_y();
  c.total_n_z = d.count_z();
  c.total_n0 = d.count_overlap();
  c.total_n = d.rows();
  return c;
}

}  // namespace genrel
