#ifndef GENREL_DATASET_HPP
#define GENREL_DATASET_HPP

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <vector>

namespace genrel {

// One observation unit: predictors plus whichever traits were measured.
struct RowSpec {
  std::vector<double> x;
  std::optional<double> y;
  std::optional<double> z;
};

// The pooled sample D = D_y \cup D_z. Trait values are stored pre-multiplied
// by their observation indicator (0 where unobserved); t_y/t_z record which
// rows carry each trait. Immutable after construction.
class Dataset {
 public:
  Dataset(Eigen::MatrixXd x, Eigen::VectorXd y, Eigen::VectorXd z,
          std::vector<std::uint8_t> t_y, std::vector<std::uint8_t> t_z);

  static Dataset from_rows(const std::vector<RowSpec>& rows);

  long rows() const { return x_.rows(); }
  long cols() const { return x_.cols(); }

  const Eigen::MatrixXd& x() const { return x_; }
  const Eigen::VectorXd& y() const { return y_; }
  const Eigen::VectorXd& z() const { return z_; }
  bool y_observed(long i) const { return t_y_[static_cast<std::size_t>(i)] != 0; }
  bool z_observed(long i) const { return t_z_[static_cast<std::size_t>(i)] != 0; }

  long count_y() const { return n_y_; }
  long count_z() const { return n_z_; }
  long count_overlap() const { return n0_; }

  // Identity tag used to detect plans/fits applied to the wrong dataset.
  std::uint64_t tag() const { return tag_; }

 private:
  Eigen::MatrixXd x_;
  Eigen::VectorXd y_, z_;
  std::vector<std::uint8_t> t_y_, t_z_;
  long n_y_ = 0, n_z_ = 0, n0_ = 0;
  std::uint64_t tag_ = 0;
};

// Fold-wise and overall unit counts; n = n_y + n_z - n0 in every scope.
struct SampleCounts {
  long fold_n_y[2] = {0, 0};
  long fold_n_z[2] = {0, 0};
  long fold_n0[2] = {0, 0};
  long fold_n[2] = {0, 0};
  long total_n_y = 0, total_n_z = 0, total_n0 = 0, total_n = 0;
};

// Unit-level two-fold split. Overlapping units keep both trait roles in the
// same fold; the split is stratified by observation pattern so that n_y, n_z
// and n0 stay balanced across folds up to parity (extra unit goes to fold 1).
struct FoldPlan {
  std::vector<std::uint8_t> assignment;  // per-row label, 1 or 2
  std::uint64_t seed = 0;
  std::uint64_t dataset_tag = 0;

  long rows() const { return static_cast<long>(assignment.size()); }
  std::vector<long> fold_rows(int fold) const;
};

FoldPlan make_fold_plan(const Dataset& d, std::uint64_t seed);

SampleCounts counts(const Dataset& d, const FoldPlan& plan);

}  // namespace genrel

#endif
