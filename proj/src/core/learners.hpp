#ifndef GENREL_LEARNERS_HPP
#define GENREL_LEARNERS_HPP

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace genrel {

enum class LearnerKind { lasso, ridge, mlp, oracle, constant };
enum class Family { gaussian, binomial };

const char* learner_kind_name(LearnerKind k);
const char* family_name(Family f);

struct LassoSpec {
  int cv_folds = 10;
  int lambda_grid_size = 100;
  int max_iter = 1000;       // coordinate sweeps per lambda
  double tol = 1e-7;         // max absolute coefficient change
  double lambda_min_ratio = 1e-4;
  std::optional<double> fixed_lambda;  // bypasses CV when set
};

struct RidgeSpec {
  double lambda = 1.0;
};

struct MlpSpec {
  std::vector<int> hidden = {100, 100};
  int max_iter = 5000;  // epochs
  std::string learning_rate = "adaptive";  // "adaptive" halves on plateau
  int batch_size = 32;
  double init_step = 1e-3;
  int patience = 20;  // plateau epochs before the step is halved
};

using OracleFn = std::function<double(Eigen::Ref<const Eigen::RowVectorXd>)>;

struct LearnerSpec {
  LearnerKind kind = LearnerKind::lasso;
  Family family = Family::gaussian;
  LassoSpec lasso;
  RidgeSpec ridge;
  MlpSpec mlp;
  OracleFn oracle_fn;          // oracle learner only
  double constant_value = 0.0;  // constant learner only
  std::optional<std::uint64_t> seed;  // overrides the derived stream when set

  std::string describe() const;
};

// A trained nuisance regression. Value type; predictions are pure.
struct RegressionFit {
  LearnerKind kind = LearnerKind::constant;
  Family family = Family::gaussian;

  // linear models (lasso, ridge), on the original predictor scale
  Eigen::VectorXd coef;
  double intercept = 0.0;

  // mlp
  struct MlpModel {
    std::vector<Eigen::MatrixXd> weights;
    std::vector<Eigen::VectorXd> biases;
    Eigen::VectorXd x_mean, x_scale;
    double y_mean = 0.0, y_scale = 1.0;
    bool sigmoid_output = false;
  };
  std::optional<MlpModel> mlp;

  OracleFn oracle_fn;
  double constant_value = 0.0;

  // diagnostics
  double selected_lambda = 0.0;
  Eigen::VectorXd lambda_grid;
  Eigen::VectorXd cv_loss;                 // mean CV loss per lambda
  std::vector<double> objective_trace;     // penalized objective per sweep (final refit)
  int epochs_run = 0;
  double final_train_loss = 0.0;

  // fold provenance: rows of the owning dataset the fit was trained on
  std::vector<long> trained_rows;
  std::uint64_t dataset_tag = 0;

  long input_width = 0;  // 0 for learners that accept any width
};

RegressionFit fit_lasso(const Eigen::Ref<const Eigen::MatrixXd>& x,
                        const Eigen::Ref<const Eigen::VectorXd>& y,
                        const LearnerSpec& spec, std::uint64_t seed);

RegressionFit fit_ridge(const Eigen::Ref<const Eigen::MatrixXd>& x,
                        const Eigen::Ref<const Eigen::VectorXd>& y, double lambda);

RegressionFit fit_mlp(const Eigen::Ref<const Eigen::MatrixXd>& x,
                      const Eigen::Ref<const Eigen::VectorXd>& y,
                      const LearnerSpec& spec, std::uint64_t seed);

// Dispatch on spec.kind. `seed` feeds CV fold assignment and MLP
// initialization unless the spec pins its own seed.
RegressionFit fit_learner(const Eigen::Ref<const Eigen::MatrixXd>& x,
                          const Eigen::Ref<const Eigen::VectorXd>& y,
                          const LearnerSpec& spec, std::uint64_t seed);

Eigen::VectorXd predict(const RegressionFit& fit,
                        const Eigen::Ref<const Eigen::MatrixXd>& x);

// Full-batch loss and parameter gradients of an MLP model; the training loop
// uses the same backward pass, so tests can check it against finite
// differences directly.
struct MlpGradients {
  double loss = 0.0;
  std::vector<Eigen::MatrixXd> d_weights;
  std::vector<Eigen::VectorXd> d_biases;
};
MlpGradients mlp_loss_gradient(const RegressionFit::MlpModel& model,
                               const Eigen::Ref<const Eigen::MatrixXd>& x_std,
                               const Eigen::Ref<const Eigen::VectorXd>& y_std,
                               Family family);

}  // namespace genrel

#endif
