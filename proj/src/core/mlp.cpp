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

// Forward pass over a column-per-sample batch; returns activations per layer
// (activations[0] is the input) and the output row.
struct ForwardState {
  std::vector<MatrixXd> activations;
  Eigen::RowVectorXd output;  // pre-sigmoid for binomial
};

ForwardState forward(const RegressionFit::MlpModel& model, const MatrixXd& batch) {
  ForwardState st;
  st.activations.reserve(model.weights.size());
  st.activations.push_back(batch);
  const std::size_t layers = model.weights.size();
  for (std::size_t l = 0; l + 1 < layers; ++l) {
    MatrixXd a = (model.weights[l] * st.activations.back()).colwise() + model.biases[l];
    a = a.cwiseMax(0.0);  // ReLU
    st.activations.push_back(std::move(a));
  }
  st.output = (model.weights.back() * st.activations.back()).colwise() +
              model.biases.back();
  return st;
}

double stable_log1p_exp(double t) {
  return t > 0.0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t));
}

}  // namespace

MlpGradients mlp_loss_gradient(const RegressionFit::MlpModel& model,
                               const Eigen::Ref<const MatrixXd>& x_std,
                               const Eigen::Ref<const VectorXd>& y_std,
                               Family family) {
  const long n = x_std.cols();
  const std::size_t layers = model.weights.size();
  ForwardState st = forward(model, x_std);

  MlpGradients g;
  g.d_weights.resize(layers);
  g.d_biases.resize(layers);

  // output-layer delta and loss
  Eigen::RowVectorXd delta(n);
  if (family == Family::gaussian) {
    delta = st.output - y_std.transpose();
    g.loss = 0.5 * delta.squaredNorm() / static_cast<double>(n);
  } else {
    double loss = 0.0;
    for (long i = 0; i < n; ++i) {
      const double o = st.output(i);
      loss += stable_log1p_exp(o) - y_std(i) * o;
      delta(i) = 1.0 / (1.0 + std::exp(-o)) - y_std(i);
    }
    g.loss = loss / static_cast<double>(n);
  }
  delta /= static_cast<double>(n);

  MatrixXd grad_signal = delta;
  for (std::size_t l = layers; l-- > 0;) {
    g.d_weights[l] = grad_signal * st.activations[l].transpose();
    g.d_biases[l] = grad_signal.rowwise().sum();
    if (l > 0) {
      MatrixXd back = model.weights[l].transpose() * grad_signal;
      grad_signal = back.cwiseProduct(
          (st.activations[l].array() > 0.0).cast<double>().matrix());
    }
  }
  return g;
}

RegressionFit fit_mlp(const Eigen::Ref<const MatrixXd>& x,
                      const Eigen::Ref<const VectorXd>& y,
                      const LearnerSpec& spec, std::uint64_t seed) {
  const long n = x.rows(), p = x.cols();
  if (n != y.size()) raise(ErrorCode::dimension_mismatch, "x and y row counts differ");
  if (n < 2) raise(ErrorCode::too_few_rows, "mlp needs at least 2 rows");
  for (int width : spec.mlp.hidden) {
    if (width < 1) raise(ErrorCode::bad_spec, "mlp hidden widths must be >= 1");
  }
  if (spec.mlp.learning_rate != "adaptive" && spec.mlp.learning_rate != "constant") {
    raise(ErrorCode::bad_spec, "mlp learning_rate must be adaptive or constant");
  }

  RegressionFit::MlpModel model;
  model.sigmoid_output = spec.family == Family::binomial;
  model.x_mean.resize(p);
  model.x_scale.resize(p);
  for (long j = 0; j < p; ++j) {
    const double mu = x.col(j).mean();
    const double sd = std::sqrt((x.col(j).array() - mu).square().sum() / static_cast<double>(n));
    model.x_mean(j) = mu;
    model.x_scale(j) = sd > 0.0 ? sd : 1.0;
  }
  if (spec.family == Family::gaussian) {
    model.y_mean = y.mean();
    const double sd = std::sqrt((y.array() - model.y_mean).square().sum() / static_cast<double>(n));
    model.y_scale = sd > 0.0 ? sd : 1.0;
  }

  // standardized training data, one column per sample
  MatrixXd x_std(p, n);
  for (long i = 0; i < n; ++i) {
    x_std.col(i) = (x.row(i).transpose() - model.x_mean).cwiseQuotient(model.x_scale);
  }
  VectorXd y_std = spec.family == Family::gaussian
                       ? ((y.array() - model.y_mean) / model.y_scale).matrix().eval()
                       : VectorXd(y);

  // He-uniform initialization, seeded
  Rng rng(mix_seed(spec.seed.value_or(seed), 0x6d6c7031ULL));
  std::vector<long> dims;
  dims.push_back(p);
  for (int width : spec.mlp.hidden) dims.push_back(width);
  dims.push_back(1);
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    const long fan_in = dims[l], fan_out = dims[l + 1];
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
    MatrixXd w(fan_out, fan_in);
    for (long r = 0; r < fan_out; ++r) {
      for (long c = 0; c < fan_in; ++c) {
        w(r, c) = (2.0 * rng.uniform01() - 1.0) * bound;
      }
    }
    model.weights.push_back(std::move(w));
    model.biases.push_back(VectorXd::Zero(fan_out));
  }

  const std::size_t layers = model.weights.size();
  std::vector<MatrixXd> velocity_w(layers);
  std::vector<VectorXd> velocity_b(layers);
  for (std::size_t l = 0; l < layers; ++l) {
    velocity_w[l] = MatrixXd::Zero(model.weights[l].rows(), model.weights[l].cols());
    velocity_b[l] = VectorXd::Zero(model.biases[l].size());
  }

  const bool adaptive = spec.mlp.learning_rate == "adaptive";
  constexpr double kMomentum = 0.9;
  constexpr double kImprovementTol = 1e-8;
  double step = spec.mlp.init_step;
  const double step_floor = spec.mlp.init_step / 1024.0;
  double best_loss = std::numeric_limits<double>::infinity();
  int stale_epochs = 0;
  int epochs = 0;
  double epoch_loss = 0.0;

  std::vector<long> order(static_cast<std::size_t>(n));
  for (long i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;

  const long batch = std::max(1, std::min<int>(spec.mlp.batch_size, static_cast<int>(n)));
  MatrixXd xb(p, batch);
  VectorXd yb(batch);

  for (int epoch = 0; epoch < spec.mlp.max_iter; ++epoch) {
    rng.shuffle(order);
    double loss_sum = 0.0;
    long seen = 0;
    for (long start = 0; start < n; start += batch) {
      const long b = std::min(batch, n - start);
      for (long i = 0; i < b; ++i) {
        const long row = order[static_cast<std::size_t>(start + i)];
        xb.col(i) = x_std.col(row);
        yb(i) = y_std(row);
      }
      MlpGradients g = mlp_loss_gradient(model, xb.leftCols(b), yb.head(b), spec.family);
      if (!std::isfinite(g.loss)) {
        raise(ErrorCode::non_finite_loss,
              "mlp training diverged at epoch " + std::to_string(epoch) +
                  " (step=" + std::to_string(step) + ")");
      }
      loss_sum += g.loss * static_cast<double>(b);
      seen += b;
      for (std::size_t l = 0; l < layers; ++l) {
        velocity_w[l] = kMomentum * velocity_w[l] - step * g.d_weights[l];
        velocity_b[l] = kMomentum * velocity_b[l] - step * g.d_biases[l];
        model.weights[l] += velocity_w[l];
        model.biases[l] += velocity_b[l];
      }
    }
    epoch_loss = loss_sum / static_cast<double>(seen);
    ++epochs;

    if (epoch_loss < best_loss - kImprovementTol * (1.0 + std::abs(best_loss))) {
      best_loss = epoch_loss;
      stale_epochs = 0;
    } else if (adaptive) {
      if (++stale_epochs >= spec.mlp.patience) {
        stale_epochs = 0;
        if (step <= step_floor) break;  // plateaued at the smallest step
        step *= 0.5;
      }
    }
  }

  RegressionFit fit;
  fit.kind = LearnerKind::mlp;
  fit.family = spec.family;
  fit.mlp = std::move(model);
  fit.epochs_run = epochs;
  fit.final_train_loss = epoch_loss;
  fit.input_width = p;
  return fit;
}

}  // namespace genrel
