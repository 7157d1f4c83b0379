#include "core/learners.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <sstream>
#include <string>

#include "core/errors.hpp"

namespace genrel {

using Eigen::MatrixXd;
using Eigen::VectorXd;

const char* learner_kind_name(LearnerKind k) {
  switch (k) {
    case LearnerKind::lasso: return "lasso";
    case LearnerKind::ridge: return "ridge";
    case LearnerKind::mlp: return "mlp";
    case LearnerKind::oracle: return "oracle";
    case LearnerKind::constant: return "constant";
  }
  return "?";
}

const char* family_name(Family f) {
  return f == Family::gaussian ? "gaussian" : "binomial";
}

std::string LearnerSpec::describe() const {
  std::ostringstream out;
  out << learner_kind_name(kind);
  switch (kind) {
    case LearnerKind::lasso:
      out << "(family=" << family_name(family) << ",cv_folds=" << lasso.cv_folds
          << ",grid=" << lasso.lambda_grid_size << ",max_iter=" << lasso.max_iter
          << ",tol=" << lasso.tol;
      if (lasso.fixed_lambda) out << ",lambda=" << *lasso.fixed_lambda;
      out << ")";
      break;
    case LearnerKind::ridge:
      out << "(lambda=" << ridge.lambda << ")";
      break;
    case LearnerKind::mlp: {
      out << "(family=" << family_name(family) << ",hidden=";
      for (std::size_t i = 0; i < mlp.hidden.size(); ++i) {
        out << (i ? "x" : "") << mlp.hidden[i];
      }
      out << ",max_iter=" << mlp.max_iter << ",rate=" << mlp.learning_rate
          << ",batch=" << mlp.batch_size << ",step=" << mlp.init_step
          << ",patience=" << mlp.patience << ")";
      break;
    }
    case LearnerKind::oracle:
      out << "(true regression function)";
      break;
    case LearnerKind::constant:
      out << "(" << constant_value << ")";
      break;
  }
  return out.str();
}

RegressionFit fit_ridge(const Eigen::Ref<const MatrixXd>& x,
                        const Eigen::Ref<const VectorXd>& y, double lambda) {
  const long n = x.rows(), p = x.cols();
  if (n != y.size()) raise(ErrorCode::dimension_mismatch, "x and y row counts differ");
  if (n < 1) raise(ErrorCode::too_few_rows, "ridge needs at least one row");
  if (lambda < 0.0) raise(ErrorCode::bad_spec, "ridge lambda must be >= 0");

  const Eigen::RowVectorXd mean = x.colwise().mean();
  const MatrixXd xc = x.rowwise() - mean;
  const double ybar = y.mean();
  const VectorXd yc = y.array() - ybar;

  // (Xc'Xc/n + lambda I) beta = Xc'yc/n; the intercept is unpenalized.
  MatrixXd gram = xc.transpose() * xc / static_cast<double>(n);
  const VectorXd rhs = xc.transpose() * yc / static_cast<double>(n);

  VectorXd beta;
  if (lambda == 0.0) {
    Eigen::FullPivLU<MatrixXd> lu(gram);
    if (!lu.isInvertible()) {
      raise(ErrorCode::singular_system, "gram matrix is rank-deficient and lambda is 0");
    }
    beta = lu.solve(rhs);
  } else {
    gram.diagonal().array() += lambda;
    beta = Eigen::LLT<MatrixXd>(gram).solve(rhs);
  }

  RegressionFit fit;
  fit.kind = LearnerKind::ridge;
  fit.family = Family::gaussian;
  fit.coef = beta;
  fit.intercept = ybar - mean.dot(beta);
  fit.selected_lambda = lambda;
  fit.input_width = p;
  return fit;
}

RegressionFit fit_learner(const Eigen::Ref<const MatrixXd>& x,
                          const Eigen::Ref<const VectorXd>& y,
                          const LearnerSpec& spec, std::uint64_t seed) {
  switch (spec.kind) {
    case LearnerKind::lasso:
      return fit_lasso(x, y, spec, seed);
    case LearnerKind::ridge:
      return fit_ridge(x, y, spec.ridge.lambda);
    case LearnerKind::mlp:
      return fit_mlp(x, y, spec, seed);
    case LearnerKind::oracle: {
      if (!spec.oracle_fn) {
        raise(ErrorCode::unsupported, "oracle learner has no bound regression function");
      }
      RegressionFit fit;
      fit.kind = LearnerKind::oracle;
      fit.family = spec.family;
      fit.oracle_fn = spec.oracle_fn;
      return fit;
    }
    case LearnerKind::constant: {
      RegressionFit fit;
      fit.kind = LearnerKind::constant;
      fit.family = spec.family;
      fit.constant_value = spec.constant_value;
      return fit;
    }
  }
  raise(ErrorCode::internal, "unhandled learner kind");
}

VectorXd predict(const RegressionFit& fit, const Eigen::Ref<const MatrixXd>& x) {
  const long n = x.rows();
  if (fit.input_width != 0 && x.cols() != fit.input_width) {
    raise(ErrorCode::dimension_mismatch,
          "predict called with " + std::to_string(x.cols()) + " columns, trained on " +
              std::to_string(fit.input_width));
  }

  switch (fit.kind) {
    case LearnerKind::lasso:
    case LearnerKind::ridge: {
      VectorXd eta = (x * fit.coef).array() + fit.intercept;
      if (fit.family == Family::binomial) {
        eta = eta.unaryExpr([](double t) { return 1.0 / (1.0 + std::exp(-t)); });
      }
      return eta;
    }
    case LearnerKind::mlp: {
      const auto& m = *fit.mlp;
      MatrixXd x_std(x.cols(), n);
      for (long i = 0; i < n; ++i) {
        x_std.col(i) = (x.row(i).transpose() - m.x_mean).cwiseQuotient(m.x_scale);
      }
      MatrixXd a = x_std;
      for (std::size_t l = 0; l + 1 < m.weights.size(); ++l) {
        a = ((m.weights[l] * a).colwise() + m.biases[l]).cwiseMax(0.0);
      }
      Eigen::RowVectorXd out = (m.weights.back() * a).colwise() + m.biases.back();
      VectorXd pred(n);
      for (long i = 0; i < n; ++i) {
        pred(i) = m.sigmoid_output ? 1.0 / (1.0 + std::exp(-out(i)))
                                   : m.y_mean + m.y_scale * out(i);
      }
      return pred;
    }
    case LearnerKind::oracle: {
      VectorXd pred(n);
      for (long i = 0; i < n; ++i) pred(i) = fit.oracle_fn(x.row(i));
      return pred;
    }
    case LearnerKind::constant:
      return VectorXd::Constant(n, fit.constant_value);
  }
  raise(ErrorCode::internal, "unhandled fit kind");
}

}  // namespace genrel
