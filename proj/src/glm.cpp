#include "genscore/glm.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "genscore/error.hpp"

namespace genscore {

namespace {

// Inside IRLS only: |eta| beyond this gives working weights below 2.3e-16.
constexpr double kMaxLinearPredictor = 36.0;
constexpr int kMaxStepHalvings = 30;

Eigen::MatrixXd with_intercept(const DesignMatrix& x) {
  Eigen::MatrixXd out(x.rows(), x.cols() + 1);
  out.col(0).setOnes();
  out.rightCols(x.cols()) = x.values();
  return out;
}

Eigen::VectorXd resolve_weights(const DesignMatrix& x, const Eigen::VectorXd& y,
                                const Eigen::VectorXd* weights) {
  if (y.size() != x.rows()) {
    throw Error(ErrorCode::kInvalidInput,
                "response length " + std::to_string(y.size()) +
                    " does not match design rows " + std::to_string(x.rows()),
                "y");
  }
  if (weights == nullptr) return Eigen::VectorXd::Ones(x.rows());
  if (weights->size() != x.rows()) {
    throw Error(ErrorCode::kInvalidInput,
                "weight length does not match design rows", "weights");
  }
  if (!weights->allFinite() || (weights->array() < 0.0).any() ||
      !(weights->sum() > 0.0)) {
    throw Error(ErrorCode::kInvalidInput,
                "weights must be finite, nonnegative, with positive sum",
                "weights");
  }
  return *weights;
}

double bounded_logistic(double z) {
  return logistic(std::clamp(z, -kMaxLinearPredictor, kMaxLinearPredictor));
}

// log(1 + exp(z)) without overflow.
double softplus(double z) {
  return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

double logistic_deviance(const Eigen::VectorXd& eta, const Eigen::VectorXd& y,
                         const Eigen::VectorXd& w) {
  double dev = 0.0;
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    const double e = std::clamp(eta[i], -kMaxLinearPredictor, kMaxLinearPredictor);
    dev += w[i] * (y[i] * softplus(-e) + (1.0 - y[i]) * softplus(e));
  }
  return 2.0 * dev;
}

// Solves hessian * step = score, adding a small ridge once if the Cholesky
// factorisation fails or is numerically singular.
Eigen::VectorXd newton_step(Eigen::MatrixXd hessian, const Eigen::VectorXd& score,
                            bool& ridge_applied) {
  Eigen::LLT<Eigen::MatrixXd> llt(hessian);
  if (llt.info() == Eigen::Success && llt.rcond() > 1e-13) {
    return llt.solve(score);
  }
  const double ridge =
      1e-8 * hessian.trace() / static_cast<double>(hessian.rows());
  hessian.diagonal().array() += std::max(ridge, 1e-300);
  llt.compute(hessian);
  if (llt.info() != Eigen::Success || !(llt.rcond() > 0.0)) {
    throw Error(ErrorCode::kConvergence,
                "working Hessian is singular even after ridge fallback",
                "irls");
  }
  ridge_applied = true;
  return llt.solve(score);
}

}  // namespace

DesignMatrix::DesignMatrix(Eigen::MatrixXd values) : values_(std::move(values)) {
  if (values_.rows() < 1 || values_.cols() < 1) {
    throw Error(ErrorCode::kInvalidInput,
                "design matrix needs at least one row and one column",
                "design");
  }
  if (!values_.allFinite()) {
    for (Eigen::Index i = 0; i < values_.rows(); ++i) {
      if (!values_.row(i).allFinite()) {
        throw Error(ErrorCode::kInvalidInput,
                    "non-finite covariate value", "row " + std::to_string(i));
      }
    }
  }
}

DesignMatrix DesignMatrix::select_rows(std::span<const Eigen::Index> rows) const {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), values_.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    out.row(static_cast<Eigen::Index>(r)) = values_.row(rows[r]);
  }
  return DesignMatrix(std::move(out));
}

double logistic(double z) noexcept {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double t = std::exp(z);
  return t / (1.0 + t);
}

FittedGlm fit_logistic(const DesignMatrix& x, const Eigen::VectorXd& y,
                       const Eigen::VectorXd* weights, const GlmOptions& options) {
  const Eigen::VectorXd w = resolve_weights(x, y, weights);
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (y[i] != 0.0 && y[i] != 1.0) {
      throw Error(ErrorCode::kInvalidInput, "logistic response must be 0 or 1",
                  "row " + std::to_string(i));
    }
  }
  const Eigen::MatrixXd design = with_intercept(x);
  const Eigen::Index p = design.cols();

  FittedGlm fit;
  fit.link = Link::kLogit;
  fit.coefficients = Eigen::VectorXd::Zero(p);
  if (options.start) {
    if (options.start->size() != p) {
      throw Error(ErrorCode::kInvalidInput, "warm start has wrong length",
                  "start");
    }
    fit.coefficients = *options.start;
  }

  Eigen::VectorXd eta = design * fit.coefficients;
  double deviance = logistic_deviance(eta, y, w);
  fit.deviance_trace.push_back(deviance);

  Eigen::VectorXd prob(y.size());
  for (int iter = 1; iter <= options.max_iterations; ++iter) {
    fit.iterations = iter;
    Eigen::VectorXd working(y.size());
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
      prob[i] = bounded_logistic(eta[i]);
      working[i] = w[i] * prob[i] * (1.0 - prob[i]);
    }
    const Eigen::VectorXd score = design.transpose() * (w.array() * (y - prob).array()).matrix();
    Eigen::MatrixXd hessian(p, p);
    hessian.setZero();
    hessian.selfadjointView<Eigen::Lower>().rankUpdate(
        design.transpose() * working.cwiseSqrt().asDiagonal());
    hessian = hessian.selfadjointView<Eigen::Lower>();

    Eigen::VectorXd step = newton_step(std::move(hessian), score, fit.ridge_applied);

    // Step halving keeps the deviance sequence non-increasing.
    Eigen::VectorXd candidate = fit.coefficients + step;
    Eigen::VectorXd candidate_eta = design * candidate;
    double candidate_dev = logistic_deviance(candidate_eta, y, w);
    int halvings = 0;
    while (!(candidate_dev <= deviance) && halvings < kMaxStepHalvings) {
      step *= 0.5;
      candidate = fit.coefficients + step;
      candidate_eta = design * candidate;
      candidate_dev = logistic_deviance(candidate_eta, y, w);
      ++halvings;
    }
    if (!(candidate_dev <= deviance)) {
      // No descent direction left: we are at the optimum to working precision.
      fit.converged = true;
      break;
    }
    const double change = deviance - candidate_dev;
    fit.coefficients = std::move(candidate);
    eta = std::move(candidate_eta);
    deviance = candidate_dev;
    fit.deviance_trace.push_back(deviance);
    if (change < options.tolerance * (1.0 + std::abs(deviance))) {
      fit.converged = true;
      break;
    }
  }

  fit.deviance = deviance;
  fit.max_abs_coefficient = fit.coefficients.cwiseAbs().maxCoeff();

  // Complete separation shows up as every unit fitted to its label; partial
  // separation as coefficients drifting without bound.
  double max_residual = 0.0;
  for (Eigen::Index i = 0; i < eta.size(); ++i) {
    if (w[i] > 0.0) max_residual = std::max(max_residual, std::abs(y[i] - logistic(eta[i])));
  }
  if (!fit.coefficients.allFinite() ||
      fit.max_abs_coefficient > kSeparationThreshold || max_residual < 1e-6) {
    fit.separation_suspected = true;
    fit.converged = false;
  }
  return fit;
}

FittedGlm fit_linear(const DesignMatrix& x, const Eigen::VectorXd& y,
                     const Eigen::VectorXd* weights) {
  const Eigen::VectorXd w = resolve_weights(x, y, weights);
  if (!y.allFinite()) {
    throw Error(ErrorCode::kInvalidInput, "non-finite response", "y");
  }
  const Eigen::VectorXd root_w = w.cwiseSqrt();
  const Eigen::MatrixXd design = root_w.asDiagonal() * with_intercept(x);
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  if (qr.rank() < design.cols()) {
    throw Error(ErrorCode::kInvalidInput,
                "design with intercept is rank deficient (rank " +
                    std::to_string(qr.rank()) + " of " +
                    std::to_string(design.cols()) + ")",
                "design");
  }
  FittedGlm fit;
  fit.link = Link::kIdentity;
  fit.coefficients = qr.solve((root_w.array() * y.array()).matrix());
  const Eigen::VectorXd resid = y - with_intercept(x) * fit.coefficients;
  fit.deviance = (w.array() * resid.array().square()).sum();
  fit.deviance_trace = {fit.deviance};
  fit.converged = fit.coefficients.allFinite();
  fit.iterations = 1;
  fit.max_abs_coefficient = fit.coefficients.cwiseAbs().maxCoeff();
  return fit;
}

Eigen::VectorXd predict(const FittedGlm& model, const DesignMatrix& x) {
  if (x.cols() != model.features()) {
    throw Error(ErrorCode::kInvalidInput,
                "model has " + std::to_string(model.features()) +
                    " features but design has " + std::to_string(x.cols()),
                "predict");
  }
  Eigen::VectorXd eta =
      (x.values() * model.coefficients.tail(model.features())).array() +
      model.coefficients[0];
  if (model.link == Link::kLogit) {
    for (Eigen::Index i = 0; i < eta.size(); ++i) eta[i] = logistic(eta[i]);
  }
  return eta;
}

}  // namespace genscore
