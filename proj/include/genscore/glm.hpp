#pragma once

#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace genscore {

// Covariates, one row per unit. The intercept column is never stored; the
// fitters prepend it.
class DesignMatrix {
 public:
  DesignMatrix() = default;
  // Throws kInvalidInput when empty or when any entry is non-finite.
  explicit DesignMatrix(Eigen::MatrixXd values);

  Eigen::Index rows() const noexcept { return values_.rows(); }
  Eigen::Index cols() const noexcept { return values_.cols(); }
  const Eigen::MatrixXd& values() const noexcept { return values_; }

  DesignMatrix select_rows(std::span<const Eigen::Index> rows) const;

 private:
  Eigen::MatrixXd values_;
};

enum class Link { kLogit, kIdentity };

struct FittedGlm {
  Link link = Link::kIdentity;
  // Intercept first, then one entry per feature.
  Eigen::VectorXd coefficients;
  bool converged = false;
  int iterations = 0;
  double deviance = 0.0;
  // Deviance after the initial guess and after each accepted IRLS step.
  std::vector<double> deviance_trace;
  double max_abs_coefficient = 0.0;
  // Set when the logistic fit hit |coefficient| > kSeparationThreshold.
  bool separation_suspected = false;
  bool ridge_applied = false;

  Eigen::Index features() const noexcept { return coefficients.size() - 1; }
};

struct GlmOptions {
  int max_iterations = 100;
  // Stop when |deviance change| < tolerance * (1 + |deviance|).
  double tolerance = 1e-8;
  // Warm start for IRLS; must have features + 1 entries when given.
  std::optional<Eigen::VectorXd> start;
};

inline constexpr double kSeparationThreshold = 30.0;

// Maximum-likelihood logistic regression by IRLS with step halving.
// Weights, when given, act as frequency weights.
FittedGlm fit_logistic(const DesignMatrix& x, const Eigen::VectorXd& y,
                       const Eigen::VectorXd* weights = nullptr,
                       const GlmOptions& options = {});

// Weighted least squares. Throws kInvalidInput on rank deficiency.
FittedGlm fit_linear(const DesignMatrix& x, const Eigen::VectorXd& y,
                     const Eigen::VectorXd* weights = nullptr);

Eigen::VectorXd predict(const FittedGlm& model, const DesignMatrix& x);

// Overflow-safe logistic. Saturates to exactly 0 or 1 for extreme z; score
// validation then reports the unit rather than silently clipping it.
double logistic(double z) noexcept;

}  // namespace genscore
