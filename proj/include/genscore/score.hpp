#pragma once

#include <vector>

#include <Eigen/Dense>

namespace genscore {

// Subset membership over pooled units.
using Mask = std::vector<bool>;

// Per-unit nuisance quantities feeding the generalizability score.
// s is the population indicator: 1 for source units, 0 for target units.
struct ScoreInputs {
  Eigen::VectorXd rho;   // participation probability, in (0, 1]
  Eigen::VectorXd pi;    // propensity score, in (0, 1)
  Eigen::VectorXd var1;  // conditional outcome variance, treated arm
  Eigen::VectorXd var0;  // conditional outcome variance, control arm
  Eigen::VectorXi s;

  // Unit variances in both arms: the outcome-free form of the score.
  static ScoreInputs homoscedastic(Eigen::VectorXd rho, Eigen::VectorXd pi,
                                   Eigen::VectorXi s);

  Eigen::Index size() const noexcept { return rho.size(); }

  // Throws kInvalidInput on length/variance problems and kPositivity, with
  // the offending unit indices, when rho == 0 or pi is 0 or 1.
  void validate() const;
};

struct ScoreTable {
  Eigen::VectorXd kappa;
  ScoreInputs inputs;
  bool nested = false;

  Eigen::Index size() const noexcept { return kappa.size(); }
  const Eigen::VectorXi& s() const noexcept { return inputs.s; }
};

// kappa = (1 - rho) / rho * (var1 / pi + var0 / (1 - pi)).
ScoreTable kappa(ScoreInputs inputs);

// Nested-design score: var1 / (rho pi) + var0 / (rho (1 - pi)).
ScoreTable kappa_nested(ScoreInputs inputs);

// Monotone map of [0, inf) onto [0, 1) for plotting: k / (16 + k).
double kappa_display(double k);

// Plug-in variance bound of the subpopulation selected by mask:
//   mean(kappa over target units in mask) / (target units in mask / all units).
// Throws kDegenerateSubset when the mask keeps no target unit.
double variance_bound(const ScoreTable& table, const Mask& mask);

// Heteroscedastic plug-in: for every unit, the mean squared residual over its
// k nearest source units in the given arm (Euclidean distance on standardised
// covariates), k = ceil(sqrt(arm size)).
Eigen::VectorXd knn_residual_variance(const Eigen::MatrixXd& x,
                                      const Eigen::VectorXi& s,
                                      const Eigen::VectorXi& a,
                                      const Eigen::VectorXd& squared_residuals,
                                      int arm);

}  // namespace genscore
