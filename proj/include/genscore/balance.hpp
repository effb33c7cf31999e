#pragma once

#include <span>
#include <string>
#include <vector>

#include "genscore/dataset.hpp"

namespace genscore {

struct AnovaResult {
  double f = 0.0;  // +inf when the within-group sum of squares is zero
  double p = 1.0;
  int df_between = 0;
  int df_within = 0;
  bool degenerate = false;
};

// One-way ANOVA with frequency-style weights: weighted between/within sums of
// squares, degrees of freedom (k - 1, n - k) from unit counts. group[i] is in
// [0, k); every group must be nonempty.
AnovaResult one_way_anova(std::span<const double> values, std::span<const int> group,
                          std::span<const double> weights, int k);

struct BalanceRow {
  std::string variable;
  double f_unweighted = 0.0;
  double p_unweighted = 1.0;
  double f_weighted = 0.0;
  double p_weighted = 1.0;
  bool subset = false;
  std::vector<std::string> warnings;
};

// Per covariate, ANOVA across treated source, control source and target units
// inside the mask, unweighted and with the inverse-probability weights
// (w1 for treated, w0 for control, 1 for target).
std::vector<BalanceRow> balance_table(const Dataset& data,
                                      const Eigen::VectorXd& rho_hat,
                                      const Eigen::VectorXd& pi_hat, const Mask& mask);

}  // namespace genscore
