#include "genscore/balance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/distributions/fisher_f.hpp>

#include "genscore/error.hpp"
#include "genscore/estimate.hpp"

namespace genscore {

AnovaResult one_way_anova(std::span<const double> values, std::span<const int> group,
                          std::span<const double> weights, int k) {
  const std::size_t n = values.size();
  if (group.size() != n || weights.size() != n || k < 2) {
    throw Error(ErrorCode::kInvalidInput, "anova inputs have unequal lengths", "anova");
  }
  std::vector<double> wsum(static_cast<std::size_t>(k), 0.0);
  std::vector<double> wxsum(static_cast<std::size_t>(k), 0.0);
  std::vector<std::size_t> count(static_cast<std::size_t>(k), 0);
  for (std::size_t i = 0; i < n; ++i) {
    if (group[i] < 0 || group[i] >= k) {
      throw Error(ErrorCode::kInvalidInput, "group label out of range", "anova");
    }
    const auto g = static_cast<std::size_t>(group[i]);
    wsum[g] += weights[i];
    wxsum[g] += weights[i] * values[i];
    ++count[g];
  }
  for (int g = 0; g < k; ++g) {
    if (count[static_cast<std::size_t>(g)] == 0 || !(wsum[static_cast<std::size_t>(g)] > 0.0)) {
      throw Error(ErrorCode::kDegenerateSubset, "anova group is empty",
                  "group " + std::to_string(g));
    }
  }
  if (n <= static_cast<std::size_t>(k)) {
    throw Error(ErrorCode::kDegenerateSubset, "too few units for anova", "anova");
  }
  double total_w = 0.0, total_wx = 0.0;
  std::vector<double> mean(static_cast<std::size_t>(k));
  for (std::size_t g = 0; g < mean.size(); ++g) {
    mean[g] = wxsum[g] / wsum[g];
    total_w += wsum[g];
    total_wx += wxsum[g];
  }
  const double grand = total_wx / total_w;
  double between = 0.0;
  for (std::size_t g = 0; g < mean.size(); ++g) {
    between += wsum[g] * (mean[g] - grand) * (mean[g] - grand);
  }
  double within = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = values[i] - mean[static_cast<std::size_t>(group[i])];
    within += weights[i] * d * d;
  }

  AnovaResult r;
  r.df_between = k - 1;
  r.df_within = static_cast<int>(n) - k;
  if (!(within > 0.0)) {
    r.degenerate = true;
    r.f = std::numeric_limits<double>::infinity();
    r.p = 0.0;
    return r;
  }
  r.f = (between / r.df_between) / (within / r.df_within);
  const boost::math::fisher_f dist(r.df_between, r.df_within);
  r.p = boost::math::cdf(boost::math::complement(dist, r.f));
  return r;
}

std::vector<BalanceRow> balance_table(const Dataset& data,
                                      const Eigen::VectorXd& rho_hat,
                                      const Eigen::VectorXd& pi_hat, const Mask& mask) {
  if (static_cast<Eigen::Index>(mask.size()) != data.size() ||
      rho_hat.size() != data.size() || pi_hat.size() != data.size()) {
    throw Error(ErrorCode::kInvalidInput, "balance inputs have unequal lengths",
                "balance");
  }
  const Weights w = weights(rho_hat, pi_hat);
  std::vector<Eigen::Index> rows;
  std::vector<int> group;
  std::vector<double> ipw;
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    if (!mask[static_cast<std::size_t>(i)]) continue;
    rows.push_back(i);
    if (data.s[i] == 0) {
      group.push_back(2);
      ipw.push_back(1.0);
    } else if (data.a[i] == 1) {
      group.push_back(0);
      ipw.push_back(w.w1[i]);
    } else {
      group.push_back(1);
      ipw.push_back(w.w0[i]);
    }
  }
  const std::vector<double> unit(rows.size(), 1.0);
  const bool subset = rows.size() != mask.size();

  std::vector<BalanceRow> table;
  std::vector<double> column(rows.size());
  for (Eigen::Index j = 0; j < data.x.cols(); ++j) {
    for (std::size_t r = 0; r < rows.size(); ++r) column[r] = data.x.values()(rows[r], j);
    BalanceRow row;
    row.variable = j < static_cast<Eigen::Index>(data.covariate_names.size())
                       ? data.covariate_names[static_cast<std::size_t>(j)]
                       : "x" + std::to_string(j + 1);
    row.subset = subset;
    const AnovaResult plain = one_way_anova(column, group, unit, 3);
    const AnovaResult weighted = one_way_anova(column, group, ipw, 3);
    row.f_unweighted = plain.f;
    row.p_unweighted = plain.p;
    row.f_weighted = weighted.f;
    row.p_weighted = weighted.p;
    if (plain.degenerate || weighted.degenerate) {
      row.warnings.push_back("zero within-group variance; F reported as +inf");
    }
    table.push_back(std::move(row));
  }
  return table;
}

}  // namespace genscore
