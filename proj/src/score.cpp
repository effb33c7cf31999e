#include "genscore/score.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "genscore/error.hpp"

namespace genscore {

namespace {

std::string index_list(const std::vector<Eigen::Index>& idx) {
  std::string out;
  const std::size_t shown = std::min<std::size_t>(idx.size(), 20);
  for (std::size_t i = 0; i < shown; ++i) {
    if (i) out += ",";
    out += std::to_string(idx[i]);
  }
  if (idx.size() > shown) out += ",...(" + std::to_string(idx.size()) + " total)";
  return out;
}

}  // namespace

ScoreInputs ScoreInputs::homoscedastic(Eigen::VectorXd rho, Eigen::VectorXd pi,
                                       Eigen::VectorXi s) {
  const Eigen::Index n = rho.size();
  return ScoreInputs{std::move(rho), std::move(pi), Eigen::VectorXd::Ones(n),
                     Eigen::VectorXd::Ones(n), std::move(s)};
}

void ScoreInputs::validate() const {
  const Eigen::Index n = rho.size();
  if (pi.size() != n || var1.size() != n || var0.size() != n || s.size() != n) {
    throw Error(ErrorCode::kInvalidInput, "score inputs have unequal lengths",
                "score_inputs");
  }
  std::vector<Eigen::Index> bad_rho, bad_pi, bad_var;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(rho[i] > 0.0 && rho[i] <= 1.0)) bad_rho.push_back(i);
    if (!(pi[i] > 0.0 && pi[i] < 1.0)) bad_pi.push_back(i);
    if (!(var1[i] >= 0.0 && var0[i] >= 0.0) || !std::isfinite(var1[i]) ||
        !std::isfinite(var0[i])) {
      bad_var.push_back(i);
    }
    if (s[i] != 0 && s[i] != 1) {
      throw Error(ErrorCode::kInvalidInput, "population indicator must be 0 or 1",
                  "unit " + std::to_string(i));
    }
  }
  if (!bad_rho.empty()) {
    throw Error(ErrorCode::kPositivity,
                "participation probability outside (0, 1]",
                "units " + index_list(bad_rho));
  }
  if (!bad_pi.empty()) {
    throw Error(ErrorCode::kPositivity, "propensity score outside (0, 1)",
                "units " + index_list(bad_pi));
  }
  if (!bad_var.empty()) {
    throw Error(ErrorCode::kInvalidInput,
                "outcome variances must be finite and nonnegative",
                "units " + index_list(bad_var));
  }
}

ScoreTable kappa(ScoreInputs inputs) {
  inputs.validate();
  const auto& in = inputs;
  Eigen::VectorXd k(in.size());
  for (Eigen::Index i = 0; i < in.size(); ++i) {
    k[i] = (1.0 - in.rho[i]) / in.rho[i] *
           (in.var1[i] / in.pi[i] + in.var0[i] / (1.0 - in.pi[i]));
  }
  return ScoreTable{std::move(k), std::move(inputs), false};
}

ScoreTable kappa_nested(ScoreInputs inputs) {
  inputs.validate();
  const auto& in = inputs;
  Eigen::VectorXd k(in.size());
  for (Eigen::Index i = 0; i < in.size(); ++i) {
    k[i] = in.var1[i] / (in.rho[i] * in.pi[i]) +
           in.var0[i] / (in.rho[i] * (1.0 - in.pi[i]));
  }
  return ScoreTable{std::move(k), std::move(inputs), true};
}

double kappa_display(double k) {
  if (!(k >= 0.0)) {
    throw Error(ErrorCode::kInvalidInput, "score must be nonnegative",
                "kappa_display");
  }
  if (std::isinf(k)) return 1.0;
  return k / (16.0 + k);
}

double variance_bound(const ScoreTable& table, const Mask& mask) {
  const Eigen::Index n = table.size();
  if (static_cast<Eigen::Index>(mask.size()) != n) {
    throw Error(ErrorCode::kInvalidInput, "mask length does not match score table",
                "mask");
  }
  double sum = 0.0;
  Eigen::Index count = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (mask[static_cast<std::size_t>(i)] && table.s()[i] == 0) {
      sum += table.kappa[i];
      ++count;
    }
  }
  if (count == 0) {
    throw Error(ErrorCode::kDegenerateSubset, "subset contains no target units",
                "variance_bound");
  }
  const double mean_kappa = sum / static_cast<double>(count);
  const double share = static_cast<double>(count) / static_cast<double>(n);
  return mean_kappa / share;
}

Eigen::VectorXd knn_residual_variance(const Eigen::MatrixXd& x,
                                      const Eigen::VectorXi& s,
                                      const Eigen::VectorXi& a,
                                      const Eigen::VectorXd& squared_residuals,
                                      int arm) {
  const Eigen::Index n = x.rows();
  if (s.size() != n || a.size() != n || squared_residuals.size() != n) {
    throw Error(ErrorCode::kInvalidInput, "length mismatch", "knn_residual_variance");
  }
  std::vector<Eigen::Index> donors;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (s[i] == 1 && a[i] == arm) donors.push_back(i);
  }
  if (donors.empty()) {
    throw Error(ErrorCode::kDegenerateSubset, "treatment arm is empty",
                "arm " + std::to_string(arm));
  }
  const auto k = static_cast<std::size_t>(
      std::ceil(std::sqrt(static_cast<double>(donors.size()))));

  Eigen::RowVectorXd mean = x.colwise().mean();
  Eigen::RowVectorXd scale =
      ((x.rowwise() - mean).array().square().colwise().sum() /
       std::max<double>(1.0, static_cast<double>(n - 1)))
          .sqrt();
  for (Eigen::Index j = 0; j < scale.size(); ++j) {
    if (!(scale[j] > 0.0)) scale[j] = 1.0;
  }
  const Eigen::MatrixXd z = (x.rowwise() - mean).array().rowwise() / scale.array();

  Eigen::VectorXd out(n);
  std::vector<std::pair<double, Eigen::Index>> dist(donors.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    for (std::size_t d = 0; d < donors.size(); ++d) {
      dist[d] = {(z.row(i) - z.row(donors[d])).squaredNorm(), donors[d]};
    }
    std::nth_element(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k - 1),
                     dist.end());
    double acc = 0.0;
    for (std::size_t d = 0; d < k; ++d) acc += squared_residuals[dist[d].second];
    out[i] = acc / static_cast<double>(k);
  }
  return out;
}

}  // namespace genscore
