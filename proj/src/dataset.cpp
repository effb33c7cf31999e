#include "genscore/dataset.hpp"

#include <cmath>

#include "genscore/error.hpp"

namespace genscore {

void Dataset::validate() const {
  const Eigen::Index n = size();
  if (s.size() != n || a.size() != n || y.size() != n) {
    throw Error(ErrorCode::kInvalidInput,
                "indicator, treatment and outcome lengths must match covariate rows",
                "dataset");
  }
  if (!covariate_names.empty() &&
      static_cast<Eigen::Index>(covariate_names.size()) != x.cols()) {
    throw Error(ErrorCode::kInvalidInput, "covariate name count mismatch", "dataset");
  }
  Eigen::Index treated = 0;
  Eigen::Index control = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const std::string row = "row " + std::to_string(i);
    if (s[i] == 1) {
      if (a[i] != 0 && a[i] != 1) {
        throw Error(ErrorCode::kInvalidInput, "source unit needs treatment 0 or 1", row);
      }
      if (!std::isfinite(y[i])) {
        throw Error(ErrorCode::kInvalidInput, "source unit needs a finite outcome", row);
      }
      if (outcome_kind == OutcomeKind::kBinary && y[i] != 0.0 && y[i] != 1.0) {
        throw Error(ErrorCode::kInvalidInput, "binary outcome must be 0 or 1", row);
      }
      (a[i] == 1 ? treated : control) += 1;
    } else if (s[i] == 0) {
      if (a[i] != kMissingTreatment || !std::isnan(y[i])) {
        throw Error(ErrorCode::kInvalidInput,
                    "target unit must not carry treatment or outcome", row);
      }
    } else {
      throw Error(ErrorCode::kInvalidInput, "population indicator must be 0 or 1", row);
    }
  }
  if (treated == 0 || control == 0) {
    throw Error(ErrorCode::kDegenerateSubset,
                "both treatment arms must be present in the source sample",
                treated == 0 ? "arm 1" : "arm 0");
  }
}

Dataset Dataset::select_rows(std::span<const Eigen::Index> rows) const {
  Dataset out;
  out.x = x.select_rows(rows);
  const auto m = static_cast<Eigen::Index>(rows.size());
  out.s.resize(m);
  out.a.resize(m);
  out.y.resize(m);
  for (Eigen::Index r = 0; r < m; ++r) {
    const Eigen::Index i = rows[static_cast<std::size_t>(r)];
    out.s[r] = s[i];
    out.a[r] = a[i];
    out.y[r] = y[i];
  }
  out.outcome_kind = outcome_kind;
  out.covariate_names = covariate_names;
  return out;
}

std::vector<Eigen::Index> mask_indices(const Mask& mask) {
  std::vector<Eigen::Index> out;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i]) out.push_back(static_cast<Eigen::Index>(i));
  }
  return out;
}

Mask full_mask(Eigen::Index n) { return Mask(static_cast<std::size_t>(n), true); }

}  // namespace genscore
