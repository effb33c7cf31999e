#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "genscore/glm.hpp"
#include "genscore/score.hpp"

namespace genscore {

enum class OutcomeKind { kContinuous, kBinary };

inline constexpr int kMissingTreatment = -1;

// Pooled source/target sample. Treatment and outcome exist only for source
// units; target rows carry kMissingTreatment and NaN.
struct Dataset {
  DesignMatrix x;
  Eigen::VectorXi s;
  Eigen::VectorXi a;
  Eigen::VectorXd y;
  OutcomeKind outcome_kind = OutcomeKind::kContinuous;
  std::vector<std::string> covariate_names;

  Eigen::Index size() const noexcept { return x.rows(); }
  Eigen::Index n_source() const noexcept { return s.sum(); }
  Eigen::Index n_target() const noexcept { return size() - n_source(); }

  // Throws kInvalidInput naming the first offending row.
  void validate() const;

  Dataset select_rows(std::span<const Eigen::Index> rows) const;
};

std::vector<Eigen::Index> mask_indices(const Mask& mask);
Mask full_mask(Eigen::Index n);

}  // namespace genscore
