#pragma once

#include <span>
#include <vector>

#include "genscore/score.hpp"

namespace genscore {

// A sublevel set {kappa <= gamma} of a score table.
struct Selection {
  double gamma = 0.0;
  Mask mask;
  double target_coverage = 0.0;
  double source_coverage = 0.0;
  double v_bound = 0.0;
  Eigen::Index n_target_selected = 0;
  Eigen::Index n_source_selected = 0;
};

struct SweepRow {
  double percentile = 0.0;
  double gamma = 0.0;
  double target_coverage = 0.0;
  double v_bound = 0.0;
  double v_bound_sqrt = 0.0;
};

// Largest observed target score gamma with
//   gamma <= 2 * mean{kappa_j : target j, kappa_j <= gamma}.
// Throws kDegenerateSubset when the table has no target unit.
Selection optimal_cutoff(const ScoreTable& table);

// Throws kInvalidInput for gamma <= 0 (or NaN) and kDegenerateSubset when no
// target unit falls below gamma. gamma = +inf keeps every unit.
Selection cutoff_at(const ScoreTable& table, double gamma);

// Nearest-rank percentile of the target scores: the ceil(p/100 * m)-th
// smallest of the m target scores, p in (0, 100].
double target_percentile(const ScoreTable& table, double percentile);

std::vector<SweepRow> sweep(const ScoreTable& table,
                            std::span<const double> percentiles);

// 10, 15, ..., 100.
std::vector<double> default_percentiles();

}  // namespace genscore
