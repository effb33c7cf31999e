#include "genscore/select.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "genscore/error.hpp"

namespace genscore {

namespace {

std::vector<double> sorted_target_scores(const ScoreTable& table) {
  std::vector<double> out;
  for (Eigen::Index i = 0; i < table.size(); ++i) {
    if (table.s()[i] == 0) out.push_back(table.kappa[i]);
  }
  if (out.empty()) {
    throw Error(ErrorCode::kDegenerateSubset, "score table has no target units",
                "select");
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

Selection cutoff_at(const ScoreTable& table, double gamma) {
  if (!(gamma > 0.0)) {
    throw Error(ErrorCode::kInvalidInput, "cutoff must be positive", "gamma");
  }
  Selection sel;
  sel.gamma = gamma;
  sel.mask.assign(static_cast<std::size_t>(table.size()), false);
  Eigen::Index n_target = 0;
  Eigen::Index n_source = 0;
  for (Eigen::Index i = 0; i < table.size(); ++i) {
    const bool target = table.s()[i] == 0;
    (target ? n_target : n_source) += 1;
    if (table.kappa[i] <= gamma) {
      sel.mask[static_cast<std::size_t>(i)] = true;
      (target ? sel.n_target_selected : sel.n_source_selected) += 1;
    }
  }
  if (sel.n_target_selected == 0) {
    throw Error(ErrorCode::kDegenerateSubset,
                "no target unit has score at or below the cutoff",
                "gamma=" + std::to_string(gamma));
  }
  sel.target_coverage =
      static_cast<double>(sel.n_target_selected) / static_cast<double>(n_target);
  sel.source_coverage = n_source == 0 ? 0.0
                                      : static_cast<double>(sel.n_source_selected) /
                                            static_cast<double>(n_source);
  sel.v_bound = variance_bound(table, sel.mask);
  return sel;
}

Selection optimal_cutoff(const ScoreTable& table) {
  const std::vector<double> scores = sorted_target_scores(table);
  // Walk the sorted scores; at the last copy of each distinct value the
  // running sum covers exactly {kappa <= value}.
  double best = scores.front();
  double running = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    running += scores[i];
    const bool last_of_run = i + 1 == scores.size() || scores[i + 1] != scores[i];
    if (!last_of_run) continue;
    const double mean = running / static_cast<double>(i + 1);
    if (scores[i] <= 2.0 * mean) best = scores[i];
  }
  if (best <= 0.0) {
    // Every retained target unit has score zero (participation probability
    // one); the smallest positive cutoff selects the same units.
    best = std::numeric_limits<double>::denorm_min();
  }
  return cutoff_at(table, best);
}

double target_percentile(const ScoreTable& table, double percentile) {
  if (!(percentile > 0.0 && percentile <= 100.0)) {
    throw Error(ErrorCode::kInvalidInput, "percentile must lie in (0, 100]",
                "percentile=" + std::to_string(percentile));
  }
  const std::vector<double> scores = sorted_target_scores(table);
  const double m = static_cast<double>(scores.size());
  // Guard against p/100*m landing a hair above an integer.
  auto rank = static_cast<std::size_t>(std::ceil(percentile / 100.0 * m - 1e-9));
  rank = std::clamp<std::size_t>(rank, 1, scores.size());
  return scores[rank - 1];
}

std::vector<SweepRow> sweep(const ScoreTable& table,
                            std::span<const double> percentiles) {
  if (percentiles.empty()) {
    throw Error(ErrorCode::kInvalidInput, "percentile list is empty", "percentiles");
  }
  std::vector<double> ordered(percentiles.begin(), percentiles.end());
  std::sort(ordered.begin(), ordered.end());
  std::vector<SweepRow> rows;
  rows.reserve(ordered.size());
  for (const double p : ordered) {
    double gamma = target_percentile(table, p);
    if (gamma <= 0.0) gamma = std::numeric_limits<double>::denorm_min();
    const Selection sel = cutoff_at(table, gamma);
    rows.push_back(SweepRow{p, sel.gamma, sel.target_coverage, sel.v_bound,
                            std::sqrt(sel.v_bound)});
  }
  return rows;
}

std::vector<double> default_percentiles() {
  std::vector<double> out;
  for (int p = 10; p <= 100; p += 5) out.push_back(p);
  return out;
}

}  // namespace genscore
