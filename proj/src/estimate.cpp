#include "genscore/estimate.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "genscore/error.hpp"
#include "genscore/parallel.hpp"

namespace genscore {

namespace {

struct SubsetCounts {
  Eigen::Index target = 0;
  Eigen::Index treated = 0;
  Eigen::Index control = 0;
};

SubsetCounts count_subset(const Dataset& data, const Mask& mask) {
  SubsetCounts c;
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    if (!mask[static_cast<std::size_t>(i)]) continue;
    if (data.s[i] == 0) {
      ++c.target;
    } else {
      (data.a[i] == 1 ? c.treated : c.control) += 1;
    }
  }
  return c;
}

void require_nonempty(const SubsetCounts& c) {
  if (c.target == 0) {
    throw Error(ErrorCode::kDegenerateSubset, "subset has no target units", "target");
  }
  if (c.treated == 0) {
    throw Error(ErrorCode::kDegenerateSubset, "subset has no treated source units",
                "arm 1");
  }
  if (c.control == 0) {
    throw Error(ErrorCode::kDegenerateSubset, "subset has no control source units",
                "arm 0");
  }
}

void note_fit(const FittedGlm& fit, std::string_view name,
              std::vector<std::string>& warnings) {
  if (fit.separation_suspected) {
    warnings.push_back(std::string(name) +
                       ": possible separation (max |coefficient| " +
                       std::to_string(fit.max_abs_coefficient) + ")");
  } else if (!fit.converged) {
    warnings.push_back(std::string(name) + ": IRLS did not converge");
  }
}

FittedGlm fit_outcome(const DesignMatrix& x, const Eigen::VectorXd& y,
                      OutcomeKind kind) {
  return kind == OutcomeKind::kBinary ? fit_logistic(x, y) : fit_linear(x, y);
}

}  // namespace

std::string_view to_string(Method method) {
  switch (method) {
    case Method::kIpw:
      return "ipw";
    case Method::kOutcomeRegression:
      return "or";
    case Method::kAipw:
      return "aipw";
  }
  return "?";
}

std::string_view to_string(Estimand estimand) {
  return estimand == Estimand::kFullTarget ? "full_target" : "subset";
}

Method parse_method(std::string_view name) {
  if (name == "ipw") return Method::kIpw;
  if (name == "or") return Method::kOutcomeRegression;
  if (name == "aipw") return Method::kAipw;
  throw Error(ErrorCode::kInvalidInput, "unknown method '" + std::string(name) + "'",
              "method");
}

Weights weights(const Eigen::VectorXd& rho_hat, const Eigen::VectorXd& pi_hat) {
  if (rho_hat.size() != pi_hat.size()) {
    throw Error(ErrorCode::kInvalidInput, "rho and pi lengths differ", "weights");
  }
  Weights w{Eigen::VectorXd(rho_hat.size()), Eigen::VectorXd(rho_hat.size())};
  for (Eigen::Index i = 0; i < rho_hat.size(); ++i) {
    const double rho = rho_hat[i];
    const double pi = pi_hat[i];
    if (!(rho > 0.0 && rho <= 1.0) || !(pi > 0.0 && pi < 1.0)) {
      throw Error(ErrorCode::kPositivity,
                  "probabilities outside their open ranges",
                  "unit " + std::to_string(i));
    }
    const double odds = (1.0 - rho) / rho;
    w.w1[i] = odds / pi;
    w.w0[i] = odds / (1.0 - pi);
  }
  return w;
}

NuisanceFit fit_nuisance(const Dataset& data, bool with_outcome_models) {
  NuisanceFit out;
  std::vector<Eigen::Index> source;
  std::vector<Eigen::Index> treated;
  std::vector<Eigen::Index> control;
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    if (data.s[i] != 1) continue;
    source.push_back(i);
    (data.a[i] == 1 ? treated : control).push_back(i);
  }
  if (treated.empty() || control.empty()) {
    throw Error(ErrorCode::kDegenerateSubset, "a treatment arm is empty",
                treated.empty() ? "arm 1" : "arm 0");
  }

  out.participation = fit_logistic(data.x, data.s.cast<double>());
  note_fit(out.participation, "participation model", out.warnings);
  out.rho = predict(out.participation, data.x);

  const DesignMatrix xs = data.x.select_rows(source);
  Eigen::VectorXd as(static_cast<Eigen::Index>(source.size()));
  for (std::size_t r = 0; r < source.size(); ++r) {
    as[static_cast<Eigen::Index>(r)] = data.a[source[r]];
  }
  out.propensity = fit_logistic(xs, as);
  note_fit(out.propensity, "propensity model", out.warnings);
  out.pi = predict(out.propensity, data.x);

  if (with_outcome_models) {
    auto arm_fit = [&](const std::vector<Eigen::Index>& rows) {
      Eigen::VectorXd y(static_cast<Eigen::Index>(rows.size()));
      for (std::size_t r = 0; r < rows.size(); ++r) {
        y[static_cast<Eigen::Index>(r)] = data.y[rows[r]];
      }
      return fit_outcome(data.x.select_rows(rows), y, data.outcome_kind);
    };
    out.outcome1 = arm_fit(treated);
    out.outcome0 = arm_fit(control);
    note_fit(*out.outcome1, "treated outcome model", out.warnings);
    note_fit(*out.outcome0, "control outcome model", out.warnings);
    out.mu = OutcomePredictions{predict(*out.outcome1, data.x),
                                predict(*out.outcome0, data.x)};
  }
  return out;
}

double unified_estimate(const Dataset& data, const Mask& mask, const Weights* w,
                        const OutcomePredictions* u) {
  if (static_cast<Eigen::Index>(mask.size()) != data.size()) {
    throw Error(ErrorCode::kInvalidInput, "mask length does not match dataset", "mask");
  }
  if (w == nullptr && u == nullptr) {
    throw Error(ErrorCode::kInvalidInput,
                "estimator needs weights, outcome predictions, or both", "estimate");
  }
  double num1 = 0.0, den1 = 0.0, num0 = 0.0, den0 = 0.0, aug = 0.0;
  Eigen::Index n_target = 0;
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    if (!mask[static_cast<std::size_t>(i)]) continue;
    if (data.s[i] == 1) {
      if (w == nullptr) continue;
      if (data.a[i] == 1) {
        const double resid = data.y[i] - (u ? u->mu1[i] : 0.0);
        num1 += w->w1[i] * resid;
        den1 += w->w1[i];
      } else {
        const double resid = data.y[i] - (u ? u->mu0[i] : 0.0);
        num0 += w->w0[i] * resid;
        den0 += w->w0[i];
      }
    } else {
      ++n_target;
      if (u) aug += u->mu1[i] - u->mu0[i];
    }
  }
  double result = 0.0;
  if (w) {
    if (!(den1 > 0.0)) {
      throw Error(ErrorCode::kDegenerateSubset,
                  "zero total weight in the treated weighted-mean term",
                  "treated_term");
    }
    if (!(den0 > 0.0)) {
      throw Error(ErrorCode::kDegenerateSubset,
                  "zero total weight in the control weighted-mean term",
                  "control_term");
    }
    result += num1 / den1 - num0 / den0;
  }
  if (u) {
    if (n_target == 0) {
      throw Error(ErrorCode::kDegenerateSubset, "no target units in the subset",
                  "augmentation_term");
    }
    result += aug / static_cast<double>(n_target);
  }
  return result;
}

std::vector<EstimateReport> estimate_all(const Dataset& data, const Mask& mask,
                                         std::span<const Method> methods,
                                         bool refit) {
  if (static_cast<Eigen::Index>(mask.size()) != data.size()) {
    throw Error(ErrorCode::kInvalidInput, "mask length does not match dataset", "mask");
  }
  const SubsetCounts counts = count_subset(data, mask);
  require_nonempty(counts);
  const bool full = counts.target + counts.treated + counts.control == data.size();
  const bool need_outcome =
      std::any_of(methods.begin(), methods.end(),
                  [](Method m) { return m != Method::kIpw; });

  // With refit the models are fitted to the subset alone and evaluated there.
  Dataset subset;
  const Dataset* work = &data;
  Mask work_mask = mask;
  if (refit && !full) {
    subset = data.select_rows(mask_indices(mask));
    work = &subset;
    work_mask = full_mask(subset.size());
  }
  const NuisanceFit fit = fit_nuisance(*work, need_outcome);
  const Weights w = weights(fit.rho, fit.pi);

  std::vector<EstimateReport> reports;
  for (const Method m : methods) {
    EstimateReport r;
    r.estimator = m;
    r.estimand = full ? Estimand::kFullTarget : Estimand::kSubset;
    switch (m) {
      case Method::kIpw:
        r.point = unified_estimate(*work, work_mask, &w, nullptr);
        break;
      case Method::kOutcomeRegression:
        r.point = unified_estimate(*work, work_mask, nullptr, &*fit.mu);
        break;
      case Method::kAipw:
        r.point = unified_estimate(*work, work_mask, &w, &*fit.mu);
        break;
    }
    r.ci_low = r.ci_high = r.point;
    r.n_target_used = counts.target;
    r.n_source_used = counts.treated + counts.control;
    r.warnings = fit.warnings;
    reports.push_back(std::move(r));
  }
  return reports;
}

EstimateReport estimate(const Dataset& data, const Mask& mask, Method method,
                        bool refit) {
  const Method one[] = {method};
  return estimate_all(data, mask, one, refit).front();
}

std::vector<Eigen::Index> stratified_resample(const Dataset& data,
                                              std::mt19937_64& rng) {
  std::vector<Eigen::Index> cells[3];
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    const int cell = data.s[i] == 0 ? 2 : (data.a[i] == 1 ? 0 : 1);
    cells[cell].push_back(i);
  }
  std::vector<Eigen::Index> out;
  out.reserve(static_cast<std::size_t>(data.size()));
  for (const auto& cell : cells) {
    if (cell.empty()) continue;
    std::uniform_int_distribution<std::size_t> pick(0, cell.size() - 1);
    for (std::size_t k = 0; k < cell.size(); ++k) out.push_back(cell[pick(rng)]);
  }
  return out;
}

BootstrapResult bootstrap_se(const Dataset& data, const Mask& mask,
                             std::span<const Method> methods,
                             const BootstrapOptions& options) {
  if (options.reps < 2) {
    throw Error(ErrorCode::kInvalidInput, "bootstrap needs at least 2 replicates",
                "reps");
  }
  if (static_cast<Eigen::Index>(mask.size()) != data.size()) {
    throw Error(ErrorCode::kInvalidInput, "mask length does not match dataset", "mask");
  }
  const auto reps = static_cast<std::size_t>(options.reps);
  std::vector<std::vector<double>> draws(reps);
  std::vector<std::string> failure(reps);

  parallel_for(reps, options.workers, [&](std::size_t b) {
    std::mt19937_64 rng = make_stream(
        options.seed, {static_cast<std::uint64_t>(options.purpose), options.stream, b});
    const std::vector<Eigen::Index> rows = stratified_resample(data, rng);
    Mask carried(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
      carried[r] = mask[static_cast<std::size_t>(rows[r])];
    }
    try {
      const Dataset resampled = data.select_rows(rows);
      for (const auto& rep : estimate_all(resampled, carried, methods, options.refit)) {
        draws[b].push_back(rep.point);
      }
    } catch (const Error& e) {
      draws[b].clear();
      failure[b] = std::string(to_string(e.code())) + ": " + e.what();
    }
  });

  BootstrapResult result;
  result.methods.assign(methods.begin(), methods.end());
  for (std::size_t b = 0; b < reps; ++b) {
    if (failure[b].empty()) {
      ++result.successes;
    } else {
      ++result.failures;
      ++result.failure_census[failure[b]];
    }
  }
  if (static_cast<double>(result.failures) >
          options.max_failure_rate * static_cast<double>(reps) ||
      result.successes < 2) {
    std::string census;
    for (const auto& [reason, n] : result.failure_census) {
      census += (census.empty() ? "" : "; ") + std::to_string(n) + "x " + reason;
    }
    throw Error(ErrorCode::kDegenerateSubset,
                std::to_string(result.failures) + " of " + std::to_string(reps) +
                    " bootstrap replicates failed",
                census);
  }
  for (std::size_t m = 0; m < methods.size(); ++m) {
    double mean = 0.0;
    for (std::size_t b = 0; b < reps; ++b) {
      if (failure[b].empty()) mean += draws[b][m];
    }
    mean /= result.successes;
    double ss = 0.0;
    for (std::size_t b = 0; b < reps; ++b) {
      if (failure[b].empty()) ss += (draws[b][m] - mean) * (draws[b][m] - mean);
    }
    result.se.push_back(std::sqrt(ss / (result.successes - 1)));
  }
  return result;
}

void attach_bootstrap(std::vector<EstimateReport>& reports,
                      const BootstrapResult& result) {
  for (auto& report : reports) {
    const auto it =
        std::find(result.methods.begin(), result.methods.end(), report.estimator);
    if (it == result.methods.end()) continue;
    report.se = result.se[static_cast<std::size_t>(it - result.methods.begin())];
    report.ci_low = report.point - kNormalQuantile975 * report.se;
    report.ci_high = report.point + kNormalQuantile975 * report.se;
  }
}

}  // namespace genscore
