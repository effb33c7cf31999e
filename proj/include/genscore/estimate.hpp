#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "genscore/dataset.hpp"
#include "genscore/rng.hpp"

namespace genscore {

enum class Method { kIpw, kOutcomeRegression, kAipw };
enum class Estimand { kFullTarget, kSubset };

std::string_view to_string(Method method);
std::string_view to_string(Estimand estimand);
// Accepts "ipw", "or", "aipw".
Method parse_method(std::string_view name);
inline constexpr Method kAllMethods[] = {Method::kIpw, Method::kOutcomeRegression,
                                         Method::kAipw};

inline constexpr double kNormalQuantile975 = 1.96;

struct Weights {
  Eigen::VectorXd w1;  // (1 - rho) / (rho pi)
  Eigen::VectorXd w0;  // (1 - rho) / (rho (1 - pi))
};

// Throws kPositivity on rho outside (0, 1] or pi outside (0, 1).
Weights weights(const Eigen::VectorXd& rho_hat, const Eigen::VectorXd& pi_hat);

struct OutcomePredictions {
  Eigen::VectorXd mu1;
  Eigen::VectorXd mu0;
};

// Fitted participation, propensity and (optionally) outcome models together
// with their predictions on every unit of the dataset they were fitted to.
struct NuisanceFit {
  FittedGlm participation;
  FittedGlm propensity;
  std::optional<FittedGlm> outcome1;
  std::optional<FittedGlm> outcome0;
  Eigen::VectorXd rho;
  Eigen::VectorXd pi;
  std::optional<OutcomePredictions> mu;
  std::vector<std::string> warnings;
};

// rho from logistic S ~ X on all units; pi from logistic A ~ X on source
// units; outcome models per arm on source units (linear, or logistic for
// binary outcomes).
NuisanceFit fit_nuisance(const Dataset& data, bool with_outcome_models);

// Weighted/augmented difference over the units in mask:
//   sum w1 S A (Y - u1) / sum w1 S A
// - sum w0 S (1-A) (Y - u0) / sum w0 S (1-A)
// + sum (1-S)(u1 - u0) / sum (1-S)
// A null `w` drops the first two terms; a null `u` sets u to zero and drops
// the third. Throws kDegenerateSubset when a normaliser is zero.
double unified_estimate(const Dataset& data, const Mask& mask, const Weights* w,
                        const OutcomePredictions* u);

struct EstimateReport {
  Method estimator = Method::kIpw;
  Estimand estimand = Estimand::kFullTarget;
  double point = 0.0;
  double se = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  Eigen::Index n_target_used = 0;
  Eigen::Index n_source_used = 0;
  std::vector<std::string> warnings;
};

// Point estimates for each requested method over the subset in mask. With
// refit, every nuisance model is re-estimated on the masked units only;
// otherwise the full-sample fits are evaluated on the mask. se and the
// interval are left at the point until bootstrap results are attached.
std::vector<EstimateReport> estimate_all(const Dataset& data, const Mask& mask,
                                         std::span<const Method> methods,
                                         bool refit);

EstimateReport estimate(const Dataset& data, const Mask& mask, Method method,
                        bool refit);

struct BootstrapOptions {
  int reps = 200;
  std::uint64_t seed = 0;
  unsigned workers = 1;
  bool refit = true;
  // Abort when more than this share of replicates fail.
  double max_failure_rate = 0.2;
  StreamPurpose purpose = StreamPurpose::kBootstrap;
  // Extra stream counter, e.g. the simulation replicate index.
  std::uint64_t stream = 0;
};

struct BootstrapResult {
  std::vector<Method> methods;
  std::vector<double> se;  // one per method
  int successes = 0;
  int failures = 0;
  std::map<std::string, int> failure_census;
};

// Stratified (S, A) nonparametric bootstrap. Subset membership travels with
// each resampled unit, so the selection rule stays fixed across replicates.
BootstrapResult bootstrap_se(const Dataset& data, const Mask& mask,
                             std::span<const Method> methods,
                             const BootstrapOptions& options);

// Sets se and the 1.96-se interval on each report from a matching result.
void attach_bootstrap(std::vector<EstimateReport>& reports,
                      const BootstrapResult& result);

// Stratified resample indices: cells (S=1, A=1), (S=1, A=0), (S=0) in that
// order, each drawn with replacement to its original size.
std::vector<Eigen::Index> stratified_resample(const Dataset& data,
                                              std::mt19937_64& rng);

}  // namespace genscore
