#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "genscore/estimate.hpp"

namespace genscore {

enum class ParticipationModel { kP1, kP2, kP3, kP4 };
enum class OutcomeModel { kO1, kO2 };

struct Scenario {
  OutcomeModel outcome = OutcomeModel::kO1;
  ParticipationModel participation = ParticipationModel::kP1;

  std::string name() const;  // e.g. "O1P2"
  // Accepts "O1P2" and "(O1)(P2)", case-insensitive.
  static Scenario parse(std::string_view text);
  friend bool operator==(const Scenario&, const Scenario&) = default;
};

// All eight outcome x participation combinations, O1P1 ... O2P4.
std::vector<Scenario> all_scenarios();

inline constexpr int kSimCovariates = 5;

// Acceptance probability for the source sample (the target sample uses its
// complement). x points at kSimCovariates values.
double participation_tilde(ParticipationModel model, const double* x);
double simulated_propensity(const double* x);
double outcome_mean(OutcomeModel model, int arm, const double* x);
// Closed-form conditional treatment effect mu_1(x) - mu_0(x).
double conditional_effect(OutcomeModel model, const double* x);

struct SimConfig {
  Scenario scenario;
  int n_source = 600;
  int n_target = 800;
  int reps = 500;
  int bootstrap_reps = 200;
  std::uint64_t seed = 1;
  std::vector<Method> estimators{std::begin(kAllMethods), std::end(kAllMethods)};
  unsigned workers = 1;
  // The study aborts when more than this share of replicates fail.
  double max_failure_rate = 0.05;

  void validate() const;
};

struct SimSample {
  Dataset data;
  // Conditional treatment effect of every unit (ground truth).
  Eigen::VectorXd effect;
};

inline constexpr std::int64_t kMaxProposals = 10'000'000;

// Rejection sampling from N(0, I_5): source units accepted with probability
// rho_tilde(x) until n_source are collected, then target units with
// probability 1 - rho_tilde(x) until n_target. Source rows come first.
SimSample draw_sample(const SimConfig& config, std::uint64_t rep_seed);

struct EstimateOutcome {
  double point = 0.0;
  double se = 0.0;
  double truth = 0.0;
};

struct ReplicateResult {
  bool ok = false;
  std::string failure;
  double subset_proportion = 0.0;
  double source_proportion = 0.0;
  double gamma = 0.0;
  double max_target_kappa_selected = 0.0;
  double mean_target_kappa_selected = 0.0;
  // [estimand][method index in config.estimators]; estimand 0 = full, 1 = subset.
  std::array<std::vector<EstimateOutcome>, 2> outcomes;
};

struct SimResultRow {
  std::string scenario;
  Method estimator = Method::kIpw;
  Estimand estimand = Estimand::kFullTarget;
  double bias_x10 = 0.0;
  double rmse_x10 = 0.0;
  double ci_width = 0.0;
  double ci_coverage_pct = 0.0;
  double mean_subset_proportion = 0.0;
  // Monte Carlo standard errors of the metrics above.
  double bias_x10_mcse = 0.0;
  double rmse_x10_mcse = 0.0;  // jackknife
  double ci_coverage_pct_mcse = 0.0;  // binomial
  int replicates = 0;
};

struct StudyResult {
  SimConfig config;
  std::vector<SimResultRow> rows;
  std::vector<ReplicateResult> replicates;
  int failures = 0;
  std::map<std::string, int> failure_census;
};

// Seed of replicate `rep` of a study seeded with `seed`.
std::uint64_t replicate_seed(std::uint64_t seed, std::uint64_t rep);

// One replicate: fit rho and pi on the pooled sample, score, select the
// optimal cutoff, then estimate and bootstrap every method for the full
// target and for the selected subset (models re-fitted inside the subset).
ReplicateResult run_replicate(const SimConfig& config, std::uint64_t rep);

// Aggregates replicates into bias, RMSE, CI width and coverage rows ordered
// by estimand (full first), then by config.estimators order.
std::vector<SimResultRow> aggregate(const SimConfig& config,
                                    std::span<const ReplicateResult> replicates);

// Throws kDegenerateSubset with a census when too many replicates fail.
StudyResult run_study(const SimConfig& config);

// Synthetic stand-in for an observational source study with a binary outcome
// and ten covariates. Participation, treatment and outcome follow logistic
// models that are linear in the covariates, so logistic fits are correctly
// specified.
SimSample draw_binary_outcome_analog(std::uint64_t seed, int n_pooled = 1500);

}  // namespace genscore
