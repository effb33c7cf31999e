#include "genscore/sim.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "genscore/error.hpp"
#include "genscore/parallel.hpp"
#include "genscore/select.hpp"

namespace genscore {

namespace {

std::string upper(std::string_view text) {
  std::string out;
  for (const char c : text) {
    if (c == '(' || c == ')' || c == ' ') continue;
    out += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  }
  return out;
}

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

std::string Scenario::name() const {
  return std::string("O") + (outcome == OutcomeModel::kO1 ? "1" : "2") + "P" +
         std::to_string(static_cast<int>(participation) + 1);
}

Scenario Scenario::parse(std::string_view text) {
  const std::string t = upper(text);
  if (t.size() == 4 && t[0] == 'O' && t[2] == 'P' && (t[1] == '1' || t[1] == '2') &&
      t[3] >= '1' && t[3] <= '4') {
    Scenario s;
    s.outcome = t[1] == '1' ? OutcomeModel::kO1 : OutcomeModel::kO2;
    s.participation = static_cast<ParticipationModel>(t[3] - '1');
    return s;
  }
  throw Error(ErrorCode::kInvalidInput, "unknown scenario '" + std::string(text) + "'",
              "scenario");
}

std::vector<Scenario> all_scenarios() {
  std::vector<Scenario> out;
  for (const auto o : {OutcomeModel::kO1, OutcomeModel::kO2}) {
    for (int p = 0; p < 4; ++p) {
      out.push_back(Scenario{o, static_cast<ParticipationModel>(p)});
    }
  }
  return out;
}

double participation_tilde(ParticipationModel model, const double* x) {
  switch (model) {
    case ParticipationModel::kP1:
      return logistic(0.4 * x[0] + 0.4 * x[1] + 0.4 * x[2]);
    case ParticipationModel::kP2:
      return logistic(0.8 * x[0] + 0.8 * x[1] + 0.8 * x[2]);
    case ParticipationModel::kP3:
      return logistic(0.4 * x[0] + 0.3 * x[1] * x[1] * x[1] + 0.2 * x[2] * x[2]);
    case ParticipationModel::kP4:
      return logistic(0.8 * x[0] + 0.6 * x[1] * x[1] * x[1] + 0.4 * x[2] * x[2]);
  }
  return 0.5;
}

double simulated_propensity(const double* x) { return logistic(0.3 * x[0] - 0.3 * x[2]); }

double outcome_mean(OutcomeModel model, int arm, const double* x) {
  const double a = arm;
  if (model == OutcomeModel::kO1) {
    return x[0] + a * (0.5 * x[0] + x[1] + 1.0);
  }
  const double shifted = x[0] - 0.5;
  return x[0] - x[3] + (a - 0.5) * (0.4 * shifted * shifted + 0.5 * x[1] * x[1]);
}

double conditional_effect(OutcomeModel model, const double* x) {
  return outcome_mean(model, 1, x) - outcome_mean(model, 0, x);
}

void SimConfig::validate() const {
  if (n_source < 1 || n_target < 1 || reps < 1 || bootstrap_reps < 2) {
    throw Error(ErrorCode::kInvalidInput,
                "sample sizes and replicate counts must be positive "
                "(bootstrap_reps >= 2)",
                "sim_config");
  }
  if (estimators.empty()) {
    throw Error(ErrorCode::kInvalidInput, "no estimators requested", "estimators");
  }
}

SimSample draw_sample(const SimConfig& config, std::uint64_t rep_seed) {
  config.validate();
  std::mt19937_64 rng =
      make_stream(rep_seed, {static_cast<std::uint64_t>(StreamPurpose::kDataGeneration)});
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);

  const int n = config.n_source + config.n_target;
  Eigen::MatrixXd x(n, kSimCovariates);
  std::int64_t proposals = 0;
  double draw[kSimCovariates];
  auto fill = [&](int begin, int end, bool source) {
    for (int i = begin; i < end;) {
      if (++proposals > kMaxProposals) {
        throw Error(ErrorCode::kConvergence, "rejection sampler exceeded proposal cap",
                    "draw_sample");
      }
      for (double& v : draw) v = normal(rng);
      const double p = participation_tilde(config.scenario.participation, draw);
      const bool accept = uniform(rng) < (source ? p : 1.0 - p);
      if (!accept) continue;
      for (int j = 0; j < kSimCovariates; ++j) x(i, j) = draw[j];
      ++i;
    }
  };
  fill(0, config.n_source, true);
  fill(config.n_source, n, false);

  SimSample out;
  out.data.s = Eigen::VectorXi::Zero(n);
  out.data.a = Eigen::VectorXi::Constant(n, kMissingTreatment);
  out.data.y = Eigen::VectorXd::Constant(n, std::numeric_limits<double>::quiet_NaN());
  out.effect.resize(n);
  for (int i = 0; i < n; ++i) {
    double xi[kSimCovariates];
    for (int j = 0; j < kSimCovariates; ++j) xi[j] = x(i, j);
    out.effect[i] = conditional_effect(config.scenario.outcome, xi);
    if (i < config.n_source) {
      out.data.s[i] = 1;
      const int arm = uniform(rng) < simulated_propensity(xi) ? 1 : 0;
      out.data.a[i] = arm;
      out.data.y[i] = outcome_mean(config.scenario.outcome, arm, xi) + normal(rng);
    }
  }
  out.data.x = DesignMatrix(std::move(x));
  out.data.outcome_kind = OutcomeKind::kContinuous;
  out.data.covariate_names = {"x1", "x2", "x3", "x4", "x5"};
  return out;
}

std::uint64_t replicate_seed(std::uint64_t seed, std::uint64_t rep) {
  return stream_seed(seed, {rep});
}

ReplicateResult run_replicate(const SimConfig& config, std::uint64_t rep) {
  ReplicateResult result;
  try {
    const SimSample sample = draw_sample(config, replicate_seed(config.seed, rep));
    const Dataset& data = sample.data;
    data.validate();

    const NuisanceFit pooled = fit_nuisance(data, false);
    const ScoreTable table =
        kappa(ScoreInputs::homoscedastic(pooled.rho, pooled.pi, data.s));
    const Selection sel = optimal_cutoff(table);
    result.subset_proportion = sel.target_coverage;
    result.source_proportion = sel.source_coverage;
    result.gamma = sel.gamma;
    double kappa_sum = 0.0, kappa_max = 0.0;
    for (Eigen::Index i = 0; i < data.size(); ++i) {
      if (sel.mask[static_cast<std::size_t>(i)] && data.s[i] == 0) {
        kappa_sum += table.kappa[i];
        kappa_max = std::max(kappa_max, table.kappa[i]);
      }
    }
    result.max_target_kappa_selected = kappa_max;
    result.mean_target_kappa_selected =
        kappa_sum / static_cast<double>(sel.n_target_selected);

    double truth_full = 0.0, truth_subset = 0.0;
    for (Eigen::Index i = 0; i < data.size(); ++i) {
      if (data.s[i] != 0) continue;
      truth_full += sample.effect[i];
      if (sel.mask[static_cast<std::size_t>(i)]) truth_subset += sample.effect[i];
    }
    truth_full /= static_cast<double>(data.n_target());
    truth_subset /= static_cast<double>(sel.n_target_selected);

    const Mask all = full_mask(data.size());
    const Mask* masks[2] = {&all, &sel.mask};
    const double truths[2] = {truth_full, truth_subset};
    const StreamPurpose purposes[2] = {StreamPurpose::kBootstrapFull,
                                       StreamPurpose::kBootstrapSubset};
    for (int e = 0; e < 2; ++e) {
      std::vector<EstimateReport> reports =
          estimate_all(data, *masks[e], config.estimators, true);
      BootstrapOptions boot;
      boot.reps = config.bootstrap_reps;
      boot.seed = config.seed;
      boot.purpose = purposes[e];
      boot.stream = rep;
      boot.workers = 1;
      attach_bootstrap(reports, bootstrap_se(data, *masks[e], config.estimators, boot));
      for (const auto& r : reports) {
        result.outcomes[static_cast<std::size_t>(e)].push_back(
            EstimateOutcome{r.point, r.se, truths[e]});
      }
    }
    result.ok = true;
  } catch (const Error& err) {
    result = ReplicateResult{};
    result.failure = std::string(to_string(err.code())) + ": " + err.what();
  }
  return result;
}

std::vector<SimResultRow> aggregate(const SimConfig& config,
                                    std::span<const ReplicateResult> replicates) {
  std::vector<const ReplicateResult*> ok;
  for (const auto& r : replicates) {
    if (r.ok) ok.push_back(&r);
  }
  std::vector<SimResultRow> rows;
  if (ok.empty()) return rows;
  const auto n = static_cast<double>(ok.size());
  std::vector<double> proportions;
  for (const auto* r : ok) proportions.push_back(r->subset_proportion);
  const double mean_prop = mean_of(proportions);

  for (std::size_t e = 0; e < 2; ++e) {
    for (std::size_t m = 0; m < config.estimators.size(); ++m) {
      std::vector<double> err, sq;
      double width = 0.0, covered = 0.0;
      for (const auto* r : ok) {
        const EstimateOutcome& o = r->outcomes[e][m];
        const double d = o.point - o.truth;
        err.push_back(d);
        sq.push_back(d * d);
        width += 2.0 * kNormalQuantile975 * o.se;
        const double lo = o.point - kNormalQuantile975 * o.se;
        const double hi = o.point + kNormalQuantile975 * o.se;
        if (lo <= o.truth && o.truth <= hi) covered += 1.0;
      }
      SimResultRow row;
      row.scenario = config.scenario.name();
      row.estimator = config.estimators[m];
      row.estimand = e == 0 ? Estimand::kFullTarget : Estimand::kSubset;
      row.replicates = static_cast<int>(ok.size());
      const double bias = mean_of(err);
      const double mse = mean_of(sq);
      row.bias_x10 = 10.0 * bias;
      row.rmse_x10 = 10.0 * std::sqrt(mse);
      row.ci_width = width / n;
      const double coverage = covered / n;
      row.ci_coverage_pct = 100.0 * coverage;
      row.mean_subset_proportion = 100.0 * mean_prop;

      double var = 0.0;
      for (const double d : err) var += (d - bias) * (d - bias);
      row.bias_x10_mcse = n > 1 ? 10.0 * std::sqrt(var / (n - 1) / n) : 0.0;
      row.ci_coverage_pct_mcse = 100.0 * std::sqrt(coverage * (1.0 - coverage) / n);
      if (n > 1) {
        const double total = mse * n;
        std::vector<double> loo;
        for (const double s : sq) loo.push_back(std::sqrt((total - s) / (n - 1)));
        const double loo_mean = mean_of(loo);
        double jk = 0.0;
        for (const double v : loo) jk += (v - loo_mean) * (v - loo_mean);
        row.rmse_x10_mcse = 10.0 * std::sqrt((n - 1) / n * jk);
      }
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

StudyResult run_study(const SimConfig& config) {
  config.validate();
  StudyResult study;
  study.config = config;
  study.replicates.resize(static_cast<std::size_t>(config.reps));
  parallel_for(study.replicates.size(), config.workers, [&](std::size_t rep) {
    study.replicates[rep] = run_replicate(config, rep);
  });
  for (const auto& r : study.replicates) {
    if (!r.ok) {
      ++study.failures;
      ++study.failure_census[r.failure];
    }
  }
  if (static_cast<double>(study.failures) >
      config.max_failure_rate * static_cast<double>(config.reps)) {
    std::string census;
    for (const auto& [reason, count] : study.failure_census) {
      census += (census.empty() ? "" : "; ") + std::to_string(count) + "x " + reason;
    }
    throw Error(ErrorCode::kDegenerateSubset,
                std::to_string(study.failures) + " of " + std::to_string(config.reps) +
                    " replicates failed in scenario " + config.scenario.name(),
                census);
  }
  study.rows = aggregate(config, study.replicates);
  return study;
}

SimSample draw_binary_outcome_analog(std::uint64_t seed, int n_pooled) {
  if (n_pooled < 20) {
    throw Error(ErrorCode::kInvalidInput, "pooled sample too small", "n_pooled");
  }
  constexpr int kCovariates = 10;
  std::mt19937_64 rng =
      make_stream(seed, {static_cast<std::uint64_t>(StreamPurpose::kDataGeneration), 10});
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  auto bernoulli = [&](double p) { return uniform(rng) < p ? 1.0 : 0.0; };

  // Centres and scales used to put every covariate on a unit scale inside
  // the linear predictors. Fixed constants, so the models stay linear in x.
  static constexpr double kCentre[kCovariates] = {78, 0.25, 0.2, 0.3, 0.15,
                                                  0.2, 3.5, 3.2, 10, 4};
  static constexpr double kScale[kCovariates] = {7, 0.43, 0.4, 0.46, 0.36,
                                                 0.4, 0.5, 0.5, 3, 2};
  static constexpr double kParticipation[kCovariates] = {-0.25, 0.2, -0.2, 0.15, -0.15,
                                                         0.2,   0.2, -0.15, -0.25, -0.2};
  static constexpr double kTreatment[kCovariates] = {-0.15, 0.1, 0.15, -0.1, 0.2,
                                                     0.15,  -0.1, 0.0, 0.2,  0.1};
  static constexpr double kOutcome[kCovariates] = {0.2, 0.15, 0.2, 0.15, 0.2,
                                                   0.1, -0.2, 0.1, 0.35, 0.25};

  Eigen::MatrixXd x(n_pooled, kCovariates);
  SimSample out;
  out.data.s.resize(n_pooled);
  out.data.a = Eigen::VectorXi::Constant(n_pooled, kMissingTreatment);
  out.data.y = Eigen::VectorXd::Constant(n_pooled, std::numeric_limits<double>::quiet_NaN());
  out.effect.resize(n_pooled);
  for (int i = 0; i < n_pooled; ++i) {
    const double age = 78.0 + 7.0 * normal(rng);
    const double lace = std::clamp(std::round(10.0 + 3.0 * normal(rng)), 0.0, 19.0);
    const double hendrich = std::clamp(std::round(4.0 + 2.0 * normal(rng)), 0.0, 16.0);
    const double row[kCovariates] = {age,
                                     bernoulli(0.25),
                                     bernoulli(0.2),
                                     bernoulli(0.3),
                                     bernoulli(0.15),
                                     bernoulli(0.2),
                                     3.5 + 0.5 * normal(rng),
                                     3.2 + 0.5 * normal(rng),  // log ALT
                                     lace,
                                     hendrich};
    double lp_s = -0.05, lp_a = -0.9, lp_y = -1.5;
    for (int j = 0; j < kCovariates; ++j) {
      const double z = (row[j] - kCentre[j]) / kScale[j];
      lp_s += kParticipation[j] * z;
      lp_a += kTreatment[j] * z;
      lp_y += kOutcome[j] * z;
      x(i, j) = row[j];
    }
    const double effect_lp = -0.15 + 0.1 * (row[8] - kCentre[8]) / kScale[8];
    out.effect[i] = logistic(lp_y + effect_lp) - logistic(lp_y);
    const bool source = bernoulli(logistic(lp_s)) == 1.0;
    out.data.s[i] = source ? 1 : 0;
    if (source) {
      const int arm = bernoulli(logistic(lp_a)) == 1.0 ? 1 : 0;
      out.data.a[i] = arm;
      out.data.y[i] = bernoulli(logistic(lp_y + arm * effect_lp));
    }
  }
  out.data.x = DesignMatrix(std::move(x));
  out.data.outcome_kind = OutcomeKind::kBinary;
  out.data.covariate_names = {"age",          "diabetes_complications",
                              "cancer",       "respiratory_symptoms",
                              "malnutrition", "therapeutic_nutrients_rx",
                              "albumin",      "log_alt",
                              "lace_index",   "hendrich_fall_risk"};
  return out;
}

}  // namespace genscore
