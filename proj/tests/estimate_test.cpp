#include <cmath>
#include <limits>
#include <random>

#include "doctest.h"
#include "genscore/error.hpp"
#include "genscore/estimate.hpp"

using namespace genscore;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Linear-logistic participation and treatment, linear outcome with effect 1.
Dataset random_dataset(std::uint64_t seed, int n, double effect = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unif;
  Eigen::MatrixXd x(n, 2);
  Dataset d;
  d.s.resize(n);
  d.a.resize(n);
  d.y.resize(n);
  for (int i = 0; i < n; ++i) {
    x(i, 0) = normal(rng);
    x(i, 1) = normal(rng);
    const double rho = 1.0 / (1.0 + std::exp(-(0.3 + 0.5 * x(i, 0))));
    d.s[i] = unif(rng) < rho ? 1 : 0;
    if (d.s[i] == 1) {
      const double pi = 1.0 / (1.0 + std::exp(-(0.4 * x(i, 1))));
      d.a[i] = unif(rng) < pi ? 1 : 0;
      d.y[i] = x(i, 0) + effect * d.a[i] + 0.5 * normal(rng);
    } else {
      d.a[i] = kMissingTreatment;
      d.y[i] = kNaN;
    }
  }
  d.x = DesignMatrix(x);
  d.covariate_names = {"u", "v"};
  d.validate();
  return d;
}

// Six hand-built units: two treated, two control, two target.
Dataset tiny() {
  Dataset d;
  Eigen::MatrixXd x(6, 1);
  x << 0, 1, 2, 3, 4, 5;
  d.x = DesignMatrix(x);
  d.s.resize(6);
  d.s << 1, 1, 1, 1, 0, 0;
  d.a.resize(6);
  d.a << 1, 1, 0, 0, kMissingTreatment, kMissingTreatment;
  d.y.resize(6);
  d.y << 2, 4, 1, 3, kNaN, kNaN;
  return d;
}

}  // namespace

TEST_CASE("weights by hand") {
  Eigen::VectorXd rho(1), pi(1);
  rho << 0.2;
  pi << 0.8;
  const Weights w = weights(rho, pi);
  CHECK(w.w1[0] == doctest::Approx(5.0).epsilon(1e-14));
  CHECK(w.w0[0] == doctest::Approx(20.0).epsilon(1e-14));
  pi << 1.0;
  try {
    weights(rho, pi);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kPositivity);
  }
}

TEST_CASE("unified estimator on a hand-built fixture") {
  const Dataset d = tiny();
  Weights w{Eigen::VectorXd(6), Eigen::VectorXd(6)};
  w.w1 << 1, 3, 9, 9, 9, 9;
  w.w0 << 9, 9, 1, 1, 9, 9;
  OutcomePredictions u{Eigen::VectorXd(6), Eigen::VectorXd(6)};
  u.mu1 << 1, 1, 1, 1, 2, 4;
  u.mu0 << 0, 0, 0, 0, 1, 1;
  const Mask all = full_mask(6);
  // Treated: (1*2 + 3*4) / 4 = 3.5; control: (1 + 3) / 2 = 2.
  CHECK(unified_estimate(d, all, &w, nullptr) == doctest::Approx(1.5));
  // Target mean of mu1 - mu0: (1 + 3) / 2 = 2.
  CHECK(unified_estimate(d, all, nullptr, &u) == doctest::Approx(2.0));
  // Residual terms: (1*1 + 3*3) / 4 = 2.5 and (1 + 3) / 2 = 2; plus 2.
  CHECK(unified_estimate(d, all, &w, &u) == doctest::Approx(2.5));

  const Mask drop_first{false, true, true, true, true, false};
  CHECK(unified_estimate(d, drop_first, &w, nullptr) == doctest::Approx(4.0 - 2.0));
  CHECK(unified_estimate(d, drop_first, &w, &u) == doctest::Approx(3.0 - 2.0 + 1.0));

  const Mask no_treated{false, false, true, true, true, true};
  try {
    unified_estimate(d, no_treated, &w, nullptr);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kDegenerateSubset);
    CHECK(e.location() == "treated_term");
  }
  CHECK_THROWS_AS(unified_estimate(d, all, nullptr, nullptr), Error);
}

TEST_CASE("augmented estimator collapses to its two special cases") {
  const Dataset d = random_dataset(7, 500);
  const NuisanceFit fit = fit_nuisance(d, true);
  const Weights w = weights(fit.rho, fit.pi);
  const OutcomePredictions zero{Eigen::VectorXd::Zero(d.size()),
                                Eigen::VectorXd::Zero(d.size())};
  const Mask all = full_mask(d.size());
  CHECK(std::abs(unified_estimate(d, all, &w, &zero) -
                 unified_estimate(d, all, &w, nullptr)) < 1e-10);
  CHECK(std::abs(unified_estimate(d, all, nullptr, &*fit.mu) -
                 [&] {
                   double acc = 0.0;
                   for (Eigen::Index i = 0; i < d.size(); ++i) {
                     if (d.s[i] == 0) acc += fit.mu->mu1[i] - fit.mu->mu0[i];
                   }
                   return acc / static_cast<double>(d.n_target());
                 }()) < 1e-10);
}

TEST_CASE("IPW without refit reproduces the weighted-mean formula") {
  const Dataset d = random_dataset(12, 400);
  const NuisanceFit fit = fit_nuisance(d, false);
  double n1 = 0, d1 = 0, n0 = 0, d0 = 0;
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    if (d.s[i] != 1) continue;
    const double odds = (1.0 - fit.rho[i]) / fit.rho[i];
    if (d.a[i] == 1) {
      n1 += odds / fit.pi[i] * d.y[i];
      d1 += odds / fit.pi[i];
    } else {
      n0 += odds / (1.0 - fit.pi[i]) * d.y[i];
      d0 += odds / (1.0 - fit.pi[i]);
    }
  }
  const EstimateReport r = estimate(d, full_mask(d.size()), Method::kIpw, false);
  CHECK(std::abs(r.point - (n1 / d1 - n0 / d0)) < 1e-12);
  CHECK(r.estimand == Estimand::kFullTarget);
}

TEST_CASE("estimators recover a constant effect") {
  const Dataset d = random_dataset(5, 4000, 1.0);
  for (const auto& r : estimate_all(d, full_mask(d.size()), kAllMethods, true)) {
    CHECK(r.point == doctest::Approx(1.0).epsilon(0.1));
    CHECK(r.n_target_used == d.n_target());
    CHECK(r.n_source_used == d.n_source());
  }
}

TEST_CASE("refit uses only the masked units") {
  const Dataset d = random_dataset(31, 600);
  Mask half(static_cast<std::size_t>(d.size()));
  for (std::size_t i = 0; i < half.size(); ++i) half[i] = d.x.values()(static_cast<Eigen::Index>(i), 0) < 0.5;
  const Dataset sub = d.select_rows(mask_indices(half));
  const auto a = estimate_all(d, half, kAllMethods, true);
  const auto b = estimate_all(sub, full_mask(sub.size()), kAllMethods, true);
  for (std::size_t m = 0; m < a.size(); ++m) {
    CHECK(a[m].point == b[m].point);
    CHECK(a[m].estimand == Estimand::kSubset);
  }
  const auto c = estimate_all(d, half, kAllMethods, false);
  CHECK(c[0].point != a[0].point);
}

TEST_CASE("subset without a treated unit is degenerate") {
  const Dataset d = random_dataset(2, 300);
  Mask m(static_cast<std::size_t>(d.size()));
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = d.a[static_cast<Eigen::Index>(i)] != 1;
  try {
    estimate(d, m, Method::kAipw, true);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kDegenerateSubset);
  }
}

TEST_CASE("method names round trip") {
  for (const Method m : kAllMethods) CHECK(parse_method(to_string(m)) == m);
  CHECK_THROWS_AS(parse_method("dr"), Error);
  CHECK(to_string(Estimand::kSubset) == "subset");
}

TEST_CASE("stratified resampling keeps cell sizes") {
  const Dataset d = random_dataset(4, 300);
  std::mt19937_64 rng(1);
  const auto rows = stratified_resample(d, rng);
  REQUIRE(static_cast<Eigen::Index>(rows.size()) == d.size());
  int t = 0, c = 0, g = 0;
  for (const auto i : rows) {
    if (d.s[i] == 0) ++g;
    else (d.a[i] == 1 ? t : c) += 1;
  }
  int t0 = 0, c0 = 0, g0 = 0;
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    if (d.s[i] == 0) ++g0;
    else (d.a[i] == 1 ? t0 : c0) += 1;
  }
  CHECK(t == t0);
  CHECK(c == c0);
  CHECK(g == g0);
}

TEST_CASE("bootstrap SE of a difference in means") {
  // rho and pi carry no signal, so every estimator is close to a difference
  // of two means of 200 standard normals: SE = sqrt(2 / 200) = 0.1.
  std::mt19937_64 rng(99);
  std::normal_distribution<double> normal;
  const int n = 600;
  Eigen::MatrixXd x(n, 1);
  Dataset d;
  d.s.resize(n);
  d.a.resize(n);
  d.y.resize(n);
  for (int i = 0; i < n; ++i) {
    x(i, 0) = normal(rng);
    d.s[i] = i < 400 ? 1 : 0;
    d.a[i] = i < 400 ? i % 2 : kMissingTreatment;
    d.y[i] = i < 400 ? normal(rng) : kNaN;
  }
  d.x = DesignMatrix(x);
  BootstrapOptions opt;
  opt.reps = 400;
  opt.seed = 5;
  const BootstrapResult b = bootstrap_se(d, full_mask(n), kAllMethods, opt);
  CHECK(b.failures == 0);
  CHECK(b.se[0] == doctest::Approx(0.1).epsilon(0.2));
}

TEST_CASE("bootstrap is identical across worker counts") {
  const Dataset d = random_dataset(8, 300);
  Mask m(static_cast<std::size_t>(d.size()));
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = d.x.values()(static_cast<Eigen::Index>(i), 1) < 1.0;
  BootstrapOptions opt;
  opt.reps = 40;
  opt.seed = 77;
  opt.workers = 1;
  const BootstrapResult one = bootstrap_se(d, m, kAllMethods, opt);
  opt.workers = 4;
  const BootstrapResult four = bootstrap_se(d, m, kAllMethods, opt);
  CHECK(one.se == four.se);
  opt.seed = 78;
  CHECK(bootstrap_se(d, m, kAllMethods, opt).se != one.se);

  auto reports = estimate_all(d, m, kAllMethods, true);
  attach_bootstrap(reports, one);
  for (std::size_t k = 0; k < reports.size(); ++k) {
    CHECK(reports[k].se == one.se[k]);
    CHECK(reports[k].ci_high - reports[k].ci_low == doctest::Approx(2 * 1.96 * one.se[k]));
  }
}

TEST_CASE("bootstrap aborts when too many replicates fail") {
  // A single treated unit in the subset: most resamples still contain it, but
  // the outcome model for one arm then has fewer rows than coefficients.
  Dataset d = random_dataset(3, 200);
  Mask m(static_cast<std::size_t>(d.size()), true);
  int treated_kept = 0;
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    if (d.s[i] == 1 && d.a[i] == 1) {
      m[static_cast<std::size_t>(i)] = treated_kept++ < 2;
    }
  }
  BootstrapOptions opt;
  opt.reps = 30;
  try {
    bootstrap_se(d, m, kAllMethods, opt);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kDegenerateSubset);
    CHECK_FALSE(e.location().empty());
  }
  opt.reps = 1;
  CHECK_THROWS_AS(bootstrap_se(d, m, kAllMethods, opt), Error);
}
