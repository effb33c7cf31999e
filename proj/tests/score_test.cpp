#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "genscore/error.hpp"
#include "genscore/score.hpp"
#include "genscore/select.hpp"

using namespace genscore;

namespace {

ScoreInputs one_unit(double rho, double pi, int s = 0) {
  Eigen::VectorXd r(1), p(1);
  r << rho;
  p << pi;
  Eigen::VectorXi sv(1);
  sv << s;
  return ScoreInputs::homoscedastic(r, p, sv);
}

ScoreInputs random_inputs(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> rho(0.02, 1.0), pi(0.05, 0.95), var(0.1, 3.0);
  std::bernoulli_distribution coin(0.5);
  ScoreInputs in{Eigen::VectorXd(n), Eigen::VectorXd(n), Eigen::VectorXd(n),
                 Eigen::VectorXd(n), Eigen::VectorXi(n)};
  for (int i = 0; i < n; ++i) {
    in.rho[i] = rho(rng);
    in.pi[i] = pi(rng);
    in.var1[i] = var(rng);
    in.var0[i] = var(rng);
    in.s[i] = coin(rng) ? 1 : 0;
  }
  in.s[0] = 0;
  return in;
}

}  // namespace

TEST_CASE("score values by hand") {
  CHECK(kappa(one_unit(0.5, 0.5)).kappa[0] == 4.0);
  CHECK(kappa(one_unit(1.0, 0.3)).kappa[0] == 0.0);
  CHECK(kappa(one_unit(0.2, 0.1)).kappa[0] == doctest::Approx(400.0 / 9.0).epsilon(1e-14));
  CHECK(kappa_nested(one_unit(1.0, 0.5)).kappa[0] == 4.0);
  CHECK(kappa_nested(one_unit(0.5, 0.5)).kappa[0] == 8.0);
  CHECK(kappa_nested(one_unit(0.25, 0.2)).kappa[0] == doctest::Approx(25.0).epsilon(1e-14));
}

TEST_CASE("score is zero exactly where rho is one") {
  std::mt19937_64 rng(2);
  ScoreInputs in = random_inputs(rng, 50);
  in.rho[3] = 1.0;
  in.rho[17] = 1.0;
  const ScoreTable t = kappa(in);
  for (Eigen::Index i = 0; i < t.size(); ++i) {
    CHECK((t.kappa[i] == 0.0) == (in.rho[i] == 1.0));
  }
}

TEST_CASE("display transform") {
  CHECK(kappa_display(0.0) == 0.0);
  CHECK(kappa_display(16.0) == 0.5);
  CHECK(kappa_display(4.0) == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(kappa_display(1e6) < 1.0);
  CHECK(kappa_display(3.0) < kappa_display(3.5));
  CHECK_THROWS_AS(kappa_display(-1.0), Error);
}

TEST_CASE("positivity violations name the units") {
  Eigen::VectorXd rho(4), pi(4);
  rho << 0.5, 0.0, 0.5, 0.5;
  pi << 0.5, 0.5, 1.0, 0.5;
  Eigen::VectorXi s = Eigen::VectorXi::Zero(4);
  try {
    kappa(ScoreInputs::homoscedastic(rho, pi, s));
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kPositivity);
    CHECK(e.location().find('1') != std::string::npos);
  }
  rho[1] = 0.5;
  try {
    kappa_nested(ScoreInputs::homoscedastic(rho, pi, s));
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kPositivity);
    CHECK(e.location().find('2') != std::string::npos);
  }
}

TEST_CASE("nested score adds the per-unit variance term") {
  std::mt19937_64 rng(4);
  const ScoreInputs in = random_inputs(rng, 300);
  const ScoreTable a = kappa(in);
  const ScoreTable b = kappa_nested(in);
  for (Eigen::Index i = 0; i < in.size(); ++i) {
    const double extra = in.var1[i] / in.pi[i] + in.var0[i] / (1.0 - in.pi[i]);
    CHECK(std::abs(b.kappa[i] - (a.kappa[i] + extra)) < 1e-10 * (1.0 + b.kappa[i]));
  }
}

TEST_CASE("score shape: decreasing in rho, minimised at pi = 0.5") {
  double prev = std::numeric_limits<double>::infinity();
  for (double rho = 0.05; rho <= 1.0; rho += 0.05) {
    const double k = kappa(one_unit(rho, 0.3)).kappa[0];
    CHECK(k < prev);
    prev = k;
  }
  double best = 0.0, best_k = std::numeric_limits<double>::infinity();
  for (int g = 1; g < 100; ++g) {
    const double pi = g / 100.0;
    const double k = kappa(one_unit(0.4, pi)).kappa[0];
    if (k < best_k) {
      best_k = k;
      best = pi;
    }
  }
  CHECK(best == doctest::Approx(0.5));
}

TEST_CASE("variance scaling keeps ranks and sublevel sets") {
  std::mt19937_64 rng(6);
  const ScoreInputs in = random_inputs(rng, 200);
  ScoreInputs scaled = in;
  scaled.var1 *= 3.5;
  scaled.var0 *= 3.5;
  const ScoreTable a = kappa(in);
  const ScoreTable b = kappa(scaled);
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    CHECK(b.kappa[i] == doctest::Approx(3.5 * a.kappa[i]).epsilon(1e-12));
  }
  const Selection sa = optimal_cutoff(a);
  const Selection sb = optimal_cutoff(b);
  CHECK(sa.mask == sb.mask);
}

TEST_CASE("variance bound: two-unit example and empty subset") {
  Eigen::VectorXd rho(2), pi(2);
  rho << 0.5, 0.5;
  pi << 0.5, 0.5;
  Eigen::VectorXi s(2);
  s << 1, 0;
  const ScoreTable t = kappa(ScoreInputs::homoscedastic(rho, pi, s));
  CHECK(variance_bound(t, Mask{true, true}) == 8.0);
  try {
    variance_bound(t, Mask{true, false});
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kDegenerateSubset);
  }
  CHECK_THROWS_AS(variance_bound(t, Mask{true}), Error);
}

TEST_CASE("variance bound equals its numerator/denominator form") {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 50; ++trial) {
    const ScoreInputs in = random_inputs(rng, 20 + 7 * trial);
    const ScoreTable t = kappa(in);
    Mask mask(static_cast<std::size_t>(t.size()));
    std::bernoulli_distribution keep(0.7);
    for (std::size_t i = 0; i < mask.size(); ++i) mask[i] = keep(rng);
    mask[0] = true;
    const double n = static_cast<double>(t.size());
    double num = 0.0, den = 0.0;
    for (Eigen::Index i = 0; i < t.size(); ++i) {
      const double in_b = mask[static_cast<std::size_t>(i)] ? 1.0 : 0.0;
      const double target = 1.0 - in.s[i];
      num += target * in_b * (1.0 - in.rho[i]) / in.rho[i] *
             (in.var1[i] / in.pi[i] + in.var0[i] / (1.0 - in.pi[i]));
      den += target * in_b;
    }
    num /= n;
    den /= n;
    const double direct = num / (den * den);
    CHECK(std::abs(variance_bound(t, mask) - direct) < 1e-10 * direct);
  }
}

TEST_CASE("variance bound plug-in converges to the population integral") {
  // X ~ N(0,1) pooled, rho(x) = logistic(x), pi = 0.5, unit variances, so
  // kappa(x) = 4 exp(-x). B = {x >= -1} = {kappa <= 4e}.
  auto phi = [](double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); };
  double num = 0.0, den = 0.0;
  const double lo = -1.0, hi = 12.0;
  const int steps = 200000;
  const double h = (hi - lo) / steps;
  for (int k = 0; k <= steps; ++k) {
    const double x = lo + k * h;
    const double wt = (k == 0 || k == steps) ? 0.5 : 1.0;
    const double target = 1.0 / (1.0 + std::exp(x));
    num += wt * h * phi(x) * target * 4.0 * std::exp(-x);
    den += wt * h * phi(x) * target;
  }
  const double oracle = num / (den * den);

  std::mt19937_64 rng(21);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unif;
  const int n = 400000;
  Eigen::VectorXd rho(n), pi = Eigen::VectorXd::Constant(n, 0.5);
  Eigen::VectorXi s(n);
  for (int i = 0; i < n; ++i) {
    const double x = normal(rng);
    rho[i] = 1.0 / (1.0 + std::exp(-x));
    s[i] = unif(rng) < rho[i] ? 1 : 0;
  }
  const ScoreTable t = kappa(ScoreInputs::homoscedastic(rho, pi, s));
  const Selection sel = cutoff_at(t, 4.0 * std::exp(1.0));
  CHECK(sel.v_bound == doctest::Approx(oracle).epsilon(0.02));
}

TEST_CASE("k-NN residual variance") {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> normal;
  const int n = 60;
  Eigen::MatrixXd x(n, 2);
  Eigen::VectorXi s(n), a(n);
  Eigen::VectorXd sq(n);
  for (int i = 0; i < n; ++i) {
    x(i, 0) = normal(rng);
    x(i, 1) = normal(rng);
    s[i] = i < 40 ? 1 : 0;
    a[i] = i < 40 ? i % 2 : -1;
    sq[i] = i < 40 ? 2.5 : 0.0;
  }
  const Eigen::VectorXd v1 = knn_residual_variance(x, s, a, sq, 1);
  CHECK(v1.size() == n);
  CHECK((v1.array() - 2.5).abs().maxCoeff() < 1e-12);

  // With k = ceil(sqrt(20)) = 5, a donor's own value is among its neighbours.
  for (int i = 0; i < 40; i += 2) sq[i] = i;
  const Eigen::VectorXd v0 = knn_residual_variance(x, s, a, sq, 0);
  CHECK(v0.minCoeff() >= 0.0);
  CHECK(v0.maxCoeff() <= 38.0);

  Eigen::VectorXi no_treated = a;
  for (int i = 0; i < 40; ++i) no_treated[i] = 0;
  CHECK_THROWS_AS(knn_residual_variance(x, s, no_treated, sq, 1), Error);
}
