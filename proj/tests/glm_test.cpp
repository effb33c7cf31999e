#include <cmath>
#include <random>

#include "doctest.h"
#include "genscore/error.hpp"
#include "genscore/glm.hpp"

using namespace genscore;

namespace {

Eigen::MatrixXd random_design(std::mt19937_64& rng, int n, int p) {
  std::normal_distribution<double> normal;
  Eigen::MatrixXd x(n, p);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < p; ++j) x(i, j) = normal(rng);
  return x;
}

Eigen::VectorXd logistic_draws(std::mt19937_64& rng, const Eigen::MatrixXd& x,
                               const Eigen::VectorXd& beta) {
  Eigen::VectorXd y(x.rows());
  std::uniform_real_distribution<double> unif;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double eta = beta[0] + x.row(i).dot(beta.tail(x.cols()));
    y[i] = unif(rng) < 1.0 / (1.0 + std::exp(-eta)) ? 1.0 : 0.0;
  }
  return y;
}

}  // namespace

TEST_CASE("logistic fit on a 2x2 table recovers the empirical log-odds") {
  // x = 0: 30 of 100 events; x = 1: 60 of 100.
  Eigen::MatrixXd x(200, 1);
  Eigen::VectorXd y(200);
  for (int i = 0; i < 200; ++i) {
    const bool exposed = i >= 100;
    const int k = exposed ? i - 100 : i;
    x(i, 0) = exposed ? 1.0 : 0.0;
    y[i] = k < (exposed ? 60 : 30) ? 1.0 : 0.0;
  }
  const FittedGlm fit = fit_logistic(DesignMatrix(x), y);
  CHECK(fit.converged);
  CHECK(std::abs(fit.coefficients[0] - std::log(30.0 / 70.0)) < 1e-6);
  CHECK(std::abs(fit.coefficients[1] - (std::log(60.0 / 40.0) - std::log(30.0 / 70.0))) < 1e-6);
}

TEST_CASE("weighted logistic score equations hold at the solution") {
  std::mt19937_64 rng(11);
  const Eigen::MatrixXd x = random_design(rng, 400, 3);
  Eigen::VectorXd beta(4);
  beta << 0.2, 0.8, -0.5, 0.3;
  const Eigen::VectorXd y = logistic_draws(rng, x, beta);
  Eigen::VectorXd w(400);
  std::uniform_real_distribution<double> unif(0.5, 2.0);
  for (auto& v : w) v = unif(rng);
  const FittedGlm fit = fit_logistic(DesignMatrix(x), y, &w);
  REQUIRE(fit.converged);
  const Eigen::VectorXd p = predict(fit, DesignMatrix(x));
  Eigen::MatrixXd xt(400, 4);
  xt.col(0).setOnes();
  xt.rightCols(3) = x;
  const Eigen::VectorXd score = xt.transpose() * (w.array() * (y - p).array()).matrix();
  CHECK(score.cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("duplicated rows equal weight two") {
  std::mt19937_64 rng(5);
  const Eigen::MatrixXd x = random_design(rng, 150, 2);
  Eigen::VectorXd beta(3);
  beta << -0.3, 1.0, 0.5;
  const Eigen::VectorXd y = logistic_draws(rng, x, beta);
  Eigen::MatrixXd x2(300, 2);
  x2 << x, x;
  Eigen::VectorXd y2(300);
  y2 << y, y;
  const Eigen::VectorXd twos = Eigen::VectorXd::Constant(150, 2.0);
  const FittedGlm doubled = fit_logistic(DesignMatrix(x2), y2);
  const FittedGlm weighted = fit_logistic(DesignMatrix(x), y, &twos);
  CHECK((doubled.coefficients - weighted.coefficients).cwiseAbs().maxCoeff() < 1e-8);

  const FittedGlm ols2 = fit_linear(DesignMatrix(x2), y2);
  const FittedGlm olsw = fit_linear(DesignMatrix(x), y, &twos);
  CHECK((ols2.coefficients - olsw.coefficients).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("IRLS deviance never increases") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::MatrixXd x = random_design(rng, 80, 4);
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(5);
    beta[1] = 2.0;
    beta[2] = -1.5;
    const Eigen::VectorXd y = logistic_draws(rng, x, beta);
    if (y.sum() == 0.0 || y.sum() == 80.0) continue;
    const FittedGlm fit = fit_logistic(DesignMatrix(x), y);
    for (std::size_t k = 1; k < fit.deviance_trace.size(); ++k) {
      CHECK(fit.deviance_trace[k] <= fit.deviance_trace[k - 1]);
    }
    CHECK(fit.iterations <= 100);
  }
}

TEST_CASE("separated data is flagged, not reported as converged") {
  Eigen::MatrixXd x(10, 1);
  Eigen::VectorXd y(10);
  for (int i = 0; i < 10; ++i) {
    x(i, 0) = i - 4.5;
    y[i] = x(i, 0) > 0.0 ? 1.0 : 0.0;
  }
  const FittedGlm fit = fit_logistic(DesignMatrix(x), y);
  CHECK_FALSE(fit.converged);
  CHECK(fit.separation_suspected);
  CHECK(fit.max_abs_coefficient > 0.0);
}

TEST_CASE("OLS agrees with the normal equations") {
  std::mt19937_64 rng(3);
  const Eigen::MatrixXd x = random_design(rng, 120, 3);
  Eigen::VectorXd y(120);
  std::normal_distribution<double> noise;
  for (int i = 0; i < 120; ++i) y[i] = 1.0 + 2.0 * x(i, 0) - x(i, 2) + noise(rng);
  Eigen::VectorXd w(120);
  std::uniform_real_distribution<double> unif(0.1, 3.0);
  for (auto& v : w) v = unif(rng);

  Eigen::MatrixXd xt(120, 4);
  xt.col(0).setOnes();
  xt.rightCols(3) = x;
  const Eigen::MatrixXd xtwx = xt.transpose() * w.asDiagonal() * xt;
  const Eigen::VectorXd xtwy = xt.transpose() * w.asDiagonal() * y;
  const Eigen::VectorXd oracle = xtwx.ldlt().solve(xtwy);

  const FittedGlm fit = fit_linear(DesignMatrix(x), y, &w);
  CHECK((fit.coefficients - oracle).cwiseAbs().maxCoeff() < 1e-8);
  CHECK(fit.converged);
  CHECK(fit.features() == 3);
}

TEST_CASE("rank-deficient OLS design is rejected") {
  Eigen::MatrixXd x(6, 2);
  x << 1, 2, 2, 4, 3, 6, 4, 8, 5, 10, 6, 12;
  Eigen::VectorXd y(6);
  y << 1, 2, 3, 4, 5, 6;
  CHECK_THROWS_AS(fit_linear(DesignMatrix(x), y), Error);
}

TEST_CASE("input validation") {
  CHECK_THROWS_AS(DesignMatrix(Eigen::MatrixXd(0, 2)), Error);
  Eigen::MatrixXd bad(2, 1);
  bad << 1.0, std::nan("");
  CHECK_THROWS_AS(DesignMatrix{bad}, Error);

  Eigen::MatrixXd x(3, 1);
  x << 0, 1, 2;
  Eigen::VectorXd y(3);
  y << 0, 0.5, 1;
  CHECK_THROWS_AS(fit_logistic(DesignMatrix(x), y), Error);
  Eigen::VectorXd shorter(2);
  shorter << 0, 1;
  CHECK_THROWS_AS(fit_logistic(DesignMatrix(x), shorter), Error);
  Eigen::VectorXd neg(3);
  neg << 1, -1, 1;
  y << 0, 1, 1;
  CHECK_THROWS_AS(fit_logistic(DesignMatrix(x), y, &neg), Error);
}

TEST_CASE("logistic is overflow safe and symmetric") {
  CHECK(logistic(0.0) == 0.5);
  CHECK(logistic(800.0) == 1.0);
  CHECK(logistic(-800.0) == 0.0);
  for (double z : {-20.0, -3.0, 0.7, 12.0}) {
    CHECK(logistic(z) + logistic(-z) == doctest::Approx(1.0).epsilon(1e-15));
  }
}

TEST_CASE("small exact fits and predictions") {
  // Constant covariate, half events: the fit must predict 0.5 everywhere.
  const Eigen::MatrixXd constant = Eigen::MatrixXd::Ones(100, 1);
  Eigen::VectorXd half(100);
  for (int i = 0; i < 100; ++i) half[i] = i < 50 ? 1.0 : 0.0;
  const FittedGlm balanced = fit_logistic(DesignMatrix(constant), half);
  CHECK(balanced.converged);
  CHECK((predict(balanced, DesignMatrix(constant)).array() - 0.5).abs().maxCoeff() < 1e-8);

  Eigen::MatrixXd x(5, 1);
  x << 0, 1, 2, 3, 4;
  Eigen::VectorXd y = 2.0 * x.col(0).array() + 1.0;
  const FittedGlm line = fit_linear(DesignMatrix(x), y);
  CHECK(line.coefficients[0] == doctest::Approx(1.0));
  CHECK(line.coefficients[1] == doctest::Approx(2.0));
  CHECK((predict(line, DesignMatrix(x)) - y).cwiseAbs().maxCoeff() < 1e-12);
  Eigen::MatrixXd three(1, 1);
  three << 3.0;
  CHECK(predict(line, DesignMatrix(three))[0] == doctest::Approx(7.0));

  const FittedGlm flat = fit_linear(DesignMatrix(x), Eigen::VectorXd::Constant(5, 4.5));
  CHECK(flat.coefficients[0] == doctest::Approx(4.5));
  CHECK(std::abs(flat.coefficients[1]) < 1e-12);
}

TEST_CASE("logit prediction with fixed coefficients") {
  FittedGlm m;
  m.link = Link::kLogit;
  m.coefficients = Eigen::VectorXd(6);
  m.coefficients << 0, 0.3, 0, -0.3, 0, 0;
  m.converged = true;
  Eigen::MatrixXd x(2, 5);
  x << 1, 0, 1, 0, 0,
       2, 5, -1, 3, 1;
  const Eigen::VectorXd p = predict(m, DesignMatrix(x));
  CHECK(p[0] == 0.5);
  CHECK(p[1] == doctest::Approx(1.0 / (1.0 + std::exp(-0.9))));
  m.coefficients.setZero();
  CHECK((predict(m, DesignMatrix(x)).array() == 0.5).all());
}

TEST_CASE("OLS reproduces responses in the column span") {
  std::mt19937_64 rng(12);
  const Eigen::MatrixXd x = random_design(rng, 30, 4);
  Eigen::VectorXd beta(4);
  beta << 0.5, -1.0, 2.0, 0.25;
  const Eigen::VectorXd y = (x * beta).array() - 3.0;
  const FittedGlm fit = fit_linear(DesignMatrix(x), y);
  CHECK((predict(fit, DesignMatrix(x)) - y).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(fit.coefficients[0] == doctest::Approx(-3.0));
}
