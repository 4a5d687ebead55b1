#include "large/stats.hpp"

#include <cmath>

#include "doctest.h"
#include "large/rng.hpp"

using namespace large;

namespace {

// Independent oracle for F(1, d2) quantiles: if T ~ t(d2) then T^2 ~ F(1, d2),
// so CDF_F(x) = 2 CDF_t(sqrt(x)) - 1. The t CDF comes from Simpson quadrature
// of the t density, and the quantile from bisection.
double t_density(double t, double nu) {
  const double c = std::lgamma((nu + 1) / 2) - std::lgamma(nu / 2) -
                   0.5 * std::log(nu * M_PI);
  return std::exp(c - (nu + 1) / 2 * std::log1p(t * t / nu));
}

double t_cdf_upper_half(double x, double nu) {  // integral of density over [0, x]
  const int n = 4000;
  const double h = x / n;
  double acc = t_density(0.0, nu) + t_density(x, nu);
  for (int i = 1; i < n; ++i)
    acc += t_density(i * h, nu) * (i % 2 ? 4.0 : 2.0);
  return acc * h / 3.0;
}

double oracle_f_quantile(double alpha, double d2) {
  const double target = (1.0 - alpha) / 2.0;  // P(0 < T <= sqrt(q))
  double lo = 0.0, hi = 1.0;
  while (2.0 * t_cdf_upper_half(std::sqrt(hi), d2) < 1.0 - alpha) hi *= 2.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (t_cdf_upper_half(std::sqrt(mid), d2) < target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("f_quantile matches the symmetric-ratio point") {
  CHECK(f_quantile(0.5, 1, 1) == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("f_quantile frozen values") {
  CHECK(f_quantile(0.05, 1, 10) == doctest::Approx(4.9646).epsilon(1e-4));
  CHECK(f_quantile(0.01, 1, 20) == doctest::Approx(8.0960).epsilon(1e-4));
}

TEST_CASE("f_quantile agrees with the quadrature oracle") {
  const double alphas[] = {0.2, 0.1, 0.05, 0.02, 0.01, 0.005};
  const int dfs[] = {2, 5, 10, 50, 200};
  for (double a : alphas)
    for (int d2 : dfs) {
      const double ours = f_quantile(a, 1, d2);
      const double oracle = oracle_f_quantile(a, d2);
      CHECK(ours == doctest::Approx(oracle).epsilon(1e-4));
    }
}

TEST_CASE("f_quantile input validation") {
  CHECK_THROWS_AS(f_quantile(0.0, 1, 5), std::invalid_argument);
  CHECK_THROWS_AS(f_quantile(1.0, 1, 5), std::invalid_argument);
  CHECK_THROWS_AS(f_quantile(0.05, 0, 5), std::invalid_argument);
  CHECK_THROWS_AS(f_quantile(0.05, 1, 0), std::invalid_argument);
}

TEST_CASE("f_quantile is strictly decreasing in alpha") {
  double prev = std::numeric_limits<double>::infinity();
  for (int i = 1; i <= 20; ++i) {
    const double a = i / 21.0;
    const double q = f_quantile(a, 1, 12);
    CHECK(q < prev);
    prev = q;
  }
}

TEST_CASE("f_cdf round-trips f_quantile") {
  for (double a : {0.3, 0.1, 0.05, 0.01}) {
    for (int d2 : {3, 17, 80}) {
      const double q = f_quantile(a, 1, d2);
      CHECK(f_cdf(q, 1, d2) == doctest::Approx(1.0 - a).epsilon(1e-6));
    }
  }
}

TEST_CASE("ols_fit examples") {
  const arma::mat Z(arma::vec{1.0, 2.0, 3.0});
  const arma::vec y{2.0, 4.0, 6.0};
  const OlsFit fit = ols_fit(Z, y);
  CHECK(fit.coefficients(0) == doctest::Approx(2.0));
  CHECK(fit.rss == doctest::Approx(0.0));

  const arma::mat Z2(arma::vec{1.0, 1.0, 1.0, 1.0});
  const arma::vec y2{1.0, -1.0, 1.0, -1.0};
  const OlsFit fit2 = ols_fit(Z2, y2);
  CHECK(fit2.coefficients(0) == doctest::Approx(0.0));
  CHECK(fit2.rss == doctest::Approx(4.0));
}

TEST_CASE("ols_fit matches the normal equations") {
  CounterRng rng(5);
  const arma::mat Z = rng.normal_matrix(20, 3);
  const arma::vec truth{1.0, -2.0, 0.5};
  arma::vec noise(20);
  for (auto& v : noise) v = 0.1 * rng.normal();
  const arma::vec y = Z * truth + noise;
  const OlsFit fit = ols_fit(Z, y);
  const arma::vec oracle = arma::inv_sympd(Z.t() * Z) * Z.t() * y;
  CHECK(arma::abs(fit.coefficients - oracle).max() < 1e-8);
}

TEST_CASE("ols_fit rejects rank-deficient designs") {
  arma::mat Z(6, 2);
  CounterRng rng(6);
  for (auto& v : Z.col(0)) v = rng.normal();
  Z.col(1) = 2.0 * Z.col(0);
  const arma::vec y = Z.col(0);
  CHECK_THROWS_WITH_AS(ols_fit(Z, y), "singular design", std::runtime_error);
}

namespace {

arma::mat centered_normal(CounterRng& rng, arma::uword n, arma::uword m) {
  arma::mat Z = rng.normal_matrix(n, m);
  Z.each_row() -= arma::mean(Z, 0);
  return Z;
}

}  // namespace

TEST_CASE("sequential_f_select noiseless signal") {
  CounterRng rng(9);
  arma::mat Z = centered_normal(rng, 30, 4);
  const arma::vec y = 3.0 * Z.col(0);
  const auto r = sequential_f_select(y, Z, {0, 1, 2, 3}, 0.02);
  REQUIRE(r.support.size() == 1);
  CHECK(r.support[0] == 0);
  CHECK(r.sigma2_hat == doctest::Approx(0.0));
}

TEST_CASE("sequential_f_select empty-support rate on pure noise") {
  const int reps = 1000;
  const arma::uword n = 200;
  int empty = 0;
  for (int rep = 0; rep < reps; ++rep) {
    CounterRng rng = CounterRng::stream(101, rep);
    const arma::mat Z = centered_normal(rng, n, 5);
    arma::vec y(n);
    for (auto& v : y) v = rng.normal();
    y -= arma::mean(y);
    const auto r = sequential_f_select(y, Z, {0, 1, 2, 3, 4}, 0.02);
    if (r.support.empty()) {
      ++empty;
      CHECK(r.sigma2_hat == doctest::Approx(arma::dot(y, y) / n));
    }
  }
  const double rate = static_cast<double>(empty) / reps;
  CHECK(rate > 0.96);
  CHECK(rate < 1.0);
}

TEST_CASE("sequential_f_select on a planted orthonormal model") {
  CounterRng rng(33);
  arma::mat G = centered_normal(rng, 100, 4);
  arma::mat Q, R;
  arma::qr_econ(Q, R, G);
  const arma::mat Z = Q * std::sqrt(100.0);  // centered, orthogonal, ||Z_k||^2 = n
  arma::vec noise(100);
  for (auto& v : noise) v = 0.1 * rng.normal();
  noise -= arma::mean(noise);
  const arma::vec y = 2.0 * Z.col(0) + 1.0 * Z.col(1) + noise;
  const auto r = sequential_f_select(y, Z, {0, 1, 2, 3}, 0.02);
  REQUIRE(r.support.size() == 2);
  CHECK(r.support[0] == 0);
  CHECK(r.support[1] == 1);
  CHECK(r.sigma2_hat > 0.005);
  CHECK(r.sigma2_hat < 0.02);
}

TEST_CASE("sequential_f_select support size is capped") {
  CounterRng rng(12);
  const arma::uword n = 8;
  const arma::mat Z = centered_normal(rng, n, 12);
  arma::vec y(n);
  for (auto& v : y) v = rng.normal();
  y -= arma::mean(y);
  std::vector<arma::uword> ranking(12);
  for (arma::uword k = 0; k < 12; ++k) ranking[k] = k;
  const auto r = sequential_f_select(y, Z, ranking, 0.999);
  CHECK(r.support.size() <= n - 2);
}

TEST_CASE("sequential_f_select alpha extremes") {
  CounterRng rng(13);
  const arma::uword n = 60;
  const arma::mat Z = centered_normal(rng, n, 5);
  arma::vec y(n);
  for (auto& v : y) v = rng.normal();
  y -= arma::mean(y);
  // alpha near 1: every generic candidate clears the tiny cutoff
  const auto greedy = sequential_f_select(y, Z, {0, 1, 2, 3, 4}, 0.999);
  CHECK(greedy.support.size() == 5);
  // alpha near 0 on pure noise: nothing enters
  const auto strict = sequential_f_select(y, Z, {0, 1, 2, 3, 4}, 1e-9);
  CHECK(strict.support.empty());
}

TEST_CASE("sequential_f_select skips collinear candidate and stops") {
  CounterRng rng(14);
  arma::mat Z = centered_normal(rng, 40, 4);
  Z.col(2) = 0.5 * Z.col(0) - Z.col(1);  // exactly dependent on the first two
  const arma::vec y = Z.col(0) + Z.col(1);
  const auto r = sequential_f_select(y, Z, {0, 1, 2, 3}, 0.999);
  CHECK(r.aborted_singular);
  CHECK(r.support.size() == 2);
}

TEST_CASE("sigma2 estimate tightens as n doubles") {
  const double sigma2_true = 1.0;
  std::vector<double> spread;
  for (arma::uword n : {100, 200, 400}) {
    std::vector<double> draws;
    for (int rep = 0; rep < 400; ++rep) {
      CounterRng rng = CounterRng::stream(55 + n, rep);
      const arma::mat Z = centered_normal(rng, n, 3);
      arma::vec noise(n);
      for (auto& v : noise) v = rng.normal();
      arma::vec y = Z.col(0) + 0.8 * Z.col(1) + noise;
      y -= arma::mean(y);
      const auto r = sequential_f_select(y, Z, {0, 1, 2}, 0.02);
      draws.push_back(r.sigma2_hat);
    }
    double mean = 0.0;
    for (double d : draws) mean += d;
    mean /= draws.size();
    double var = 0.0;
    for (double d : draws) var += (d - sigma2_true) * (d - sigma2_true);
    spread.push_back(var / draws.size());
    CHECK(std::abs(mean - sigma2_true) < 0.1);
  }
  CHECK(spread[1] / spread[0] == doctest::Approx(0.5).epsilon(0.5));
  CHECK(spread[2] / spread[1] == doctest::Approx(0.5).epsilon(0.5));
}

TEST_CASE("rank_by_partial_residual_sd") {
  CounterRng rng(21);
  const arma::mat Z = centered_normal(rng, 25, 4);
  arma::vec y(25);
  for (auto& v : y) v = rng.normal();
  y -= arma::mean(y);

  SUBCASE("zero beta falls back to index order") {
    const auto order = rank_by_partial_residual_sd(y, Z, arma::zeros(4));
    CHECK(order == std::vector<arma::uword>{0, 1, 2, 3});
  }

  SUBCASE("two-predictor hand computation") {
    const arma::mat Z2 = Z.cols(0, 1);
    const arma::vec beta{1.0, 0.0};
    // r_0 = y (beta_1 = 0 removed), r_1 = y - Z_0
    const double sd0 = arma::norm(y) / std::sqrt(25.0);
    const double sd1 = arma::norm(y - Z2.col(0)) / std::sqrt(25.0);
    const auto order = rank_by_partial_residual_sd(y, Z2, beta);
    if (sd0 > sd1) CHECK(order == std::vector<arma::uword>{0, 1});
    else CHECK(order == std::vector<arma::uword>{1, 0});
    // the two SDs genuinely differ in this fixture
    CHECK(std::abs(sd0 - sd1) > 1e-6);
  }

  SUBCASE("scaling y and beta together preserves the ranking") {
    arma::vec beta{0.7, -0.2, 0.0, 1.1};
    const auto base = rank_by_partial_residual_sd(y, Z, beta);
    const auto scaled = rank_by_partial_residual_sd(3.5 * y, Z, 3.5 * beta);
    CHECK(base == scaled);
  }
}
