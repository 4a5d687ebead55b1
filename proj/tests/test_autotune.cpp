#include "large/autotune.hpp"

#include <cmath>

#include "doctest.h"
#include "large/core.hpp"
#include "large/rng.hpp"

using namespace large;

namespace {

// columns scaled to ||Z_k||^2 = n after centering
arma::mat normalized_design(CounterRng& rng, arma::uword n, arma::uword m) {
  arma::mat Z = rng.normal_matrix(n, m);
  Z.each_row() -= arma::mean(Z, 0);
  for (arma::uword k = 0; k < m; ++k)
    Z.col(k) *= std::sqrt(static_cast<double>(n)) / arma::norm(Z.col(k));
  return Z;
}

arma::vec centered_noise(CounterRng& rng, arma::uword n, double sd = 1.0) {
  arma::vec y(n);
  for (auto& v : y) v = sd * rng.normal();
  y -= arma::mean(y);
  return y;
}

// plain lasso on min (1/2n)||y - Zb||^2 + lam ||b||_1 by coordinate descent,
// used as the reference for the pinned-sigma reduction
arma::vec reference_lasso(const arma::vec& y, const arma::mat& Z, double lam,
                          int passes = 5000) {
  const double n = static_cast<double>(y.n_elem);
  arma::vec beta = arma::zeros(Z.n_cols);
  arma::vec r = y;
  for (int pass = 0; pass < passes; ++pass) {
    double max_d = 0.0;
    for (arma::uword k = 0; k < Z.n_cols; ++k) {
      const double z = arma::dot(Z.col(k), r) / n + beta(k);
      const double b_new = soft_threshold(z, lam);
      const double d = b_new - beta(k);
      if (d != 0.0) {
        r -= Z.col(k) * d;
        beta(k) = b_new;
        max_d = std::max(max_d, std::abs(d));
      }
    }
    if (max_d < 1e-13) break;
  }
  return beta;
}

double autotune_objective(const arma::vec& y, const arma::mat& Z,
                          const arma::vec& beta, double sigma2, double lambda0) {
  const double n = static_cast<double>(y.n_elem);
  const arma::vec r = y - Z * beta;
  return 0.5 * std::log(sigma2) + arma::dot(r, r) / (2.0 * n * sigma2) +
         lambda0 * arma::norm(beta, 1);
}

}  // namespace

TEST_CASE("lambda0_init examples") {
  CounterRng rng(90);
  const arma::uword n = 40;
  arma::vec y = centered_noise(rng, n);
  y *= std::sqrt(static_cast<double>(n)) / arma::norm(y);  // Var(y) = 1
  arma::mat Z(n, 1);
  Z.col(0) = y;
  CHECK(lambda0_init(y, Z) == doctest::Approx(0.5).epsilon(1e-12));

  // orthogonal column gives zero
  arma::mat G = rng.normal_matrix(n, 1);
  G.col(0) -= y * arma::dot(y, G.col(0)) / arma::dot(y, y);
  G.col(0) -= arma::mean(G.col(0)) * arma::ones(n);
  // re-project after centering to keep exact orthogonality
  G.col(0) -= y * arma::dot(y, G.col(0)) / arma::dot(y, y);
  CHECK(lambda0_init(y, G) == doctest::Approx(0.0).epsilon(1e-10));

  // scaling y by c scales lambda0 by 1/c
  arma::mat Z2 = normalized_design(rng, n, 3);
  const double base = lambda0_init(y, Z2);
  CHECK(lambda0_init(4.0 * y, Z2) == doctest::Approx(base / 4.0).epsilon(1e-10));

  CHECK_THROWS_WITH_AS(lambda0_init(arma::zeros(n), Z2), "zero-variance y",
                       std::runtime_error);
}

TEST_CASE("cd_sweep stays at zero above the threshold") {
  CounterRng rng(91);
  const arma::uword n = 50;
  const arma::mat Z = normalized_design(rng, n, 4);
  const arma::vec y = centered_noise(rng, n);
  AutotuneState st;
  st.beta = arma::zeros(4);
  st.residual = y;
  st.sigma2 = 1.0;
  st.lambda0 = arma::abs(Z.t() * y).max() / n + 0.01;  // above every correlation
  cd_sweep(st, Z, {0, 1, 2, 3});
  CHECK(arma::norm(st.beta, 1) == 0.0);
  CHECK(arma::approx_equal(st.residual, y, "absdiff", 0.0));
}

TEST_CASE("cd_sweep single-predictor closed form") {
  CounterRng rng(92);
  const arma::uword n = 60;
  const arma::mat Z = normalized_design(rng, n, 1);
  const double b = 2.5;
  const arma::vec y = Z.col(0) * b;
  AutotuneState st;
  st.beta = arma::zeros(1);
  st.residual = y;
  st.sigma2 = 0.4;
  st.lambda0 = 0.5;  // effective penalty 0.2 < |b|
  cd_sweep(st, Z, {0});
  CHECK(st.beta(0) == doctest::Approx(b - 0.2).epsilon(1e-12));
}

TEST_CASE("one sweep on an orthonormal design equals the exact lasso") {
  CounterRng rng(93);
  const arma::uword n = 80;
  arma::mat G = rng.normal_matrix(n, 5);
  G.each_row() -= arma::mean(G, 0);
  arma::mat Q, R;
  arma::qr_econ(Q, R, G);
  const arma::mat Z = Q * std::sqrt(static_cast<double>(n));
  arma::vec y = Z * arma::vec{1.0, -0.6, 0.0, 0.3, 0.05} + centered_noise(rng, n, 0.2);
  y -= arma::mean(y);

  const double lam = 0.15;
  AutotuneState st;
  st.beta = arma::zeros(5);
  st.residual = y;
  st.sigma2 = 1.0;
  st.lambda0 = lam;
  cd_sweep(st, Z, {0, 1, 2, 3, 4});

  // with Z'Z = nI the lasso solution is the soft-thresholded correlation
  const arma::vec corr = Z.t() * y / static_cast<double>(n);
  for (arma::uword k = 0; k < 5; ++k)
    CHECK(st.beta(k) == doctest::Approx(soft_threshold(corr(k), lam)).epsilon(1e-10));
}

TEST_CASE("residual patching matches recomputation") {
  CounterRng rng(94);
  const arma::uword n = 50;
  const arma::mat Z = normalized_design(rng, n, 8);
  const arma::vec y = centered_noise(rng, n);
  AutotuneState st;
  st.beta = arma::zeros(8);
  st.residual = y;
  st.sigma2 = 0.01;  // low penalty so coordinates move
  st.lambda0 = 0.1;
  std::vector<arma::uword> order{3, 1, 7, 0, 2, 6, 5, 4};
  for (int sweep = 0; sweep < 5; ++sweep) {
    cd_sweep(st, Z, order);
    const arma::vec fresh = y - Z * st.beta;
    CHECK(arma::abs(st.residual - fresh).max() < 1e-8);
  }
}

TEST_CASE("autotune_lasso on pure noise stays at the noise floor") {
  // The initial penalty is half the smallest beta-killing value (the 1/(2n)
  // scaling in lambda0), so the top-correlation coordinate activates even on
  // noise; its magnitude is capped near the penalty itself. sigma^2 must stay
  // at Var(y).
  int sigma_close = 0, bounded = 0;
  const int reps = 100;
  for (int rep = 0; rep < reps; ++rep) {
    CounterRng rng = CounterRng::stream(777, rep);
    const arma::uword n = 200;
    const arma::mat Z = normalized_design(rng, n, 49);
    const arma::vec y = centered_noise(rng, n);
    const AutotuneFit fit = autotune_lasso(y, Z, {.alpha = 0.02});
    const double var_y = arma::dot(y, y) / n;
    if (std::abs(fit.sigma2 - var_y) < 0.1 * var_y) ++sigma_close;
    if (arma::abs(fit.beta).max() <= 2.0 * fit.lambda) ++bounded;
  }
  CHECK(sigma_close >= 90);
  CHECK(bounded == reps);
}

TEST_CASE("autotune_lasso drives lambda to zero on noiseless data") {
  CounterRng rng(95);
  const arma::uword n = 100;
  const arma::mat Z = normalized_design(rng, n, 6);
  const arma::vec y = 5.0 * Z.col(0);
  const AutotuneFit fit = autotune_lasso(y, Z, {.alpha = 0.02, .max_iter = 500});
  CHECK(std::abs(fit.beta(0) - 5.0) < 1e-4);
  CHECK(fit.sigma2 < 1e-8);
  CHECK(fit.lambda == fit.lambda0 * fit.sigma2);
  REQUIRE(fit.support.size() == 1);
  CHECK(fit.support[0] == 0);
}

TEST_CASE("pinned sigma reproduces the plain lasso") {
  CounterRng rng(96);
  const arma::uword n = 50;
  const arma::mat Z = normalized_design(rng, n, 10);
  arma::vec y = Z * arma::vec{1.0, 0.0, -0.8, 0.0, 0.4, 0.0, 0.0, 0.0, 0.0, 0.0} +
                centered_noise(rng, n, 0.3);
  y -= arma::mean(y);
  const double c = 0.7;
  AutotuneOptions opt;
  opt.sigma_update = SigmaUpdate::fixed;
  opt.sigma2_init = c;
  opt.tol = 1e-12;
  opt.max_iter = 5000;
  const AutotuneFit fit = autotune_lasso(y, Z, opt);
  const arma::vec oracle = reference_lasso(y, Z, fit.lambda0 * c);
  CHECK(arma::abs(fit.beta - oracle).max() < 1e-8);
}

TEST_CASE("objective decreases under the stationarity sigma rule") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    CounterRng rng = CounterRng::stream(888, seed);
    const arma::uword n = 60;
    const arma::mat Z = normalized_design(rng, n, 8);
    arma::vec y = Z.col(0) - 0.5 * Z.col(3) + centered_noise(rng, n, 0.5);
    y -= arma::mean(y);

    AutotuneState st;
    st.beta = arma::zeros(8);
    st.residual = y;
    st.sigma2 = arma::dot(y, y) / n;
    st.lambda0 = lambda0_init(y, Z);
    std::vector<arma::uword> order(8);
    for (arma::uword k = 0; k < 8; ++k) order[k] = k;

    double prev = autotune_objective(y, Z, st.beta, st.sigma2, st.lambda0);
    for (int it = 0; it < 30; ++it) {
      cd_sweep(st, Z, order);
      const double after_beta = autotune_objective(y, Z, st.beta, st.sigma2, st.lambda0);
      CHECK(after_beta <= prev + 1e-12);
      st.sigma2 = arma::dot(st.residual, st.residual) / n;
      const double after_sigma = autotune_objective(y, Z, st.beta, st.sigma2, st.lambda0);
      CHECK(after_sigma <= after_beta + 1e-12);
      prev = after_sigma;
    }
  }
}

TEST_CASE("sigma freeze is permanent and scale equivariance holds") {
  CounterRng rng(97);
  const arma::uword n = 80;
  arma::mat G = rng.normal_matrix(n, 5);
  G.each_row() -= arma::mean(G, 0);
  arma::mat Q, R;
  arma::qr_econ(Q, R, G);
  const arma::mat Z = Q * std::sqrt(static_cast<double>(n));
  arma::vec y = Z * arma::vec{2.0, -1.0, 0.0, 0.0, 0.5} + centered_noise(rng, n, 0.2);
  y -= arma::mean(y);

  AutotuneOptions fixed_opt;
  fixed_opt.sigma_update = SigmaUpdate::fixed;  // sigma2 pinned at Var of the given y
  fixed_opt.tol = 1e-10;
  fixed_opt.max_iter = 2000;
  const AutotuneFit base = autotune_lasso(y, Z, fixed_opt);
  const AutotuneFit scaled = autotune_lasso(3.0 * y, Z, fixed_opt);
  // lambda0 scales as 1/c and Var(cy) as c^2, so the penalty scales with c
  // and the lasso solution is exactly equivariant
  CHECK(arma::abs(scaled.beta - 3.0 * base.beta).max() < 1e-6);

  // the noiseless run freezes sigma: support stops changing once frozen
  const AutotuneFit adaptive = autotune_lasso(y, Z, {.alpha = 0.02, .max_iter = 300});
  CHECK(adaptive.lambda == adaptive.lambda0 * adaptive.sigma2);
}

TEST_CASE("autotune_lasso flags non-convergence instead of throwing") {
  CounterRng rng(98);
  const arma::uword n = 40;
  const arma::mat Z = normalized_design(rng, n, 6);
  arma::vec y = Z.col(0) + centered_noise(rng, n, 0.5);
  y -= arma::mean(y);
  const AutotuneFit fit = autotune_lasso(y, Z, {.alpha = 0.02, .max_iter = 1, .tol = 1e-14});
  CHECK_FALSE(fit.converged);
  CHECK(fit.iterations == 1);
}

TEST_CASE("autotune_lasso rejects unnormalized predictors") {
  CounterRng rng(99);
  arma::mat Z = rng.normal_matrix(30, 3);
  const arma::vec y = centered_noise(rng, 30);
  CHECK_THROWS_AS(autotune_lasso(y, Z, {}), std::invalid_argument);
}
