#include "large/autotune.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "large/core.hpp"
#include "large/stats.hpp"

namespace large {

namespace {

bool is_subset(const std::vector<arma::uword>& a, const std::vector<arma::uword>& b) {
  for (arma::uword x : a)
    if (std::find(b.begin(), b.end(), x) == b.end()) return false;
  return true;
}

}  // namespace

double lambda0_init(const arma::vec& y, const arma::mat& Z) {
  const double n = static_cast<double>(y.n_elem);
  const double var_y = arma::dot(y, y) / n;
  if (var_y <= 0.0) throw std::runtime_error("zero-variance y");
  const double max_corr = Z.n_cols ? arma::abs(Z.t() * y).max() : 0.0;
  return max_corr / (2.0 * n) / var_y;
}

void cd_sweep(AutotuneState& state, const arma::mat& Z,
              const std::vector<arma::uword>& order) {
  const double n = static_cast<double>(Z.n_rows);
  const double lam = state.lambda0 * state.sigma2;
  for (arma::uword k : order) {
    const double beta_old = state.beta(k);
    const double z = arma::dot(Z.col(k), state.residual) / n + beta_old;
    const double beta_new = soft_threshold(z, lam);
    if (beta_new != beta_old) {
      state.residual += Z.col(k) * (beta_old - beta_new);
      state.beta(k) = beta_new;
    }
  }
}

AutotuneFit autotune_lasso(const arma::vec& y, const arma::mat& Z,
                           const AutotuneOptions& opt) {
  const arma::uword n = y.n_elem;
  const arma::uword m = Z.n_cols;
  if (Z.n_rows != n) throw std::invalid_argument("autotune_lasso dimension mismatch");
  for (arma::uword k = 0; k < m; ++k) {
    const double sq = arma::dot(Z.col(k), Z.col(k));
    if (std::abs(sq - static_cast<double>(n)) > 1e-6 * n)
      throw std::invalid_argument("predictors must be normalized to ||Z_k||^2 = n");
  }

  AutotuneState st;
  st.beta = arma::zeros(m);
  st.residual = y;
  st.sigma2 = opt.sigma2_init ? *opt.sigma2_init : arma::dot(y, y) / static_cast<double>(n);
  st.lambda0 = lambda0_init(y, Z);
  st.ranking.resize(m);
  for (arma::uword k = 0; k < m; ++k) st.ranking[k] = k;
  st.sigma_update_flag = opt.sigma_update == SigmaUpdate::ftest;

  arma::vec cutoffs;
  if (st.sigma_update_flag) {
    const arma::uword cap = n >= 3 ? std::min<arma::uword>(n - 2, m) : 0;
    cutoffs = f_cutoffs(opt.alpha, n, cap);
  }

  AutotuneFit fit;
  bool converged = false;
  int iter = 0;
  for (; iter < opt.max_iter; ++iter) {
    const std::vector<arma::uword> support_old = st.support;
    const arma::vec beta_old = st.beta;
    const double sigma2_old = st.sigma2;

    cd_sweep(st, Z, st.ranking);

    if (st.sigma_update_flag) {
      st.ranking = rank_by_partial_residual_sd(y, Z, st.beta);
      const ForwardSelectionResult sel = sequential_f_select(y, Z, st.ranking, cutoffs);
      st.support = sel.support;
      st.sigma2 = sel.sigma2_hat;
      if (is_subset(st.support, support_old)) st.sigma_update_flag = false;
    } else if (opt.sigma_update == SigmaUpdate::stationarity) {
      st.sigma2 = arma::dot(st.residual, st.residual) / static_cast<double>(n);
    }

    const double denom = arma::norm(beta_old, 1);
    const double num = arma::norm(st.beta - beta_old, 1);
    double error;
    if (denom > 0.0) {
      error = num / denom;
    } else if (num > 0.0) {
      error = std::numeric_limits<double>::infinity();
    } else if (st.sigma_update_flag || st.sigma2 != sigma2_old) {
      // beta pinned at zero but sigma^2 may still move; keep iterating
      error = std::numeric_limits<double>::infinity();
    } else {
      error = 0.0;  // all-zero fixed point with sigma frozen
    }
    if (error < opt.tol) {
      converged = true;
      ++iter;
      break;
    }
  }

  fit.beta = st.beta;
  fit.sigma2 = st.sigma2;
  fit.lambda0 = st.lambda0;
  fit.lambda = st.lambda0 * st.sigma2;
  fit.support = st.support;
  for (arma::uword k = 0; k < m; ++k)
    if (st.beta(k) != 0.0) fit.active.push_back(k);
  fit.iterations = iter;
  fit.converged = converged;
  return fit;
}

}  // namespace large
