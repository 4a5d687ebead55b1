#include "large/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace large {

namespace {

// Continued fraction for the regularized incomplete beta, modified Lentz.
double beta_cf(double a, double b, double x) {
  constexpr int kMaxIter = 400;
  constexpr double kEps = 3e-16;
  constexpr double kFpMin = 1e-300;

  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kFpMin) d = kFpMin;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::abs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::abs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) break;
  }
  return h;
}

double reg_inc_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double ln_bt = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                       a * std::log(x) + b * std::log1p(-x);
  const double bt = std::exp(ln_bt);
  if (x < (a + 1.0) / (a + b + 2.0)) return bt * beta_cf(a, b, x) / a;
  return 1.0 - bt * beta_cf(b, a, 1.0 - x) / b;
}

}  // namespace

double f_cdf(double x, double d1, double d2) {
  if (x <= 0.0) return 0.0;
  return reg_inc_beta(d1 / 2.0, d2 / 2.0, d1 * x / (d1 * x + d2));
}

double f_quantile(double alpha, int d1, int d2) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("alpha must be in (0,1)");
  if (d1 < 1 || d2 < 1) throw std::invalid_argument("degrees of freedom must be positive");
  const double target = 1.0 - alpha;
  double lo = 0.0;
  double hi = 1.0;
  int guard = 0;
  while (f_cdf(hi, d1, d2) < target) {
    hi *= 2.0;
    if (++guard > 2048) throw std::runtime_error("f_quantile bracket failure");
  }
  for (int it = 0; it < 300 && (hi - lo) > 1e-12 * std::max(hi, 1.0); ++it) {
    const double mid = 0.5 * (lo + hi);
    (f_cdf(mid, d1, d2) < target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

arma::vec f_cutoffs(double alpha, arma::uword n, arma::uword max_steps) {
  arma::vec cut(max_steps);
  for (arma::uword i = 1; i <= max_steps; ++i)
    cut(i - 1) = f_quantile(alpha, 1, static_cast<int>(n - i));
  return cut;
}

OlsFit ols_fit(const arma::mat& Z, const arma::vec& y) {
  if (Z.n_rows != y.n_elem) throw std::invalid_argument("ols_fit dimension mismatch");
  if (Z.n_cols >= Z.n_rows) throw std::invalid_argument("ols_fit requires m < n");
  const arma::vec sv = arma::svd(Z);
  if (sv.min() < 1e-10 * sv.max()) throw std::runtime_error("singular design");
  OlsFit fit;
  fit.coefficients = arma::solve(Z, y);
  fit.fitted = Z * fit.coefficients;
  const arma::vec resid = y - fit.fitted;
  fit.rss = arma::dot(resid, resid);
  return fit;
}

ForwardSelectionResult sequential_f_select(const arma::vec& y, const arma::mat& Z,
                                           const std::vector<arma::uword>& ranking,
                                           double alpha) {
  const arma::uword n = y.n_elem;
  const arma::uword cap = n >= 3 ? std::min<arma::uword>(n - 2, ranking.size()) : 0;
  return sequential_f_select(y, Z, ranking, f_cutoffs(alpha, n, cap));
}

ForwardSelectionResult sequential_f_select(const arma::vec& y, const arma::mat& Z,
                                           const std::vector<arma::uword>& ranking,
                                           const arma::vec& cutoffs) {
  const arma::uword n = y.n_elem;
  arma::uword max_steps = std::min<arma::uword>(ranking.size(), cutoffs.n_elem);
  if (n >= 3) max_steps = std::min<arma::uword>(max_steps, n - 2);
  else max_steps = 0;

  ForwardSelectionResult out;
  out.fitted = arma::zeros(n);
  arma::vec resid = y;
  double rss = arma::dot(y, y);
  // orthonormal basis of the selected columns, grown one candidate at a time
  arma::mat Q(n, max_steps);
  arma::uword m = 0;

  for (arma::uword step = 1; step <= max_steps; ++step) {
    const arma::uword cand = ranking[step - 1];
    const arma::vec z = Z.col(cand);
    const double z_norm = arma::norm(z);
    arma::vec u = z;
    for (int pass = 0; pass < 2 && m > 0; ++pass)
      u -= Q.cols(0, m - 1) * (Q.cols(0, m - 1).t() * u);
    const double u_norm = arma::norm(u);
    if (z_norm == 0.0 || u_norm <= 1e-10 * z_norm) {
      out.aborted_singular = true;  // collinear candidate: skip and stop
      break;
    }
    u /= u_norm;
    const double c = arma::dot(u, resid);
    const double rss_new = std::max(rss - c * c, 0.0);
    const double df = static_cast<double>(n - step);
    const double f_stat = (rss - rss_new) / (rss_new / df);
    if (!(f_stat > cutoffs(step - 1))) break;  // NaN (0/0) also stops
    Q.col(m++) = u;
    resid -= c * u;
    out.fitted += c * u;
    out.support.push_back(cand);
    rss = rss_new;
  }

  out.rss = rss;
  out.sigma2_hat = rss / static_cast<double>(n - out.support.size());
  return out;
}

std::vector<arma::uword> rank_by_partial_residual_sd(const arma::vec& y,
                                                     const arma::mat& X_minus_j,
                                                     const arma::vec& beta) {
  const arma::uword m = X_minus_j.n_cols;
  if (beta.n_elem != m || X_minus_j.n_rows != y.n_elem)
    throw std::invalid_argument("rank_by_partial_residual_sd dimension mismatch");
  const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(y.n_elem));
  const arma::vec full_resid = y - X_minus_j * beta;
  const double sd_base = arma::norm(full_resid) * inv_sqrt_n;  // shared by all zero coefficients

  arma::vec sd(m);
  for (arma::uword k = 0; k < m; ++k) {
    if (beta(k) == 0.0) {
      sd(k) = sd_base;
    } else {
      sd(k) = arma::norm(full_resid + X_minus_j.col(k) * beta(k)) * inv_sqrt_n;
    }
  }
  std::vector<arma::uword> order(m);
  for (arma::uword k = 0; k < m; ++k) order[k] = k;
  std::stable_sort(order.begin(), order.end(),
                   [&](arma::uword a, arma::uword b) { return sd(a) > sd(b); });
  return order;
}

}  // namespace large
