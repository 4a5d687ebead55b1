#pragma once

#include <armadillo>
#include <vector>

namespace large {

// Outcome of sequential F-test forward selection. `support` lists accepted
// predictor indices in acceptance order; sigma2_hat = rss / (n - |support|).
struct ForwardSelectionResult {
  std::vector<arma::uword> support;
  double sigma2_hat = 0.0;
  double rss = 0.0;
  arma::vec fitted;
  bool aborted_singular = false;  // a collinear candidate ended the walk early
};

struct OlsFit {
  arma::vec coefficients;
  double rss = 0.0;
  arma::vec fitted;
};

// P(F(d1,d2) <= x) via the regularized incomplete beta function.
double f_cdf(double x, double d1, double d2);

// Upper-tail quantile: returns q with P(F(d1,d2) > q) = alpha. Bracketed
// bisection on f_cdf, converged to ~1e-10 relative.
double f_quantile(double alpha, int d1, int d2);

// Cutoffs F_{alpha; 1, n-i} for steps i = 1..max_steps (cutoffs[i-1] guards step i).
arma::vec f_cutoffs(double alpha, arma::uword n, arma::uword max_steps);

// Least squares without intercept. Throws "singular design" when the smallest
// singular value of Z is below 1e-10 times the largest.
OlsFit ols_fit(const arma::mat& Z, const arma::vec& y);

// Walks `ranking` in order; at step i (current model holds i-1 predictors)
// the candidate enters iff F = (RSS_{i-1} - RSS_i) / (RSS_i / (n-i)) exceeds
// F_{alpha; 1, n-i}. Stops at the first rejection. y and Z are assumed
// centered; the model has no intercept, so RSS_0 = ||y||^2.
ForwardSelectionResult sequential_f_select(const arma::vec& y, const arma::mat& Z,
                                           const std::vector<arma::uword>& ranking,
                                           double alpha);

// Same walk with precomputed cutoffs (cutoffs[i-1] guards step i); callers in
// inner loops precompute them once per (alpha, n).
ForwardSelectionResult sequential_f_select(const arma::vec& y, const arma::mat& Z,
                                           const std::vector<arma::uword>& ranking,
                                           const arma::vec& cutoffs);

// Ranks predictors by SD of the partial residual r_k = y - sum_{l != k} X_l b_l,
// descending, ties by ascending index. SD here is ||r||/sqrt(n); inputs are
// assumed centered.
std::vector<arma::uword> rank_by_partial_residual_sd(const arma::vec& y,
                                                     const arma::mat& X_minus_j,
                                                     const arma::vec& beta);

}  // namespace large
