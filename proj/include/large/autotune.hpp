#pragma once

#include <armadillo>
#include <optional>
#include <vector>

namespace large {

// How sigma^2 evolves across alternating updates.
//   ftest:        forward-selection MSE (the adaptive rule)
//   stationarity: sigma^2 = ||y - Z b||^2 / n, the exact coordinate minimizer
//   fixed:        sigma^2 pinned at its initial value (plain lasso at lambda0*sigma2)
enum class SigmaUpdate { ftest, stationarity, fixed };

struct AutotuneOptions {
  double alpha = 0.02;
  int max_iter = 200;
  double tol = 1e-4;
  SigmaUpdate sigma_update = SigmaUpdate::ftest;
  std::optional<double> sigma2_init;  // defaults to Var(y)
};

struct AutotuneState {
  arma::vec beta;
  double sigma2 = 0.0;
  double lambda0 = 0.0;
  std::vector<arma::uword> support;  // F-test support set
  std::vector<arma::uword> ranking;  // predictor visit order
  bool sigma_update_flag = true;
  arma::vec residual;  // y - Z beta, patched incrementally by cd_sweep
};

// Both supports are reported: `support` is the F-test selection, `active` the
// nonzero pattern of beta. They need not agree.
struct AutotuneFit {
  arma::vec beta;
  double sigma2 = 0.0;
  double lambda0 = 0.0;
  double lambda = 0.0;  // lambda0 * sigma2 at exit
  std::vector<arma::uword> support;
  std::vector<arma::uword> active;
  int iterations = 0;
  bool converged = false;
};

// (1/Var(y)) * max_k |<Z_k, y>| / (2n). Throws "zero-variance y".
double lambda0_init(const arma::vec& y, const arma::mat& Z);

// One pass of coordinate updates b_k <- S_{lambda0*sigma2}((1/n) Z_k'r + b_k)
// visiting coordinates in `order`, patching the residual incrementally.
// Requires columns of Z normalized to ||Z_k||^2 = n.
void cd_sweep(AutotuneState& state, const arma::mat& Z,
              const std::vector<arma::uword>& order);

// Alternates cd_sweep with the sigma^2 update until the relative l1 change of
// beta drops below opt.tol. Requires centered y and column-normalized Z.
AutotuneFit autotune_lasso(const arma::vec& y, const arma::mat& Z,
                           const AutotuneOptions& opt = {});

}  // namespace large
