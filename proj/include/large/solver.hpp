#pragma once

#include <armadillo>
#include <cstdint>
#include <optional>
#include <vector>

#include "large/core.hpp"

namespace large {

// When the correlation-guided ranking seeds the F-test model. The first inner
// iteration of a node visit otherwise keeps the natural index order; later
// iterations always re-rank by partial-residual SD.
//   every_sweep: first inner iteration of every node visit (default)
//   first_sweep: first outer sweep only; later sweeps fall back to SD ranking
//   off:         never; the no-guiding ablation
enum class GuidingScope { every_sweep, first_sweep, off };

struct SolverConfig {
  double alpha = 0.02;       // F-test significance level
  double tol_outer = 0.005;  // relative Frobenius threshold e
  int max_outer = 20;
  double tol_inner = 1e-4;   // relative l1 change of beta per node solve
  int max_inner = 50;
  bool diag_penalty = false;
  double ridge_eps = 1e-6;   // ridge scale relative to mean(diag S)
  GuidingScope guiding = GuidingScope::every_sweep;

  // Scale on the nodewise penalty lambda_j = scale * lambda0_j * sigma_j^2;
  // 0.5 is the reference calibration, 1.0 applies the formula literally.
  double lambda_scale = 0.5;

  // Appendix reconstruction as printed, 1/(sigma_j + lambda_j)^2, instead of
  // the dimensionally consistent 1/(sigma_j^2 + lambda_j).
  bool alg3_printed_diag = false;

  // Pins every lambda_j to a global value and disables sigma^2 updates,
  // reducing the solver to plain GLASSO.
  std::optional<double> lambda_override;

  // Pins the per-node sigma_j^2 (disables the F-test update); lambda_j stays
  // lambda0_j * sigma_j^2. Diagnostic surface for oracle comparisons.
  std::optional<arma::vec> sigma2_override;

  // Fixed per-node diagonal penalties for diag_penalty mode; when unset the
  // adaptive lambda_j is used.
  std::optional<arma::vec> diag_lambda;

  static double default_tol_outer(arma::uword p) { return p <= 100 ? 0.005 : 0.05; }
};

struct LargeState {
  arma::mat W;
  std::vector<arma::vec> betas;  // per node, length p-1
  arma::vec sigma2;
  arma::vec lambda0;
  arma::vec lambda;
  std::vector<std::vector<arma::uword>> support_sets;
  std::vector<char> sigma_flags;
  int sweep = 0;
};

struct KktReport {
  double max_violation = 0.0;
  arma::mat gamma;
  bool satisfied = false;
};

struct CvResult {
  double lam_star = 0.0;
  arma::vec mean_scores;  // per grid entry, held-out log det T - tr(S_test T)
  bool ridge_warning = false;
};

// GLASSO with a global penalty. Converges on the relative Frobenius change of
// W; throws "lost positive definiteness" if the reconstructed estimate is not
// PD. `diagnostics` additionally records the objective per sweep.
PrecisionEstimate fit_glasso(const CovarianceMatrix& S, double lam,
                             double tol = 1e-7, int max_outer = 200,
                             bool diagnostics = false);

// Warm-started fits along a descending penalty path; results match per-lambda
// fit_glasso at the same tolerance.
std::vector<PrecisionEstimate> fit_glasso_path(const CovarianceMatrix& S,
                                               const std::vector<double>& lambdas_desc,
                                               double tol = 1e-6, int max_outer = 200);

// Nodewise-adaptive solver; X must be centered with no zero-variance columns.
PrecisionEstimate fit_large(const DataMatrix& X, const SolverConfig& cfg);

// Variant penalizing the diagonal as well (forces cfg.diag_penalty).
PrecisionEstimate fit_large_diag(const DataMatrix& X, SolverConfig cfg);

// Subgradient certificate for -inv(Theta) + S + Lambda.Gamma = 0 with
// Lambda_ij = sqrt(lambda_i lambda_j) off the diagonal. Violations are
// reported over off-diagonal entries only.
KktReport kkt_check(const PrecisionEstimate& est, const CovarianceMatrix& S,
                    const arma::vec& lambda, double tol);

// K-fold out-of-sample likelihood selection for the GLASSO baseline. Ties
// resolve to the larger lambda.
CvResult select_lambda_cv(const DataMatrix& X, const std::vector<double>& grid,
                          int K, std::uint64_t seed);

// ||W_new - W_old||_F / ||W_old||_F < e
bool check_convergence(const arma::mat& W_new, const arma::mat& W_old, double e);

// Builds Theta columnwise from per-node regressions, symmetrizes by
// averaging, and flags (not throws) loss of positive definiteness.
PrecisionEstimate reconstruct_theta(const arma::mat& W,
                                    const std::vector<arma::vec>& betas,
                                    const arma::vec& sigma2, bool diag_penalty,
                                    const arma::vec& lambda,
                                    bool printed_form = false);

}  // namespace large
