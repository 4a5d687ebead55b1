#pragma once

#include <armadillo>
#include <set>
#include <utility>
#include <vector>

namespace large {

// n x p observation matrix; rows are samples, columns are variables.
// Construction enforces n >= 2, p >= 2. When `centered` is set, every
// column mean must be zero within 1e-10 of the column's max magnitude.
struct DataMatrix {
  arma::mat values;
  bool centered = false;

  DataMatrix() = default;
  explicit DataMatrix(arma::mat v, bool centered_flag = false);

  arma::uword n() const { return values.n_rows; }
  arma::uword p() const { return values.n_cols; }
};

// Sample covariance S = (1/n) X'X. The upper triangle is mirrored onto the
// lower at construction, so S(j,k) == S(k,j) holds exactly.
struct CovarianceMatrix {
  arma::mat values;
  arma::uword n_samples = 0;

  CovarianceMatrix() = default;
  CovarianceMatrix(arma::mat v, arma::uword n);

  arma::uword p() const { return values.n_cols; }
};

// Blocks of a symmetric matrix with row/column j permuted to the last
// position: M -> [[W11, w12], [w12', w22]].
struct BlockPartition {
  arma::mat W11;
  arma::vec w12;
  double w22 = 0.0;
  arma::uword target_index = 0;
};

using Edge = std::pair<arma::uword, arma::uword>;
using EdgeSet = std::set<Edge>;

// Precision estimate with per-node diagnostics. `support` holds (i,j), i<j,
// exactly the nonzero off-diagonal pattern of theta.
struct PrecisionEstimate {
  arma::mat theta;
  arma::vec sigma2;  // per-node residual variance
  arma::vec lambda;  // per-node penalty at exit
  EdgeSet support;
  bool converged = false;
  bool pd = true;
  int sweeps = 0;
  double ridge = 0.0;  // diagonal ridge added to S; 0 when none was needed
  std::vector<double> rel_change_trace;  // relative Frobenius change per sweep
  std::vector<double> objective_trace;   // glasso objective per sweep (glasso only)
  double diag_drift = 0.0;  // max |diag(W) - expected diagonal| seen over the solve
  arma::mat theta_colwise;  // nodewise columns before symmetrization
};

// sign(z) * max(|z| - lam, 0)
double soft_threshold(double z, double lam);

DataMatrix center_columns(const DataMatrix& X);

// S = (1/n) X'X; rejects input whose centered flag is not set.
CovarianceMatrix sample_covariance(const DataMatrix& X);

BlockPartition partition(const arma::mat& M, arma::uword j);

// Exact inverse of partition().
arma::mat reassemble(const BlockPartition& blocks);

// <X_j, X_k> / (||X_j|| ||X_k||); throws "degenerate column" on zero norm.
double marginal_correlation(const DataMatrix& X, arma::uword j, arma::uword k);

// (M + M') / 2
arma::mat symmetrize(const arma::mat& M);

// Nonzero off-diagonal pattern of a symmetric matrix, upper triangle.
EdgeSet support_of(const arma::mat& theta);

}  // namespace large
