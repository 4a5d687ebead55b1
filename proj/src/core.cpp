#include "large/core.hpp"

#include <cmath>
#include <stdexcept>

namespace large {

DataMatrix::DataMatrix(arma::mat v, bool centered_flag)
    : values(std::move(v)), centered(centered_flag) {
  if (values.n_rows < 2 || values.n_cols < 2)
    throw std::invalid_argument("DataMatrix requires n >= 2 and p >= 2");
  if (centered) {
    for (arma::uword j = 0; j < values.n_cols; ++j) {
      const double scale = arma::abs(values.col(j)).max();
      if (std::abs(arma::mean(values.col(j))) > 1e-10 * std::max(scale, 1.0))
        throw std::invalid_argument("column means are not zero; centered flag rejected");
    }
  }
}

CovarianceMatrix::CovarianceMatrix(arma::mat v, arma::uword n)
    : values(std::move(v)), n_samples(n) {
  if (!values.is_square()) throw std::invalid_argument("covariance must be square");
  // mirror the upper triangle so S(j,k) == S(k,j) exactly
  for (arma::uword j = 0; j < values.n_cols; ++j)
    for (arma::uword i = j + 1; i < values.n_rows; ++i) values(i, j) = values(j, i);
  for (arma::uword j = 0; j < values.n_cols; ++j)
    if (values(j, j) < 0) throw std::invalid_argument("negative covariance diagonal");
}

double soft_threshold(double z, double lam) {
  if (z > lam) return z - lam;
  if (z < -lam) return z + lam;
  return 0.0;
}

DataMatrix center_columns(const DataMatrix& X) {
  arma::mat v = X.values;
  v.each_row() -= arma::mean(v, 0);
  return DataMatrix(std::move(v), true);
}

CovarianceMatrix sample_covariance(const DataMatrix& X) {
  if (!X.centered) throw std::invalid_argument("sample_covariance requires centered input");
  const double n = static_cast<double>(X.n());
  arma::mat S = (X.values.t() * X.values) / n;
  return CovarianceMatrix(std::move(S), X.n());
}

BlockPartition partition(const arma::mat& M, arma::uword j) {
  const arma::uword p = M.n_cols;
  if (j >= p) throw std::out_of_range("partition index out of range");
  BlockPartition b;
  b.target_index = j;
  b.W11.set_size(p - 1, p - 1);
  b.w12.set_size(p - 1);
  for (arma::uword c = 0, cc = 0; c < p; ++c) {
    if (c == j) continue;
    for (arma::uword r = 0, rr = 0; r < p; ++r) {
      if (r == j) continue;
      b.W11(rr, cc) = M(r, c);
      ++rr;
    }
    b.w12(cc) = M(c, j);
    ++cc;
  }
  b.w22 = M(j, j);
  return b;
}

arma::mat reassemble(const BlockPartition& b) {
  const arma::uword p = b.W11.n_cols + 1;
  const arma::uword j = b.target_index;
  arma::mat M(p, p);
  for (arma::uword c = 0, cc = 0; c < p; ++c) {
    if (c == j) continue;
    for (arma::uword r = 0, rr = 0; r < p; ++r) {
      if (r == j) continue;
      M(r, c) = b.W11(rr, cc);
      ++rr;
    }
    M(c, j) = b.w12(cc);
    M(j, c) = b.w12(cc);
    ++cc;
  }
  M(j, j) = b.w22;
  return M;
}

double marginal_correlation(const DataMatrix& X, arma::uword j, arma::uword k) {
  const double nj = arma::norm(X.values.col(j));
  const double nk = arma::norm(X.values.col(k));
  if (nj == 0.0 || nk == 0.0) throw std::runtime_error("degenerate column");
  return arma::dot(X.values.col(j), X.values.col(k)) / (nj * nk);
}

arma::mat symmetrize(const arma::mat& M) { return (M + M.t()) / 2.0; }

EdgeSet support_of(const arma::mat& theta) {
  EdgeSet s;
  for (arma::uword j = 0; j < theta.n_cols; ++j)
    for (arma::uword i = 0; i < j; ++i)
      if (theta(i, j) != 0.0) s.insert({i, j});
  return s;
}

}  // namespace large
