#pragma once

#include <armadillo>
#include <vector>

#include "large/dgp.hpp"

namespace large {

// Threshold sweep over |theta_hat_ij|, anchored at (0,0) and (1,1); fpr is
// non-decreasing along the list.
struct RocCurve {
  std::vector<double> thresholds;
  std::vector<double> fpr;
  std::vector<double> tpr;
};

struct SupportMetrics {
  arma::uword tp = 0, fp = 0, tn = 0, fn = 0;
  double tpr = 0.0, fpr = 0.0, density = 0.0;
};

RocCurve roc_curve(const arma::mat& theta_hat, const GraphSpec& truth);

// Trapezoidal area under the curve.
double auroc(const RocCurve& curve);

// ||off(theta_hat) - off(theta_true)||_F^2 / ||off(theta_true)||_F^2.
// Throws "undefined denominator" if theta_true has no off-diagonal mass.
double rmse_off(const arma::mat& theta_hat, const arma::mat& theta_true);

// Confusion counts over upper-triangle pairs, nonzeros as predicted edges.
SupportMetrics support_metrics(const arma::mat& theta_hat, const GraphSpec& truth);

}  // namespace large
