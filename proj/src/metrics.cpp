#include "large/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace large {

RocCurve roc_curve(const arma::mat& theta_hat, const GraphSpec& truth) {
  const arma::uword p = truth.p();
  if (theta_hat.n_rows != p || theta_hat.n_cols != p)
    throw std::invalid_argument("roc_curve dimension mismatch");

  // score/label per upper-triangle pair
  std::vector<std::pair<double, bool>> pairs;
  pairs.reserve(p * (p - 1) / 2);
  arma::uword n_pos = 0;
  for (arma::uword j = 0; j < p; ++j)
    for (arma::uword i = 0; i < j; ++i) {
      const bool is_edge = truth.edges.count({i, j}) > 0;
      pairs.push_back({std::abs(theta_hat(i, j)), is_edge});
      n_pos += is_edge;
    }
  const arma::uword n_neg = pairs.size() - n_pos;

  std::sort(pairs.begin(), pairs.end(),
            [](const auto& a, const auto& b) { return a.first > b.first; });

  RocCurve curve;
  curve.thresholds.push_back(std::numeric_limits<double>::infinity());
  curve.fpr.push_back(0.0);
  curve.tpr.push_back(0.0);

  arma::uword tp = 0, fp = 0;
  arma::uword at = 0;
  while (at < pairs.size()) {
    const double t = pairs[at].first;
    while (at < pairs.size() && pairs[at].first == t) {
      pairs[at].second ? ++tp : ++fp;
      ++at;
    }
    curve.thresholds.push_back(t);
    curve.fpr.push_back(n_neg ? static_cast<double>(fp) / n_neg : 0.0);
    curve.tpr.push_back(n_pos ? static_cast<double>(tp) / n_pos : 0.0);
  }

  curve.thresholds.push_back(-std::numeric_limits<double>::infinity());
  curve.fpr.push_back(1.0);
  curve.tpr.push_back(1.0);
  return curve;
}

double auroc(const RocCurve& curve) {
  double area = 0.0;
  for (std::size_t i = 1; i < curve.fpr.size(); ++i)
    area += 0.5 * (curve.fpr[i] - curve.fpr[i - 1]) * (curve.tpr[i] + curve.tpr[i - 1]);
  return area;
}

double rmse_off(const arma::mat& theta_hat, const arma::mat& theta_true) {
  if (arma::size(theta_hat) != arma::size(theta_true))
    throw std::invalid_argument("rmse_off dimension mismatch");
  double num = 0.0, den = 0.0;
  for (arma::uword j = 0; j < theta_true.n_cols; ++j)
    for (arma::uword i = 0; i < theta_true.n_rows; ++i) {
      if (i == j) continue;
      const double d = theta_hat(i, j) - theta_true(i, j);
      num += d * d;
      den += theta_true(i, j) * theta_true(i, j);
    }
  if (den == 0.0) throw std::runtime_error("undefined denominator");
  return num / den;
}

SupportMetrics support_metrics(const arma::mat& theta_hat, const GraphSpec& truth) {
  const arma::uword p = truth.p();
  if (theta_hat.n_rows != p || theta_hat.n_cols != p)
    throw std::invalid_argument("support_metrics dimension mismatch");
  SupportMetrics m;
  for (arma::uword j = 0; j < p; ++j)
    for (arma::uword i = 0; i < j; ++i) {
      const bool predicted = theta_hat(i, j) != 0.0;
      const bool actual = truth.edges.count({i, j}) > 0;
      if (predicted && actual) ++m.tp;
      else if (predicted) ++m.fp;
      else if (actual) ++m.fn;
      else ++m.tn;
    }
  const double total = static_cast<double>(p * (p - 1) / 2);
  m.tpr = (m.tp + m.fn) ? static_cast<double>(m.tp) / (m.tp + m.fn) : 0.0;
  m.fpr = (m.fp + m.tn) ? static_cast<double>(m.fp) / (m.fp + m.tn) : 0.0;
  m.density = static_cast<double>(m.tp + m.fp) / total;
  return m;
}

}  // namespace large
