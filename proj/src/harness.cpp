#include "large/harness.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>

namespace large {

namespace {

GraphSpec make_truth(const SimConfig& cfg, std::uint64_t graph_seed) {
  switch (cfg.family) {
    case GraphFamily::band1: return make_band(cfg.p, 1);
    case GraphFamily::band2: return make_band(cfg.p, 2);
    case GraphFamily::block: return make_block(cfg.p, 0.01, 0.4, {10, 1, 0.5}, graph_seed);
    case GraphFamily::hub: return make_hub(cfg.p, {10, 1, 0.5}, 0.3, graph_seed);
    case GraphFamily::random_graph:
      return make_random(cfg.p, 0.01, 0.4, {10, 1, 0.5}, graph_seed);
    default: throw std::invalid_argument("simulation requires a named DGP family");
  }
}

RepMetrics score(const PrecisionEstimate& est, const GraphSpec& truth) {
  RepMetrics m;
  m.auroc_threshold = auroc(roc_curve(est.theta, truth));
  m.auroc = m.auroc_threshold;
  m.rmse = rmse_off(est.theta, truth.theta_true);
  m.density = support_metrics(est.theta, truth).density;
  m.converged = est.converged;
  m.sweeps = est.sweeps;
  return m;
}

}  // namespace

std::vector<double> log_grid(double lam_max, double ratio, int size) {
  std::vector<double> grid(size);
  if (size == 1) {
    grid[0] = lam_max;
    return grid;
  }
  const double log_max = std::log(lam_max);
  const double log_min = std::log(lam_max * ratio);
  for (int i = 0; i < size; ++i)
    grid[i] = std::exp(log_min + (log_max - log_min) * i / (size - 1));
  return grid;
}

std::vector<double> default_alpha_grid() {
  return {1e-4, 5e-4, 2e-3, 5e-3, 0.02, 0.05, 0.1, 0.2, 0.35, 0.5, 0.7, 0.9};
}

RocCurve alpha_sweep_roc(const DataMatrix& X, const GraphSpec& truth,
                         SolverConfig base, const std::vector<double>& alphas) {
  std::vector<std::array<double, 3>> pts;  // fpr, tpr, alpha
  for (double a : alphas) {
    base.alpha = a;
    const PrecisionEstimate est = fit_large(X, base);
    const SupportMetrics m = support_metrics(est.theta, truth);
    pts.push_back({m.fpr, m.tpr, a});
  }
  std::sort(pts.begin(), pts.end());
  RocCurve curve;
  curve.thresholds.push_back(std::numeric_limits<double>::infinity());
  curve.fpr.push_back(0.0);
  curve.tpr.push_back(0.0);
  for (const auto& [fpr, tpr, a] : pts) {
    curve.thresholds.push_back(a);
    curve.fpr.push_back(fpr);
    curve.tpr.push_back(tpr);
  }
  curve.thresholds.push_back(-std::numeric_limits<double>::infinity());
  curve.fpr.push_back(1.0);
  curve.tpr.push_back(1.0);
  return curve;
}

Summary summarize(const std::vector<double>& xs) {
  Summary s;
  if (xs.empty()) return s;
  double sum = 0.0;
  for (double x : xs) sum += x;
  s.mean = sum / xs.size();
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - s.mean) * (x - s.mean);
    s.sd = std::sqrt(ss / (xs.size() - 1));
  }
  return s;
}

SimResult run_simulation(const SimConfig& cfg) {
  if (cfg.reps < 1) throw std::invalid_argument("reps must be at least 1");
  SimResult res;
  res.large.resize(cfg.reps);
  if (cfg.run_cv_baseline) {
    res.cv_glasso.resize(cfg.reps);
    res.cv_lambda.resize(cfg.reps);
  }

  auto run_rep = [&](int rep) {
    const GraphSpec truth = make_truth(cfg, derive_seed(cfg.seed, 3 * rep));
    CounterRng sample_rng = CounterRng::stream(cfg.seed, 3 * rep + 1);
    const DataMatrix X = center_columns(sample_mvn(truth, cfg.n, sample_rng));

    const PrecisionEstimate est = fit_large(X, cfg.solver);
    res.large[rep] = score(est, truth);
    RocCurve large_curve = roc_curve(est.theta, truth);
    if (cfg.alpha_sweep) {
      large_curve = alpha_sweep_roc(X, truth, cfg.solver, cfg.roc_alphas);
      res.large[rep].auroc = auroc(large_curve);
    }
    if (rep == 0) res.large_roc_rep0 = large_curve;

    if (cfg.run_cv_baseline) {
      const CovarianceMatrix S = sample_covariance(X);
      double lam_max = 0.0;
      for (arma::uword j = 0; j < cfg.p; ++j)
        for (arma::uword i = 0; i < j; ++i)
          lam_max = std::max(lam_max, std::abs(S.values(i, j)));
      const std::vector<double> grid =
          log_grid(lam_max, cfg.cv_grid_ratio, cfg.cv_grid_size);
      const CvResult cv =
          select_lambda_cv(X, grid, cfg.cv_folds, derive_seed(cfg.seed, 3 * rep + 2));
      const PrecisionEstimate base = fit_glasso(S, cv.lam_star, 1e-6, 200);
      res.cv_glasso[rep] = score(base, truth);
      res.cv_lambda[rep] = cv.lam_star;
      if (rep == 0) res.cv_roc_rep0 = roc_curve(base.theta, truth);
    }
  };

  const int threads = std::max(1, std::min(cfg.threads, cfg.reps));
  if (threads == 1) {
    for (int rep = 0; rep < cfg.reps; ++rep) run_rep(rep);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t)
      pool.emplace_back([&] {
        for (int rep = next.fetch_add(1); rep < cfg.reps; rep = next.fetch_add(1))
          run_rep(rep);
      });
    for (auto& th : pool) th.join();
  }

  for (int rep = 0; rep < cfg.reps; ++rep) {
    res.all_converged &= res.large[rep].converged;
    if (cfg.run_cv_baseline) res.all_converged &= res.cv_glasso[rep].converged;
  }
  return res;
}

}  // namespace large
