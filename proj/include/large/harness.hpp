#pragma once

#include <cstdint>
#include <vector>

#include "large/dgp.hpp"
#include "large/metrics.hpp"
#include "large/solver.hpp"

namespace large {

// Significance levels swept for the solver's ROC, sparse to dense.
std::vector<double> default_alpha_grid();

// One simulation study: generate truth, sample, fit LARGE (and the CV-GLASSO
// baseline), score recovery. Replication r draws streams derive_seed(seed, 3r)
// for the graph, 3r+1 for sampling and 3r+2 for the CV split, so results are
// independent of thread scheduling.
struct SimConfig {
  GraphFamily family = GraphFamily::band1;
  arma::uword n = 300;
  arma::uword p = 100;
  int reps = 10;
  std::uint64_t seed = 1;
  SolverConfig solver;
  bool run_cv_baseline = true;
  int cv_folds = 5;
  int cv_grid_size = 10;
  double cv_grid_ratio = 0.01;  // lambda_min / lambda_max on the log grid
  // Optionally trace the solver's ROC by sweeping the significance level (its
  // tuning knob, the analog of a glasso path) instead of thresholding the
  // single fit's magnitudes.
  bool alpha_sweep = false;
  std::vector<double> roc_alphas = default_alpha_grid();
  int threads = 1;
};

struct RepMetrics {
  double auroc = 0.0;            // alpha-sweep AUROC for the adaptive solver
  double auroc_threshold = 0.0;  // |theta|-threshold AUROC of the single fit
  double rmse = 0.0;
  double density = 0.0;
  bool converged = true;
  int sweeps = 0;
};

struct SimResult {
  std::vector<RepMetrics> large;      // indexed by replication
  std::vector<RepMetrics> cv_glasso;  // empty when the baseline is off
  std::vector<double> cv_lambda;      // chosen penalty per replication
  RocCurve large_roc_rep0;
  RocCurve cv_roc_rep0;
  bool all_converged = true;
};

SimResult run_simulation(const SimConfig& cfg);

struct Summary {
  double mean = 0.0;
  double sd = 0.0;  // 0 for a single sample
};
Summary summarize(const std::vector<double>& xs);

// Log-spaced penalty grid [ratio*lam_max, lam_max], ascending.
std::vector<double> log_grid(double lam_max, double ratio, int size);

// Fits the solver once per level in `alphas` and traces the support's
// (fpr, tpr); the curve's threshold column records the levels.
RocCurve alpha_sweep_roc(const DataMatrix& X, const GraphSpec& truth,
                         SolverConfig base, const std::vector<double>& alphas);

}  // namespace large
