#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "large/autotune.hpp"
#include "large/core.hpp"
#include "large/dgp.hpp"
#include "large/harness.hpp"
#include "large/io.hpp"
#include "large/metrics.hpp"
#include "large/solver.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitNoConverge = 2;

int resolve_threads(int cli_threads) {
  if (cli_threads > 0) return cli_threads;
  if (const char* env = std::getenv("LARGE_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw ? static_cast<int>(hw) : 1;
}

std::uint64_t draw_seed() {
  std::random_device rd;
  return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

large::DataMatrix load_data(const std::string& input, bool no_center) {
  const arma::mat M = large::read_csv_matrix(input);
  if (M.n_rows < 3) throw std::runtime_error("need more than 2 rows of data");
  if (no_center) return large::DataMatrix(M, true);  // verifies column means
  return large::center_columns(large::DataMatrix(M));
}

json vec_to_json(const arma::vec& v) {
  json arr = json::array();
  for (double x : v) arr.push_back(x);
  return arr;
}

void write_fit_artifacts(const fs::path& out_dir, const large::PrecisionEstimate& est,
                         json extra) {
  fs::create_directories(out_dir);
  large::write_csv_matrix(out_dir / "theta.csv", est.theta);
  large::write_edges_csv(out_dir / "edges.csv", est);
  json j = std::move(extra);
  j["p"] = est.theta.n_cols;
  j["converged"] = est.converged;
  j["sweeps"] = est.sweeps;
  j["pd"] = est.pd;
  j["ridge"] = est.ridge;
  j["edges"] = est.support.size();
  const double pairs = est.theta.n_cols * (est.theta.n_cols - 1) / 2.0;
  j["density"] = est.support.size() / pairs;
  j["sigma2"] = vec_to_json(est.sigma2);
  j["lambda"] = vec_to_json(est.lambda);
  json trace = json::array();
  for (double r : est.rel_change_trace) trace.push_back(r);
  j["rel_change"] = trace;
  std::ofstream(out_dir / "fit.json") << j.dump(2) << "\n";
}

struct FitArgs {
  std::string input;
  std::string estimator = "large";
  double alpha = 0.02;
  double lambda = -1.0;
  int cv = 0;
  int grid = 10;
  double grid_ratio = 0.01;
  double tol = -1.0;
  int max_outer = 20;
  bool diag_penalty = false;
  bool no_guiding = false;
  bool guide_first_sweep = false;
  bool no_center = false;
  std::uint64_t seed = 1;
  std::string out = ".";
};

int run_fit(const FitArgs& a) {
  const large::DataMatrix X = load_data(a.input, a.no_center);
  const fs::path out_dir(a.out);

  if (a.estimator == "glasso") {
    const large::CovarianceMatrix S = large::sample_covariance(X);
    double lam = a.lambda;
    json extra;
    extra["estimator"] = "glasso";
    if (a.cv > 0) {
      double lam_max = 0.0;
      for (arma::uword j = 0; j < X.p(); ++j)
        for (arma::uword i = 0; i < j; ++i)
          lam_max = std::max(lam_max, std::abs(S.values(i, j)));
      const std::vector<double> grid = large::log_grid(lam_max, a.grid_ratio, a.grid);
      const large::CvResult cv = large::select_lambda_cv(X, grid, a.cv, a.seed);
      if (cv.ridge_warning)
        std::cerr << "warning: folds smaller than p, ridge safeguard active\n";
      lam = cv.lam_star;
      extra["cv_folds"] = a.cv;
      extra["cv_grid"] = a.grid;
      extra["seed"] = a.seed;
      json scores = json::array();
      for (double s : cv.mean_scores) scores.push_back(s);
      extra["cv_scores"] = scores;
    } else if (lam < 0.0) {
      throw std::runtime_error("glasso needs --lambda or --cv");
    }
    extra["lambda_glasso"] = lam;
    const large::PrecisionEstimate est = large::fit_glasso(S, lam);
    write_fit_artifacts(out_dir, est, std::move(extra));
    return est.converged ? kExitOk : kExitNoConverge;
  }

  if (a.estimator != "large") throw std::runtime_error("unknown estimator: " + a.estimator);

  large::SolverConfig cfg;
  cfg.alpha = a.alpha;
  cfg.tol_outer = a.tol > 0 ? a.tol : large::SolverConfig::default_tol_outer(X.p());
  cfg.max_outer = a.max_outer;
  cfg.diag_penalty = a.diag_penalty;
  if (a.no_guiding) cfg.guiding = large::GuidingScope::off;
  else if (a.guide_first_sweep) cfg.guiding = large::GuidingScope::first_sweep;

  const large::PrecisionEstimate est =
      a.diag_penalty ? large::fit_large_diag(X, cfg) : large::fit_large(X, cfg);
  json extra;
  extra["estimator"] = a.diag_penalty ? "large_diag" : "large";
  extra["alpha"] = a.alpha;
  extra["tol"] = cfg.tol_outer;
  extra["guiding"] = a.no_guiding ? "off" : (a.guide_first_sweep ? "first_sweep" : "every_sweep");
  write_fit_artifacts(out_dir, est, std::move(extra));
  return est.converged ? kExitOk : kExitNoConverge;
}

struct SimArgs {
  std::string family = "band1";
  arma::uword n = 300, p = 100;
  int reps = 10;
  double alpha = 0.02;
  std::optional<std::uint64_t> seed;
  double tol = -1.0;
  int max_outer = 20;
  bool diag_penalty = false;
  bool no_guiding = false;
  bool no_baseline = false;
  bool alpha_sweep = false;
  int folds = 5;
  int grid = 10;
  int threads = 0;
  std::string out = ".";
};

json summarize_method(const std::vector<large::RepMetrics>& reps) {
  std::vector<double> auc, auc_thr, rmse, density;
  int converged = 0;
  for (const auto& r : reps) {
    auc.push_back(r.auroc);
    auc_thr.push_back(r.auroc_threshold);
    rmse.push_back(r.rmse);
    density.push_back(r.density);
    converged += r.converged;
  }
  const large::Summary sa = large::summarize(auc);
  const large::Summary st = large::summarize(auc_thr);
  const large::Summary sr = large::summarize(rmse);
  const large::Summary sd = large::summarize(density);
  json j;
  j["auroc_mean"] = sa.mean;
  j["auroc_sd"] = sa.sd;
  j["auroc_threshold_mean"] = st.mean;
  j["auroc_threshold_sd"] = st.sd;
  j["rmse_off_mean"] = sr.mean;
  j["rmse_off_sd"] = sr.sd;
  j["density"] = sd.mean;
  j["converged"] = converged;
  return j;
}

int run_simulate(const SimArgs& a) {
  large::SimConfig cfg;
  cfg.family = large::family_from_name(a.family);
  cfg.n = a.n;
  cfg.p = a.p;
  cfg.reps = a.reps;
  cfg.seed = a.seed ? *a.seed : draw_seed();
  cfg.solver.alpha = a.alpha;
  cfg.solver.tol_outer = a.tol > 0 ? a.tol : large::SolverConfig::default_tol_outer(a.p);
  cfg.solver.max_outer = a.max_outer;
  cfg.solver.diag_penalty = a.diag_penalty;
  if (a.no_guiding) cfg.solver.guiding = large::GuidingScope::off;
  cfg.run_cv_baseline = !a.no_baseline;
  cfg.alpha_sweep = a.alpha_sweep;
  cfg.cv_folds = a.folds;
  cfg.cv_grid_size = a.grid;
  cfg.threads = resolve_threads(a.threads);

  const large::SimResult res = large::run_simulation(cfg);

  const fs::path out_dir(a.out);
  fs::create_directories(out_dir);

  std::ofstream per_rep(out_dir / "per_rep.csv");
  per_rep << "rep,method,auroc,auroc_threshold,rmse_off,density,converged,sweeps,lambda\n";
  for (int rep = 0; rep < a.reps; ++rep) {
    const auto& L = res.large[rep];
    per_rep << rep << ",large," << large::format_double(L.auroc) << ','
            << large::format_double(L.auroc_threshold) << ','
            << large::format_double(L.rmse) << ',' << large::format_double(L.density)
            << ',' << (L.converged ? 1 : 0) << ',' << L.sweeps << ",\n";
    if (cfg.run_cv_baseline) {
      const auto& G = res.cv_glasso[rep];
      per_rep << rep << ",cv_glasso," << large::format_double(G.auroc) << ','
              << large::format_double(G.auroc_threshold) << ','
              << large::format_double(G.rmse) << ','
              << large::format_double(G.density) << ',' << (G.converged ? 1 : 0)
              << ',' << G.sweeps << ',' << large::format_double(res.cv_lambda[rep])
              << "\n";
    }
  }
  per_rep.close();

  large::write_roc_csv(out_dir / "roc_rep0.csv", res.large_roc_rep0);
  if (cfg.run_cv_baseline)
    large::write_roc_csv(out_dir / "roc_rep0_cv_glasso.csv", res.cv_roc_rep0);

  json summary;
  summary["family"] = a.family;
  summary["n"] = a.n;
  summary["p"] = a.p;
  summary["reps"] = a.reps;
  summary["alpha"] = a.alpha;
  summary["seed"] = cfg.seed;
  summary["tol"] = cfg.solver.tol_outer;
  summary["max_outer"] = cfg.solver.max_outer;
  summary["large"] = summarize_method(res.large);
  if (cfg.run_cv_baseline) summary["cv_glasso"] = summarize_method(res.cv_glasso);
  std::ofstream(out_dir / "summary.json") << summary.dump(2) << "\n";

  return res.all_converged ? kExitOk : kExitNoConverge;
}

struct AutotuneArgs {
  std::string input;
  int target = 1;  // 1-based column
  double alpha = 0.02;
  double tol = 1e-4;
  int max_iter = 200;
  std::string out = ".";
};

int run_autotune(const AutotuneArgs& a) {
  const arma::mat M = large::read_csv_matrix(a.input);
  if (a.target < 1 || static_cast<arma::uword>(a.target) > M.n_cols)
    throw std::runtime_error("target column out of range");
  if (M.n_rows < 3) throw std::runtime_error("need more than 2 rows of data");
  const large::DataMatrix X = large::center_columns(large::DataMatrix(M));
  for (arma::uword j = 0; j < X.p(); ++j)
    if (arma::norm(X.values.col(j)) == 0.0) throw std::runtime_error("degenerate column");

  const arma::uword t = static_cast<arma::uword>(a.target - 1);
  const arma::vec y = X.values.col(t);
  arma::uvec keep(X.p() - 1);
  for (arma::uword j = 0, c = 0; j < X.p(); ++j)
    if (j != t) keep(c++) = j;
  arma::mat Z = X.values.cols(keep);
  arma::vec scale(Z.n_cols);
  const double root_n = std::sqrt(static_cast<double>(Z.n_rows));
  for (arma::uword k = 0; k < Z.n_cols; ++k) {
    scale(k) = arma::norm(Z.col(k)) / root_n;
    Z.col(k) /= scale(k);
  }

  large::AutotuneOptions opt;
  opt.alpha = a.alpha;
  opt.tol = a.tol;
  opt.max_iter = a.max_iter;
  const large::AutotuneFit fit = large::autotune_lasso(y, Z, opt);

  json j;
  j["target"] = a.target;
  j["alpha"] = a.alpha;
  json beta = json::array();
  for (arma::uword k = 0; k < fit.beta.n_elem; ++k)
    beta.push_back(fit.beta(k) / scale(k));  // back to original column scale
  j["beta"] = beta;
  j["sigma2"] = fit.sigma2;
  j["lambda0"] = fit.lambda0;
  j["lambda"] = fit.lambda;
  auto to_original = [&](const std::vector<arma::uword>& ks) {
    json arr = json::array();
    for (arma::uword k : ks) arr.push_back(keep(k) + 1);
    return arr;
  };
  j["support"] = to_original(fit.support);
  j["active"] = to_original(fit.active);
  j["support_mismatch"] = fit.support != fit.active;
  j["iterations"] = fit.iterations;
  j["converged"] = fit.converged;

  fs::create_directories(a.out);
  std::ofstream(fs::path(a.out) / "autotune.json") << j.dump(2) << "\n";
  return fit.converged ? kExitOk : kExitNoConverge;
}

struct DgpArgs {
  std::string family = "band1";
  arma::uword p = 30;
  std::uint64_t seed = 1;
  double sparsity = 0.01;
  double value = 0.4;
  double hub_value = 0.3;
  std::vector<double> alphas{10.0, 1.0, 0.5};
  std::string out = ".";
};

int run_dgp(const DgpArgs& a) {
  if (a.alphas.size() != 3) throw std::runtime_error("--alphas needs three values");
  const std::array<double, 3> al{a.alphas[0], a.alphas[1], a.alphas[2]};
  large::GraphSpec g;
  switch (large::family_from_name(a.family)) {
    case large::GraphFamily::band1: g = large::make_band(a.p, 1, al); break;
    case large::GraphFamily::band2: g = large::make_band(a.p, 2, al); break;
    case large::GraphFamily::block:
      g = large::make_block(a.p, a.sparsity, a.value, al, a.seed);
      break;
    case large::GraphFamily::hub:
      g = large::make_hub(a.p, al, a.hub_value, a.seed);
      break;
    default: g = large::make_random(a.p, a.sparsity, a.value, al, a.seed); break;
  }

  fs::create_directories(a.out);
  json j;
  j["family"] = large::family_name(g.family);
  j["p"] = g.p();
  j["alphas"] = {g.alphas[0], g.alphas[1], g.alphas[2]};
  json edges = json::array();
  for (const auto& [i, jdx] : g.edges)
    edges.push_back({i + 1, jdx + 1, g.theta_true(i, jdx)});
  j["edges"] = edges;
  json diag = json::array();
  for (arma::uword i = 0; i < g.p(); ++i) diag.push_back(g.theta_true(i, i));
  j["diag"] = diag;
  std::ofstream(fs::path(a.out) / "graph.json") << j.dump(2) << "\n";
  large::write_csv_matrix(fs::path(a.out) / "theta_true.csv", g.theta_true);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse Gaussian graphical model estimation with nodewise adaptive penalties"};
  app.require_subcommand(1);

  FitArgs fit_args;
  CLI::App* fit = app.add_subcommand("fit", "Fit an estimator on a CSV time-series matrix");
  fit->add_option("--input", fit_args.input, "Input CSV (rows: samples, columns: variables)")
      ->required();
  fit->add_option("--estimator", fit_args.estimator, "large or glasso");
  fit->add_option("--alpha", fit_args.alpha, "F-test significance level");
  fit->add_option("--lambda", fit_args.lambda, "Fixed glasso penalty");
  fit->add_option("--cv", fit_args.cv, "Select glasso lambda by K-fold CV");
  fit->add_option("--grid", fit_args.grid, "CV grid size");
  fit->add_option("--grid-ratio", fit_args.grid_ratio, "lambda_min/lambda_max for the CV grid");
  fit->add_option("--tol", fit_args.tol, "Outer convergence threshold");
  fit->add_option("--max-outer", fit_args.max_outer, "Outer sweep cap");
  fit->add_flag("--diag-penalty", fit_args.diag_penalty, "Penalize the diagonal too");
  fit->add_flag("--no-guiding", fit_args.no_guiding, "Disable correlation guiding");
  fit->add_flag("--guide-first-sweep", fit_args.guide_first_sweep,
                "Apply guiding on the first outer sweep only");
  fit->add_flag("--no-center", fit_args.no_center, "Input is already column-centered");
  fit->add_option("--seed", fit_args.seed, "Seed for the CV fold split");
  fit->add_option("--out", fit_args.out, "Output directory");

  SimArgs sim_args;
  CLI::App* sim = app.add_subcommand("simulate", "Replicate a synthetic recovery study");
  sim->add_option("--family", sim_args.family, "band1|band2|block|hub|random")->required();
  sim->add_option("--n", sim_args.n, "Samples per replication")->required();
  sim->add_option("--p", sim_args.p, "Variables")->required();
  sim->add_option("--reps", sim_args.reps, "Replications");
  sim->add_option("--alpha", sim_args.alpha, "F-test significance level");
  sim->add_option("--seed", sim_args.seed, "Master seed (drawn and recorded if omitted)");
  sim->add_option("--tol", sim_args.tol, "Outer convergence threshold");
  sim->add_option("--max-outer", sim_args.max_outer, "Outer sweep cap");
  sim->add_flag("--diag-penalty", sim_args.diag_penalty, "Penalize the diagonal too");
  sim->add_flag("--no-guiding", sim_args.no_guiding, "Disable correlation guiding");
  sim->add_flag("--no-baseline", sim_args.no_baseline, "Skip the CV-glasso baseline");
  sim->add_flag("--alpha-sweep", sim_args.alpha_sweep,
                "Also trace the solver's ROC over the alpha path instead of the single fit");
  sim->add_option("--folds", sim_args.folds, "CV folds for the baseline");
  sim->add_option("--grid", sim_args.grid, "CV grid size for the baseline");
  sim->add_option("--threads", sim_args.threads, "Worker threads (LARGE_THREADS as fallback)");
  sim->add_option("--out", sim_args.out, "Output directory");

  AutotuneArgs at_args;
  CLI::App* at = app.add_subcommand("autotune", "Single self-tuned lasso regression");
  at->add_option("--input", at_args.input, "Input CSV")->required();
  at->add_option("--target", at_args.target, "Response column (1-based)")->required();
  at->add_option("--alpha", at_args.alpha, "F-test significance level");
  at->add_option("--tol", at_args.tol, "Relative beta-change tolerance");
  at->add_option("--max-iter", at_args.max_iter, "Iteration cap");
  at->add_option("--out", at_args.out, "Output directory");

  DgpArgs dgp_args;
  CLI::App* dgp = app.add_subcommand("dgp", "Emit a ground-truth graph specification");
  dgp->add_option("--family", dgp_args.family, "band1|band2|block|hub|random")->required();
  dgp->add_option("--p", dgp_args.p, "Variables")->required();
  dgp->add_option("--seed", dgp_args.seed, "Seed for the random families");
  dgp->add_option("--sparsity", dgp_args.sparsity, "Edge probability (block/random)");
  dgp->add_option("--value", dgp_args.value, "Base edge value (block/random)");
  dgp->add_option("--hub-value", dgp_args.hub_value, "Base edge value (hub)");
  dgp->add_option("--alphas", dgp_args.alphas, "Three block diagonal levels")->expected(3);
  dgp->add_option("--out", dgp_args.out, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInput;
  }

  try {
    if (fit->parsed()) return run_fit(fit_args);
    if (sim->parsed()) return run_simulate(sim_args);
    if (at->parsed()) return run_autotune(at_args);
    if (dgp->parsed()) return run_dgp(dgp_args);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }
  return kExitInput;
}
