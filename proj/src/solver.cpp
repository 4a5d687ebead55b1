#include "large/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "large/rng.hpp"
#include "large/stats.hpp"

namespace large {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

arma::uvec indices_excluding(arma::uword p, arma::uword j) {
  arma::uvec idx(p - 1);
  for (arma::uword c = 0, cc = 0; c < p; ++c)
    if (c != j) idx(cc++) = c;
  return idx;
}

bool is_subset(const std::vector<arma::uword>& a, const std::vector<arma::uword>& b) {
  for (arma::uword x : a)
    if (std::find(b.begin(), b.end(), x) == b.end()) return false;
  return true;
}

// Ridge added to diag(S) when S is (near-)singular, e.g. p >= n.
double ridge_for(const arma::mat& S, double ridge_eps) {
  const double mean_diag = arma::mean(S.diag());
  const double min_eig = arma::eig_sym(S).min();
  return (min_eig <= 1e-8 * mean_diag) ? ridge_eps * mean_diag : 0.0;
}

// Coordinate descent for 0.5 b'Vb - s12'b + lam ||b||_1, warm started.
// `u` carries V*b and is patched in place. Active-set cycling after the first
// full pass keeps the cost low on sparse solutions.
void lasso_cd(const arma::mat& V, const arma::vec& s12, double lam, arma::vec& beta,
              arma::vec& u, double thr, int max_pass) {
  const arma::uword m = s12.n_elem;
  for (int pass = 0; pass < max_pass; ++pass) {
    double max_d = 0.0;
    for (arma::uword k = 0; k < m; ++k) {
      const double z = s12(k) - (u(k) - V(k, k) * beta(k));
      const double b_new = soft_threshold(z, lam) / V(k, k);
      const double d = b_new - beta(k);
      if (d != 0.0) {
        u += V.col(k) * d;
        beta(k) = b_new;
        max_d = std::max(max_d, std::abs(d) * V(k, k));
      }
    }
    if (max_d <= thr) return;
    // cycle the current active set until stable, then re-run a full pass
    for (int inner = 0; inner < max_pass; ++inner) {
      double max_da = 0.0;
      for (arma::uword k = 0; k < m; ++k) {
        if (beta(k) == 0.0) continue;
        const double z = s12(k) - (u(k) - V(k, k) * beta(k));
        const double b_new = soft_threshold(z, lam) / V(k, k);
        const double d = b_new - beta(k);
        if (d != 0.0) {
          u += V.col(k) * d;
          beta(k) = b_new;
          max_da = std::max(max_da, std::abs(d) * V(k, k));
        }
      }
      if (max_da <= thr) break;
    }
  }
}

// Max stationarity violation of all nodewise subproblems at the current W.
double glasso_kkt_from_state(const arma::mat& Sw, const arma::mat& W,
                             const std::vector<arma::vec>& betas, double lam) {
  const arma::uword p = Sw.n_cols;
  double worst = 0.0;
  for (arma::uword j = 0; j < p; ++j) {
    const arma::uvec idx = indices_excluding(p, j);
    const arma::vec g = W(idx, idx) * betas[j] - Sw(idx, arma::uvec{j});
    for (arma::uword k = 0; k < p - 1; ++k) {
      const double v = betas[j](k) != 0.0
                           ? std::abs(g(k) + lam * (betas[j](k) > 0 ? 1.0 : -1.0))
                           : std::max(0.0, std::abs(g(k)) - lam);
      worst = std::max(worst, v);
    }
  }
  return worst;
}

double glasso_objective(const arma::mat& Sw, const arma::mat& W, double lam) {
  const arma::mat theta = arma::inv_sympd(W);
  double off1 = 0.0;
  for (arma::uword j = 0; j < theta.n_cols; ++j)
    for (arma::uword i = 0; i < theta.n_rows; ++i)
      if (i != j) off1 += std::abs(theta(i, j));
  double ld_val, ld_sign;
  arma::log_det(ld_val, ld_sign, theta);
  return -ld_val + arma::accu(Sw % theta) + lam * off1;
}

struct GlassoCore {
  arma::mat Sw;
  double ridge = 0.0;
  arma::mat W;
  std::vector<arma::vec> betas;

  GlassoCore(const CovarianceMatrix& S, double ridge_eps) {
    Sw = S.values;
    ridge = ridge_for(Sw, ridge_eps);
    Sw.diag() += ridge;
    W = Sw;
    betas.assign(Sw.n_cols, arma::zeros(Sw.n_cols - 1));
  }

  // Runs BCD sweeps until the relative Frobenius change of W drops below tol.
  void run(double lam, double tol, int max_outer, PrecisionEstimate& out,
           bool diagnostics) {
    const arma::uword p = Sw.n_cols;
    const double thr_inner = std::max(tol, 1e-12) * std::max(arma::mean(arma::abs(Sw.diag())), 1e-30) * 0.1;
    arma::mat W_old = W;
    out.converged = false;
    out.sweeps = 0;
    out.rel_change_trace.clear();
    out.objective_trace.clear();
    out.diag_drift = 0.0;
    if (diagnostics) out.objective_trace.push_back(glasso_objective(Sw, W, lam));
    for (int sweep = 1; sweep <= max_outer; ++sweep) {
      for (arma::uword j = 0; j < p; ++j) {
        const arma::uvec idx = indices_excluding(p, j);
        const arma::mat V = W(idx, idx);
        const arma::vec s12 = Sw(idx, arma::uvec{j});
        arma::vec u = V * betas[j];
        lasso_cd(V, s12, lam, betas[j], u, thr_inner, 2000);
        const arma::vec w12 = V * betas[j];
        W(idx, arma::uvec{j}) = w12;
        W(arma::uvec{j}, idx) = w12.t();
      }
      out.sweeps = sweep;
      for (arma::uword j = 0; j < p; ++j)
        out.diag_drift = std::max(out.diag_drift, std::abs(W(j, j) - Sw(j, j)));
      const double rel = arma::norm(W - W_old, "fro") / arma::norm(W_old, "fro");
      out.rel_change_trace.push_back(rel);
      if (diagnostics) out.objective_trace.push_back(glasso_objective(Sw, W, lam));
      if (rel < tol) {
        out.converged = true;
        break;
      }
      W_old = W;
    }
    if (out.converged && glasso_kkt_from_state(Sw, W, betas, lam) > 1e-4)
      out.converged = false;
  }

  PrecisionEstimate extract(double lam, PrecisionEstimate base) const {
    const arma::uword p = Sw.n_cols;
    arma::vec partial_var(p);
    for (arma::uword j = 0; j < p; ++j) {
      const arma::uvec idx = indices_excluding(p, j);
      partial_var(j) = W(j, j) - arma::dot(W(idx, arma::uvec{j}), betas[j]);
    }
    PrecisionEstimate est =
        reconstruct_theta(W, betas, partial_var, false, arma::zeros(p));
    est.lambda = arma::vec(p, arma::fill::value(lam));
    est.converged = base.converged;
    est.sweeps = base.sweeps;
    est.ridge = ridge;
    est.rel_change_trace = base.rel_change_trace;
    est.objective_trace = base.objective_trace;
    est.diag_drift = base.diag_drift;
    return est;
  }
};

}  // namespace

PrecisionEstimate fit_glasso(const CovarianceMatrix& S, double lam, double tol,
                             int max_outer, bool diagnostics) {
  if (lam < 0.0) throw std::invalid_argument("lambda must be nonnegative");
  GlassoCore core(S, 1e-6);
  PrecisionEstimate run_info;
  core.run(lam, tol, max_outer, run_info, diagnostics);
  PrecisionEstimate est = core.extract(lam, run_info);
  if (!est.pd) throw std::runtime_error("lost positive definiteness");
  return est;
}

std::vector<PrecisionEstimate> fit_glasso_path(const CovarianceMatrix& S,
                                               const std::vector<double>& lambdas_desc,
                                               double tol, int max_outer) {
  GlassoCore core(S, 1e-6);
  std::vector<PrecisionEstimate> out;
  out.reserve(lambdas_desc.size());
  for (double lam : lambdas_desc) {
    if (lam < 0.0) throw std::invalid_argument("lambda must be nonnegative");
    PrecisionEstimate run_info;
    core.run(lam, tol, max_outer, run_info, false);
    out.push_back(core.extract(lam, run_info));
  }
  return out;
}

bool check_convergence(const arma::mat& W_new, const arma::mat& W_old, double e) {
  const double denom = arma::norm(W_old, "fro");
  if (denom == 0.0) throw std::invalid_argument("zero W_old norm");
  return arma::norm(W_new - W_old, "fro") / denom < e;
}

PrecisionEstimate reconstruct_theta(const arma::mat& W,
                                    const std::vector<arma::vec>& betas,
                                    const arma::vec& sigma2, bool diag_penalty,
                                    const arma::vec& lambda, bool printed_form) {
  const arma::uword p = W.n_cols;
  if (sigma2.min() <= 0.0) throw std::invalid_argument("sigma2 must be positive");
  arma::mat theta(p, p, arma::fill::zeros);
  for (arma::uword j = 0; j < p; ++j) {
    double tjj;
    if (!diag_penalty) {
      tjj = 1.0 / sigma2(j);
    } else if (printed_form) {
      const double s = std::sqrt(sigma2(j)) + lambda(j);
      tjj = 1.0 / (s * s);
    } else {
      tjj = 1.0 / (sigma2(j) + lambda(j));
    }
    theta(j, j) = tjj;
    for (arma::uword k = 0, o = 0; k < p - 1; ++k, ++o) {
      if (o == j) ++o;
      theta(o, j) = -betas[j](k) * tjj;
    }
  }
  PrecisionEstimate est;
  est.theta_colwise = theta;
  est.theta = symmetrize(theta);
  est.sigma2 = sigma2;
  est.lambda = lambda;
  est.support = support_of(est.theta);
  est.pd = arma::eig_sym(est.theta).min() > 0.0;
  return est;
}

KktReport kkt_check(const PrecisionEstimate& est, const CovarianceMatrix& S,
                    const arma::vec& lambda, double tol) {
  const arma::uword p = S.p();
  arma::mat theta_inv;
  if (!arma::inv_sympd(theta_inv, est.theta)) throw std::runtime_error("singular theta");
  KktReport rep;
  rep.gamma = arma::zeros(p, p);
  for (arma::uword j = 0; j < p; ++j) {
    for (arma::uword i = 0; i < j; ++i) {
      const double lam_ij = std::sqrt(lambda(i) * lambda(j));
      const double resid0 = S.values(i, j) - theta_inv(i, j);
      double g, v;
      if (est.theta(i, j) != 0.0) {
        g = est.theta(i, j) > 0 ? 1.0 : -1.0;
        v = std::abs(resid0 + lam_ij * g);
      } else if (lam_ij > 0.0) {
        g = std::clamp(-resid0 / lam_ij, -1.0, 1.0);
        v = std::max(0.0, std::abs(resid0) - lam_ij);
      } else {
        g = 0.0;
        v = std::abs(resid0);
      }
      rep.gamma(i, j) = rep.gamma(j, i) = g;
      rep.max_violation = std::max(rep.max_violation, v);
    }
  }
  rep.satisfied = rep.max_violation <= tol;
  return rep;
}

namespace {

// Shared engine behind fit_large and fit_large_diag.
class LargeEngine {
 public:
  LargeEngine(const DataMatrix& X, const SolverConfig& cfg) : X_(X), cfg_(cfg) {
    if (!X.centered) throw std::invalid_argument("fit_large requires centered data");
    n_ = X.n();
    p_ = X.p();
    const CovarianceMatrix S_raw = sample_covariance(X);
    for (arma::uword j = 0; j < p_; ++j)
      if (S_raw.values(j, j) <= 0.0) throw std::runtime_error("degenerate column");

    st_.sigma2.set_size(p_);
    st_.lambda0.set_size(p_);
    st_.lambda.set_size(p_);
    for (arma::uword j = 0; j < p_; ++j) {
      st_.sigma2(j) = cfg.sigma2_override ? (*cfg.sigma2_override)(j)
                                          : S_raw.values(j, j);
      double max_off = 0.0;
      for (arma::uword k = 0; k < p_; ++k)
        if (k != j) max_off = std::max(max_off, std::abs(S_raw.values(j, k)));
      st_.lambda0(j) = cfg.lambda_scale * max_off / (2.0 * S_raw.values(j, j));
      st_.lambda(j) = cfg.lambda_override ? *cfg.lambda_override
                                          : st_.lambda0(j) * st_.sigma2(j);
    }

    dlam_.zeros(p_);
    if (cfg.diag_penalty)
      dlam_ = cfg.diag_lambda ? *cfg.diag_lambda : st_.lambda;

    Sw_ = S_raw.values;
    ridge_ = ridge_for(Sw_, cfg.ridge_eps);
    Sw_.diag() += ridge_;
    st_.W = Sw_;
    if (cfg.diag_penalty) st_.W.diag() += dlam_;

    st_.betas.assign(p_, arma::zeros(p_ - 1));
    st_.support_sets.assign(p_, {});
    st_.sigma_flags.assign(p_, 1);

    sigma_updates_enabled_ =
        !cfg.lambda_override.has_value() && !cfg.sigma2_override.has_value();
    if (sigma_updates_enabled_) {
      const arma::uword cap = n_ >= 3 ? std::min<arma::uword>(n_ - 2, p_ - 1) : 0;
      cutoffs_ = f_cutoffs(cfg.alpha, n_, cap);
      if (cfg.guiding != GuidingScope::off) build_corr_rankings(S_raw.values);
    }
  }

  PrecisionEstimate run() {
    arma::mat W_old = st_.W;
    bool converged = false;
    std::vector<double> rel_trace;
    double diag_drift = 0.0;
    int sweep = 0;
    for (sweep = 1; sweep <= cfg_.max_outer; ++sweep) {
      st_.sweep = sweep;
      for (arma::uword j = 0; j < p_; ++j) solve_node(j, sweep);
      for (arma::uword j = 0; j < p_; ++j)
        diag_drift = std::max(diag_drift,
                              std::abs(st_.W(j, j) - Sw_(j, j) - dlam_(j)));
      const double rel = arma::norm(st_.W - W_old, "fro") / arma::norm(W_old, "fro");
      rel_trace.push_back(rel);
      if (rel < cfg_.tol_outer) {
        converged = true;
        break;
      }
      W_old = st_.W;
    }

    arma::vec sigma2_recon = st_.sigma2;
    if (cfg_.lambda_override) {
      // sigma^2 is frozen in the reduction mode; report the implied partial
      // variances so the reconstruction matches plain GLASSO.
      for (arma::uword j = 0; j < p_; ++j) {
        const arma::uvec idx = indices_excluding(p_, j);
        sigma2_recon(j) =
            st_.W(j, j) - arma::dot(st_.W(idx, arma::uvec{j}), st_.betas[j]);
      }
    }
    PrecisionEstimate est = reconstruct_theta(st_.W, st_.betas, sigma2_recon,
                                              cfg_.diag_penalty, dlam_,
                                              cfg_.alg3_printed_diag);
    est.lambda = st_.lambda;
    est.converged = converged;
    est.sweeps = std::min(sweep, cfg_.max_outer);
    est.ridge = ridge_;
    est.rel_change_trace = std::move(rel_trace);
    est.diag_drift = diag_drift;
    return est;
  }

 private:
  void build_corr_rankings(const arma::mat& S_raw) {
    corr_rank_.resize(p_);
    for (arma::uword j = 0; j < p_; ++j) {
      arma::vec score(p_ - 1);
      for (arma::uword k = 0, zk = 0; k < p_; ++k) {
        if (k == j) continue;
        score(zk++) = std::abs(S_raw(j, k)) /
                      std::sqrt(S_raw(j, j) * S_raw(k, k));
      }
      std::vector<arma::uword> order(p_ - 1);
      for (arma::uword k = 0; k < p_ - 1; ++k) order[k] = k;
      std::stable_sort(order.begin(), order.end(),
                       [&](arma::uword a, arma::uword b) { return score(a) > score(b); });
      corr_rank_[j] = std::move(order);
    }
  }

  bool guiding_now(int sweep) const {
    switch (cfg_.guiding) {
      case GuidingScope::first_sweep: return sweep == 1;
      case GuidingScope::every_sweep: return true;
      case GuidingScope::off: return false;
    }
    return false;
  }

  void solve_node(arma::uword j, int sweep) {
    const arma::uvec idx = indices_excluding(p_, j);
    const arma::mat V = st_.W(idx, idx);
    const arma::vec s12 = Sw_(idx, arma::uvec{j});
    const arma::vec y = X_.values.col(j);
    const arma::mat Zj = X_.values.cols(idx);

    arma::vec beta = arma::zeros(p_ - 1);
    arma::vec u = arma::zeros(p_ - 1);  // V * beta, patched incrementally
    std::vector<arma::uword> ranking(p_ - 1);
    for (arma::uword k = 0; k < p_ - 1; ++k) ranking[k] = k;
    std::vector<arma::uword> support;
    bool flag = sigma_updates_enabled_;
    double lam_j = st_.lambda(j);

    // diagonal penalties of the other nodes, aligned with beta's indexing
    arma::vec dlam_sub(p_ - 1, arma::fill::zeros);
    if (cfg_.diag_penalty)
      for (arma::uword k = 0, o = 0; k < p_ - 1; ++k, ++o) {
        if (o == j) ++o;
        dlam_sub(k) = dlam_(o);
      }

    for (int it = 1; it <= cfg_.max_inner; ++it) {
      const std::vector<arma::uword> support_old = support;
      const arma::vec beta_old = beta;
      const double sigma2_old = st_.sigma2(j);

      for (arma::uword k : ranking) {
        const double z = s12(k) - (u(k) - V(k, k) * beta(k));
        const double b_new = soft_threshold(z, lam_j) / (V(k, k) + dlam_sub(k));
        const double d = b_new - beta(k);
        if (d != 0.0) {
          u += V.col(k) * d;
          beta(k) = b_new;
        }
      }

      if (flag) {
        // First inner iteration: the correlation ranking where guiding
        // applies, otherwise the freshly initialized natural order stands.
        // Later iterations re-rank by partial-residual SD.
        if (it > 1) {
          ranking = rank_by_partial_residual_sd(y, Zj, beta);
        } else if (guiding_now(sweep)) {
          ranking = corr_rank_[j];
        } else if (cfg_.guiding == GuidingScope::first_sweep && sweep > 1) {
          ranking = rank_by_partial_residual_sd(y, Zj, beta);
        }
        const ForwardSelectionResult sel = sequential_f_select(y, Zj, ranking, cutoffs_);
        support = sel.support;
        st_.sigma2(j) = sel.sigma2_hat;
        st_.lambda(j) = st_.lambda0(j) * st_.sigma2(j);
        lam_j = st_.lambda(j);
        if (cfg_.diag_penalty && !cfg_.diag_lambda) {
          dlam_(j) = st_.lambda(j);
        }
        if (is_subset(support, support_old)) flag = false;
      }

      const double denom = arma::norm(beta_old, 1);
      const double num = arma::norm(beta - beta_old, 1);
      double error;
      if (denom > 0.0) error = num / denom;
      else if (num > 0.0) error = kInf;
      else if (flag || st_.sigma2(j) != sigma2_old) error = kInf;
      else error = 0.0;
      if (error < cfg_.tol_inner) break;
    }

    arma::vec w12 = V * beta;
    if (cfg_.diag_penalty) w12 += dlam_sub % beta;
    st_.W(idx, arma::uvec{j}) = w12;
    st_.W(arma::uvec{j}, idx) = w12.t();
    if (cfg_.diag_penalty) st_.W(j, j) = Sw_(j, j) + dlam_(j);

    st_.betas[j] = beta;
    st_.support_sets[j] = support;
    st_.sigma_flags[j] = flag ? 1 : 0;
  }

  const DataMatrix& X_;
  const SolverConfig& cfg_;
  arma::uword n_ = 0, p_ = 0;
  arma::mat Sw_;
  double ridge_ = 0.0;
  LargeState st_;
  arma::vec dlam_;
  arma::vec cutoffs_;
  std::vector<std::vector<arma::uword>> corr_rank_;
  bool sigma_updates_enabled_ = true;
};

}  // namespace

PrecisionEstimate fit_large(const DataMatrix& X, const SolverConfig& cfg) {
  return LargeEngine(X, cfg).run();
}

PrecisionEstimate fit_large_diag(const DataMatrix& X, SolverConfig cfg) {
  cfg.diag_penalty = true;
  return LargeEngine(X, cfg).run();
}

CvResult select_lambda_cv(const DataMatrix& X, const std::vector<double>& grid,
                          int K, std::uint64_t seed) {
  if (K < 2) throw std::invalid_argument("K must be at least 2");
  if (grid.empty()) throw std::invalid_argument("empty lambda grid");
  for (double lam : grid)
    if (lam <= 0.0) throw std::invalid_argument("grid values must be positive");

  const arma::uword n = X.n();
  const arma::uword p = X.p();
  const std::vector<arma::uword> perm = CounterRng::stream(seed, 0).permutation(n);

  CvResult res;
  res.ridge_warning = static_cast<double>(n) / K < static_cast<double>(p);

  // descending path order with warm starts; scores mapped back to grid order
  std::vector<arma::uword> by_desc(grid.size());
  for (arma::uword i = 0; i < grid.size(); ++i) by_desc[i] = i;
  std::sort(by_desc.begin(), by_desc.end(),
            [&](arma::uword a, arma::uword b) { return grid[a] > grid[b]; });
  std::vector<double> lambdas_desc;
  for (arma::uword i : by_desc) lambdas_desc.push_back(grid[i]);

  arma::vec total_scores(grid.size(), arma::fill::zeros);
  for (int f = 0; f < K; ++f) {
    std::vector<arma::uword> test_rows, train_rows;
    for (arma::uword i = 0; i < n; ++i)
      (static_cast<int>(i % K) == f ? test_rows : train_rows).push_back(perm[i]);

    const arma::mat X_train = X.values.rows(arma::uvec(train_rows));
    const arma::mat X_test = X.values.rows(arma::uvec(test_rows));
    const arma::rowvec mu = arma::mean(X_train, 0);
    const arma::mat Xtr = X_train.each_row() - mu;
    const arma::mat Xte = X_test.each_row() - mu;
    const CovarianceMatrix S_train(Xtr.t() * Xtr / static_cast<double>(Xtr.n_rows),
                                   Xtr.n_rows);
    const arma::mat S_test = Xte.t() * Xte / static_cast<double>(Xte.n_rows);

    const std::vector<PrecisionEstimate> fits =
        fit_glasso_path(S_train, lambdas_desc, 1e-6, 200);
    for (arma::uword i = 0; i < fits.size(); ++i) {
      double score = -kInf;
      if (fits[i].pd) {
        double ld_val, ld_sign;
        arma::log_det(ld_val, ld_sign, fits[i].theta);
        if (ld_sign > 0) score = ld_val - arma::accu(S_test % fits[i].theta);
      }
      total_scores(by_desc[i]) += score;
    }
  }

  res.mean_scores = total_scores / static_cast<double>(K);
  arma::uword best = 0;
  for (arma::uword i = 1; i < grid.size(); ++i) {
    if (res.mean_scores(i) > res.mean_scores(best) ||
        (res.mean_scores(i) == res.mean_scores(best) && grid[i] > grid[best]))
      best = i;
  }
  res.lam_star = grid[best];
  return res;
}

}  // namespace large
