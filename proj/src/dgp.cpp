#include "large/dgp.hpp"

#include <cmath>
#include <stdexcept>

namespace large {

const char* family_name(GraphFamily f) {
  switch (f) {
    case GraphFamily::band1: return "band1";
    case GraphFamily::band2: return "band2";
    case GraphFamily::block: return "block";
    case GraphFamily::hub: return "hub";
    case GraphFamily::random_graph: return "random";
    case GraphFamily::custom: return "custom";
  }
  return "custom";
}

GraphFamily family_from_name(const std::string& name) {
  if (name == "band1") return GraphFamily::band1;
  if (name == "band2") return GraphFamily::band2;
  if (name == "block") return GraphFamily::block;
  if (name == "hub") return GraphFamily::hub;
  if (name == "random") return GraphFamily::random_graph;
  throw std::invalid_argument("unknown graph family: " + name);
}

std::array<BlockRange, 3> block_bounds(arma::uword p) {
  const arma::uword base = p / 3;
  const arma::uword rem = p % 3;
  // sizes differ by at most one, larger blocks last
  std::array<arma::uword, 3> sizes{base, base, base};
  if (rem >= 1) sizes[2] += 1;
  if (rem == 2) sizes[1] += 1;
  std::array<BlockRange, 3> out;
  arma::uword at = 0;
  for (int b = 0; b < 3; ++b) {
    out[b] = {at, at + sizes[b]};
    at += sizes[b];
  }
  return out;
}

namespace {

int block_of(const std::array<BlockRange, 3>& blocks, arma::uword i) {
  for (int b = 0; b < 3; ++b)
    if (i >= blocks[b].begin && i < blocks[b].end) return b;
  return 2;
}

GraphSpec finalize(arma::mat theta, GraphFamily family,
                   std::array<double, 3> alphas,
                   std::array<BlockRange, 3> blocks, bool repair) {
  GraphSpec spec;
  spec.theta_true = repair ? ensure_pd(theta, 0.05) : std::move(theta);
  spec.edges = support_of(spec.theta_true);
  spec.family = family;
  spec.alphas = alphas;
  spec.blocks = blocks;
  return spec;
}

}  // namespace

GraphSpec make_band(arma::uword p, int order, std::array<double, 3> alphas) {
  if (p < 6) throw std::invalid_argument("band family requires p >= 6");
  if (order != 1 && order != 2) throw std::invalid_argument("band order must be 1 or 2");
  const auto blocks = block_bounds(p);
  arma::mat theta(p, p, arma::fill::zeros);
  for (int b = 0; b < 3; ++b) {
    const double a = alphas[b];
    for (arma::uword i = blocks[b].begin; i < blocks[b].end; ++i) {
      theta(i, i) = a;
      if (i + 1 < blocks[b].end) theta(i, i + 1) = theta(i + 1, i) = 0.3 * a;
      if (order == 2 && i + 2 < blocks[b].end)
        theta(i, i + 2) = theta(i + 2, i) = 0.2 * a;
    }
  }
  return finalize(std::move(theta),
                  order == 1 ? GraphFamily::band1 : GraphFamily::band2, alphas,
                  blocks, false);
}

GraphSpec make_block(arma::uword p, double sparsity, double value,
                     std::array<double, 3> alphas, std::uint64_t seed) {
  if (p < 6) throw std::invalid_argument("block family requires p >= 6");
  const auto blocks = block_bounds(p);
  arma::mat theta(p, p, arma::fill::zeros);
  CounterRng rng(seed);
  for (int b = 0; b < 3; ++b) {
    const double a = alphas[b];
    for (arma::uword i = blocks[b].begin; i < blocks[b].end; ++i) {
      theta(i, i) = a;
      for (arma::uword j = i + 1; j < blocks[b].end; ++j)
        if (rng.uniform() < sparsity) theta(i, j) = theta(j, i) = value * a;
    }
  }
  return finalize(std::move(theta), GraphFamily::block, alphas, blocks, true);
}

GraphSpec make_hub(arma::uword p, std::array<double, 3> alphas,
                   double hub_value, std::uint64_t seed) {
  if (p < 15) throw std::invalid_argument("hub family requires p >= 15");
  const auto blocks = block_bounds(p);
  const arma::uword n_hubs = p / 15;
  arma::mat theta(p, p, arma::fill::zeros);
  CounterRng rng(seed);

  for (int b = 0; b < 3; ++b)
    for (arma::uword i = blocks[b].begin; i < blocks[b].end; ++i)
      theta(i, i) = alphas[b];

  // hubs round-robin over blocks, drawn without replacement inside each block
  std::vector<std::vector<arma::uword>> hubs(3);
  for (arma::uword h = 0; h < n_hubs; ++h) {
    const int b = static_cast<int>(h % 3);
    while (true) {
      const arma::uword cand = blocks[b].begin + rng.below(blocks[b].size());
      bool taken = false;
      for (arma::uword existing : hubs[b]) taken |= existing == cand;
      if (!taken) {
        hubs[b].push_back(cand);
        break;
      }
    }
  }

  for (int b = 0; b < 3; ++b) {
    if (hubs[b].empty()) continue;  // blocks without a hub stay edge-free
    const double v = hub_value * alphas[b];
    for (arma::uword i = blocks[b].begin; i < blocks[b].end; ++i) {
      bool is_hub = false;
      for (arma::uword h : hubs[b]) is_hub |= h == i;
      if (is_hub) continue;
      const arma::uword h = hubs[b][rng.below(hubs[b].size())];
      theta(i, h) = theta(h, i) = v;
    }
  }
  return finalize(std::move(theta), GraphFamily::hub, alphas, blocks, true);
}

GraphSpec make_random(arma::uword p, double sparsity, double value,
                      std::array<double, 3> alphas, std::uint64_t seed) {
  if (p < 6) throw std::invalid_argument("random family requires p >= 6");
  const auto blocks = block_bounds(p);
  arma::mat theta(p, p, arma::fill::zeros);
  CounterRng rng(seed);
  for (int b = 0; b < 3; ++b)
    for (arma::uword i = blocks[b].begin; i < blocks[b].end; ++i)
      theta(i, i) = alphas[b];
  for (arma::uword i = 0; i < p; ++i)
    for (arma::uword j = i + 1; j < p; ++j)
      if (rng.uniform() < sparsity) {
        const double scale =
            std::sqrt(alphas[block_of(blocks, i)] * alphas[block_of(blocks, j)]);
        theta(i, j) = theta(j, i) = value * scale;
      }
  return finalize(std::move(theta), GraphFamily::random_graph, alphas, blocks, true);
}

GraphSpec from_theta(arma::mat theta, GraphFamily family) {
  if (!theta.is_square()) throw std::invalid_argument("theta must be square");
  const auto blocks = block_bounds(theta.n_cols);
  return finalize(std::move(theta), family, {10.0, 1.0, 0.5}, blocks, false);
}

arma::mat ensure_pd(const arma::mat& theta, double margin) {
  const double target = margin * theta.diag().min();
  if (arma::eig_sym(theta).min() >= target) return theta;
  const arma::mat diag_part = arma::diagmat(theta);
  const arma::mat off_part = theta - diag_part;
  double lo = 0.0, hi = 1.0;
  for (int step = 0; step < 20; ++step) {
    const double c = 0.5 * (lo + hi);
    if (arma::eig_sym(diag_part + c * off_part).min() >= target) lo = c;
    else hi = c;
  }
  return diag_part + lo * off_part;
}

DataMatrix sample_mvn(const GraphSpec& spec, arma::uword n, std::uint64_t seed) {
  CounterRng rng(seed);
  return sample_mvn(spec, n, rng);
}

DataMatrix sample_mvn(const GraphSpec& spec, arma::uword n, CounterRng& rng) {
  const arma::mat sigma = arma::inv_sympd(spec.theta_true);
  arma::mat L;
  if (!arma::chol(L, sigma, "lower"))
    throw std::runtime_error("covariance factorization failed");
  const arma::mat G = rng.normal_matrix(n, spec.p());
  return DataMatrix(G * L.t(), false);
}

}  // namespace large
