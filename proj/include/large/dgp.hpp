#pragma once

#include <armadillo>
#include <array>
#include <cstdint>
#include <string>

#include "large/core.hpp"
#include "large/rng.hpp"

namespace large {

enum class GraphFamily { band1, band2, block, hub, random_graph, custom };

const char* family_name(GraphFamily f);
GraphFamily family_from_name(const std::string& name);  // throws on unknown name

struct BlockRange {
  arma::uword begin = 0;
  arma::uword end = 0;  // half-open [begin, end)
  arma::uword size() const { return end - begin; }
};

// Ground-truth precision matrix with its edge set and the three diagonal
// blocks carrying alphas = (alpha1, alpha2, alpha3).
struct GraphSpec {
  arma::mat theta_true;
  EdgeSet edges;
  GraphFamily family = GraphFamily::custom;
  std::array<double, 3> alphas{10.0, 1.0, 0.5};
  std::array<BlockRange, 3> blocks{};

  arma::uword p() const { return theta_true.n_cols; }
};

// Three blocks whose sizes differ by at most one, larger blocks last.
std::array<BlockRange, 3> block_bounds(arma::uword p);

// Banded families: first off-diagonal 0.3*alpha_k inside each block, order 2
// adds a second off-diagonal 0.2*alpha_k. No cross-block edges.
GraphSpec make_band(arma::uword p, int order,
                    std::array<double, 3> alphas = {10.0, 1.0, 0.5});

// Within-block random edges with the given sparsity, value 0.4*alpha_k.
GraphSpec make_block(arma::uword p, double sparsity, double value,
                     std::array<double, 3> alphas, std::uint64_t seed);

// floor(p/15) hubs assigned round-robin to blocks; every non-hub node attaches
// to one hub of its block (degree 1), edge value hub_value*alpha_k.
GraphSpec make_hub(arma::uword p, std::array<double, 3> alphas,
                   double hub_value, std::uint64_t seed);

// Global random edges; an (i,j) edge takes value*sqrt(alpha_b(i)*alpha_b(j)).
GraphSpec make_random(arma::uword p, double sparsity, double value,
                      std::array<double, 3> alphas, std::uint64_t seed);

// Wraps an arbitrary symmetric PD matrix (used for custom experiments).
GraphSpec from_theta(arma::mat theta, GraphFamily family = GraphFamily::custom);

// Shrinks off-diagonals by the largest c in (0,1] (20 bisection steps) so the
// smallest eigenvalue is at least margin*min(diag). Diagonal untouched.
arma::mat ensure_pd(const arma::mat& theta, double margin);

// X = G L' with L the lower Cholesky factor of inv(theta_true) and G seeded
// standard normals; deterministic given the seed.
DataMatrix sample_mvn(const GraphSpec& spec, arma::uword n, std::uint64_t seed);
DataMatrix sample_mvn(const GraphSpec& spec, arma::uword n, CounterRng& rng);

}  // namespace large
