#pragma once

#include <armadillo>
#include <cstdint>
#include <vector>

namespace large {

// Derives an independent stream key from (seed, stream_id). Replication r of
// a run draws its own streams as derive_seed(seed, k*r + c) without
// coordinating with other replications.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream_id);

// Counter-based generator: draw i is mix(key + i * golden), so a stream is a
// pure function of its key and position. Normal variates come from a
// Box-Muller pair with the second value cached.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t key) : key_(key) {}
  static CounterRng stream(std::uint64_t seed, std::uint64_t stream_id) {
    return CounterRng(derive_seed(seed, stream_id));
  }

  std::uint64_t next_u64();
  double uniform();  // (0,1), 53-bit mantissa
  double normal();
  arma::mat normal_matrix(arma::uword rows, arma::uword cols);
  arma::uword below(arma::uword bound);  // uniform over [0, bound)
  std::vector<arma::uword> permutation(arma::uword n);

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double cached_normal_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace large
