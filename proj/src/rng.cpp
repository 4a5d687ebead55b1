#include "large/rng.hpp"

#include <cmath>

namespace large {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

// splitmix64 finalizer
std::uint64_t mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream_id) {
  return mix(mix(seed + kGolden) ^ mix(stream_id + 0xD1B54A32D192ED03ULL));
}

std::uint64_t CounterRng::next_u64() { return mix(key_ + (++counter_) * kGolden); }

double CounterRng::uniform() {
  // 53 top bits into (0,1); never returns 0 exactly
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double CounterRng::normal() {
  if (has_cached_) {
    has_cached_ = false;
    return cached_normal_;
  }
  const double u1 = uniform();
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * M_PI * u2;
  cached_normal_ = radius * std::sin(angle);
  has_cached_ = true;
  return radius * std::cos(angle);
}

arma::mat CounterRng::normal_matrix(arma::uword rows, arma::uword cols) {
  arma::mat out(rows, cols);
  for (arma::uword j = 0; j < cols; ++j)
    for (arma::uword i = 0; i < rows; ++i) out(i, j) = normal();
  return out;
}

arma::uword CounterRng::below(arma::uword bound) {
  // rejection-free modulo is fine here; bound is tiny relative to 2^64
  return static_cast<arma::uword>(next_u64() % bound);
}

std::vector<arma::uword> CounterRng::permutation(arma::uword n) {
  std::vector<arma::uword> idx(n);
  for (arma::uword i = 0; i < n; ++i) idx[i] = i;
  for (arma::uword i = n; i > 1; --i) {
    const arma::uword j = below(i);
    std::swap(idx[i - 1], idx[j]);
  }
  return idx;
}

}  // namespace large
