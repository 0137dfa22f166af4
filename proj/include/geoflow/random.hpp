#pragma once

#include <cmath>
#include <cstdint>

#include "geoflow/types.hpp"

namespace geoflow {

/// splitmix64 stream. Hand-rolled so that seeded experiments produce the same
/// bytes on every platform; std:: distributions are implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal (Box-Muller).
  double gaussian() {
    double u = uniform();
    while (u == 0.0) u = uniform();
    const double v = uniform();
    return std::sqrt(-2.0 * std::log(u)) * std::cos(kTwoPi * v);
  }

  Vec gaussian_vec(int dim) {
    Vec g(dim);
    for (int i = 0; i < dim; ++i) g(i) = gaussian();
    return g;
  }

 private:
  std::uint64_t state_;
};

/// Seed for case `index` of a batch; cases stay independent of execution order.
inline std::uint64_t case_seed(std::uint64_t batch_seed, std::uint64_t index) {
  Rng mix(batch_seed ^ (0x9e3779b97f4a7c15ULL * (index + 1)));
  return mix.next_u64();
}

}  // namespace geoflow
