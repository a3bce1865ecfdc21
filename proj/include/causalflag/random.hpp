#pragma once

// Seeded sampling helpers. Every stream is derived from (seed, index) so that
// results do not depend on how trials are split across workers.

#include "causalflag/linalg.hpp"

#include <cstdint>
#include <random>

namespace causalflag {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) noexcept;

class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  Rng(std::uint64_t seed, std::uint64_t index) : engine_(mix_seed(seed, index)) {}

  double normal() { return normal_(engine_); }
  double uniform(double lo = 0.0, double hi = 1.0) { return lo + (hi - lo) * unit_(engine_); }
  std::uint64_t next() { return engine_(); }
  std::size_t index(std::size_t n) { return static_cast<std::size_t>(engine_() % n); }

  Quat scalar(ScalarTag tag);
  Matrix gaussian(int rows, int cols, ScalarTag tag);
  /// (G + Gᴴ)/2 with Gaussian G.
  Matrix hermitian(int n, ScalarTag tag);
  /// Gaussian matrix shifted towards the identity so its condition number stays moderate.
  Matrix invertible(int n, ScalarTag tag);
  /// Nᴴ N + shift·I.
  Matrix positive_definite(int n, ScalarTag tag, double shift = 0.1);

private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> unit_{0.0, 1.0};
};

}  // namespace causalflag
