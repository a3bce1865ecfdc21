#include "causalflag/random.hpp"

namespace causalflag {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) noexcept {
  // splitmix64 over the pair
  std::uint64_t z = seed * 0x9E3779B97F4A7C15ULL + index + 0x632BE59BD9B4E019ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

Quat Rng::scalar(ScalarTag tag) {
  Quat q(normal());
  if (tag != ScalarTag::Real) q.x = normal();
  if (tag == ScalarTag::Quaternion) {
    q.y = normal();
    q.z = normal();
  }
  return q;
}

Matrix Rng::gaussian(int rows, int cols, ScalarTag tag) {
  Matrix m(rows, cols, tag);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = scalar(tag);
  return m;
}

Matrix Rng::hermitian(int n, ScalarTag tag) {
  Matrix g = gaussian(n, n, tag);
  return (g + g.adjoint()) * 0.5;
}

Matrix Rng::invertible(int n, ScalarTag tag) {
  return gaussian(n, n, tag) * (1.0 / std::sqrt(static_cast<double>(n))) + Matrix::identity(n, tag) * 1.5;
}

Matrix Rng::positive_definite(int n, ScalarTag tag, double shift) {
  Matrix g = gaussian(n, n, tag);
  return g.adjoint() * g * (1.0 / n) + Matrix::identity(n, tag) * shift;
}

}  // namespace causalflag
