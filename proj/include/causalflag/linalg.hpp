#pragma once

// Small dense matrices over the reals, complexes and quaternions.
//
// Every matrix stores quaternion entries together with a uniform scalar tag;
// real and complex matrices simply keep the unused components at zero and the
// arithmetic fast-paths on the tag. Spectral work (eigenvalues, SVD, inverse,
// exponential) is done by Eigen on the complex adjoint embedding χ for the
// quaternionic case.

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace causalflag {

enum class ScalarTag : std::uint8_t { Real, Complex, Quaternion };

const char* tag_name(ScalarTag tag) noexcept;
ScalarTag tag_from_name(const std::string& name);

/// Number of real components used by a tag (1, 2 or 4).
int tag_components(ScalarTag tag) noexcept;

/// Quaternion w + x i + y j + z k. Reals and complexes embed as w and w + x i.
struct Quat {
  double w = 0, x = 0, y = 0, z = 0;

  constexpr Quat() = default;
  constexpr Quat(double w_) : w(w_) {}
  constexpr Quat(double w_, double x_, double y_, double z_) : w(w_), x(x_), y(y_), z(z_) {}
  Quat(std::complex<double> c) : w(c.real()), x(c.imag()) {}

  Quat conj() const { return {w, -x, -y, -z}; }
  double norm2() const { return w * w + x * x + y * y + z * z; }
  double norm() const;
  Quat inverse() const;

  Quat& operator+=(const Quat& o) { w += o.w; x += o.x; y += o.y; z += o.z; return *this; }
  Quat& operator-=(const Quat& o) { w -= o.w; x -= o.x; y -= o.y; z -= o.z; return *this; }
  Quat& operator*=(double s) { w *= s; x *= s; y *= s; z *= s; return *this; }

  friend Quat operator+(Quat a, const Quat& b) { return a += b; }
  friend Quat operator-(Quat a, const Quat& b) { return a -= b; }
  friend Quat operator-(const Quat& a) { return {-a.w, -a.x, -a.y, -a.z}; }
  friend Quat operator*(Quat a, double s) { return a *= s; }
  friend Quat operator*(double s, Quat a) { return a *= s; }
  friend Quat operator*(const Quat& a, const Quat& b) {
    return {a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
            a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
            a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
            a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w};
  }
  friend bool operator==(const Quat&, const Quat&) = default;
};

/// Tagged scalar, the unit of matrix serialization.
struct Scalar {
  ScalarTag tag = ScalarTag::Real;
  Quat value;
};

class Matrix {
public:
  Matrix() = default;
  Matrix(int rows, int cols, ScalarTag tag = ScalarTag::Real);

  static Matrix identity(int n, ScalarTag tag = ScalarTag::Real);
  static Matrix zeros(int rows, int cols, ScalarTag tag = ScalarTag::Real);
  static Matrix diagonal(std::span<const double> d, ScalarTag tag = ScalarTag::Real);
  static Matrix from_real(const Eigen::MatrixXd& m, ScalarTag tag = ScalarTag::Real);
  /// Inverse of to_complex(): for Quaternion the input must be a χ-image (2n x 2m).
  static Matrix from_complex(const Eigen::MatrixXcd& m, ScalarTag tag);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  ScalarTag tag() const { return tag_; }
  bool empty() const { return data_.empty(); }

  Quat& operator()(int i, int j) { return data_[static_cast<std::size_t>(i) * cols_ + j]; }
  const Quat& operator()(int i, int j) const { return data_[static_cast<std::size_t>(i) * cols_ + j]; }
  std::span<const Quat> entries() const { return data_; }

  /// Real part as an Eigen matrix (exact for Real tag).
  Eigen::MatrixXd to_real() const;
  /// Complex matrix for Real/Complex tags, χ(A) (twice the size) for Quaternion.
  Eigen::MatrixXcd to_complex() const;

  Matrix adjoint() const;
  Matrix block(int r0, int c0, int nr, int nc) const;
  void set_block(int r0, int c0, const Matrix& b);
  Matrix col(int j) const { return block(0, j, rows_, 1); }
  Matrix retagged(ScalarTag tag) const;

  double norm() const;  // Frobenius
  double max_abs() const;
  Quat trace() const;

  Matrix& operator+=(const Matrix& o);
  Matrix& operator-=(const Matrix& o);
  Matrix& operator*=(double s);

  friend Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
  friend Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
  friend Matrix operator*(Matrix a, double s) { return a *= s; }
  friend Matrix operator*(double s, Matrix a) { return a *= s; }
  friend Matrix operator-(Matrix a) { return a *= -1.0; }
  friend Matrix operator*(const Matrix& a, const Matrix& b);
  /// Right multiplication of every entry by a scalar (matters over ℍ).
  Matrix times_scalar(const Quat& q) const;

private:
  int rows_ = 0;
  int cols_ = 0;
  ScalarTag tag_ = ScalarTag::Real;
  std::vector<Quat> data_;
};

ScalarTag joined_tag(ScalarTag a, ScalarTag b) noexcept;
Matrix hstack(const Matrix& a, const Matrix& b);
Matrix vstack(const Matrix& a, const Matrix& b);

/// Sylvester invariant: counts of positive, negative and (numerically) zero eigenvalues.
struct Signature {
  int pos = 0;
  int neg = 0;
  int zero = 0;
  friend bool operator==(const Signature&, const Signature&) = default;
};

constexpr double kDefaultHermitianTol = 1e-9;

/// ‖X − Xᴴ‖ / max(‖X‖, tiny).
double hermitian_defect(const Matrix& x);

/// Real eigenvalues of a Hermitian matrix in descending order. Quaternionic
/// input is diagonalized through χ and each doubled eigenvalue reported once.
std::vector<double> hermitian_eigenvalues(const Matrix& x, double tol = kDefaultHermitianTol);

/// 1e-9·max(1, ‖X‖₂), the shared zero threshold for signatures and cone tests.
double default_zero_tol(const Matrix& x);
Signature signature(const Matrix& x, double zero_tol = -1.0);
/// Same as signature() but on precomputed eigenvalues.
Signature signature_of(std::span<const double> eigenvalues, double zero_tol);

/// Singular values in descending order (quaternion: χ multiplicities halved).
/// Throws Singular when the smallest is below 1e-12 times the largest.
std::vector<double> singular_values(const Matrix& g);
/// Same without the invertibility precondition.
std::vector<double> singular_values_any(const Matrix& g);
double spectral_norm(const Matrix& g);

/// Eigenvalues of a square matrix (quaternion: one of each conjugate pair of χ).
std::vector<std::complex<double>> eigenvalues(const Matrix& g);

Matrix inverse(const Matrix& g);
/// |det| for Real/Complex; for Quaternion the square root of det χ (Study determinant).
double abs_determinant(const Matrix& g);
std::complex<double> complex_determinant(const Matrix& g);
Matrix expm(const Matrix& z);
/// Positive square root of a positive semidefinite Hermitian matrix.
Matrix hermitian_sqrt(const Matrix& x);

/// Orthonormal basis of the column span (modified Gram–Schmidt, twice), right
/// scalar multiplication over ℍ. Throws DegenerateFrame on rank deficiency.
Matrix orthonormalize(const Matrix& frame, double rank_tol = 1e-12);
/// Orthogonal projector QQᴴ onto the column span.
Matrix projector(const Matrix& frame);
/// Spectral distance between column-span projectors: the sine of the largest principal angle.
double subspace_distance(const Matrix& a, const Matrix& b);

nlohmann::json to_json(const Matrix& m);
Matrix matrix_from_json(const nlohmann::json& j);

}  // namespace causalflag
