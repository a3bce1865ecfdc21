#include "causalflag/linalg.hpp"

#include "causalflag/error.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>

namespace causalflag {

const char* tag_name(ScalarTag tag) noexcept {
  switch (tag) {
    case ScalarTag::Real: return "REAL";
    case ScalarTag::Complex: return "COMPLEX";
    case ScalarTag::Quaternion: return "QUATERNION";
  }
  return "REAL";
}

ScalarTag tag_from_name(const std::string& name) {
  if (name == "REAL") return ScalarTag::Real;
  if (name == "COMPLEX") return ScalarTag::Complex;
  if (name == "QUATERNION") return ScalarTag::Quaternion;
  throw Error(ErrorCode::Parse, "unknown scalar tag '" + name + "'");
}

int tag_components(ScalarTag tag) noexcept {
  switch (tag) {
    case ScalarTag::Real: return 1;
    case ScalarTag::Complex: return 2;
    case ScalarTag::Quaternion: return 4;
  }
  return 1;
}

double Quat::norm() const { return std::sqrt(norm2()); }

Quat Quat::inverse() const {
  const double n2 = norm2();
  if (n2 == 0.0) throw Error(ErrorCode::Singular, "inverse of zero quaternion");
  return conj() * (1.0 / n2);
}

ScalarTag joined_tag(ScalarTag a, ScalarTag b) noexcept {
  return static_cast<ScalarTag>(std::max(static_cast<int>(a), static_cast<int>(b)));
}

Matrix::Matrix(int rows, int cols, ScalarTag tag)
    : rows_(rows), cols_(cols), tag_(tag), data_(static_cast<std::size_t>(rows) * cols) {
  if (rows < 0 || cols < 0) throw Error(ErrorCode::InvalidArgument, "negative matrix size");
}

Matrix Matrix::identity(int n, ScalarTag tag) {
  Matrix m(n, n, tag);
  for (int i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::zeros(int rows, int cols, ScalarTag tag) { return Matrix(rows, cols, tag); }

Matrix Matrix::diagonal(std::span<const double> d, ScalarTag tag) {
  const int n = static_cast<int>(d.size());
  Matrix m(n, n, tag);
  for (int i = 0; i < n; ++i) m(i, i) = d[i];
  return m;
}

Matrix Matrix::from_real(const Eigen::MatrixXd& e, ScalarTag tag) {
  Matrix m(static_cast<int>(e.rows()), static_cast<int>(e.cols()), tag);
  for (int i = 0; i < m.rows_; ++i)
    for (int j = 0; j < m.cols_; ++j) m(i, j) = e(i, j);
  return m;
}

Matrix Matrix::from_complex(const Eigen::MatrixXcd& e, ScalarTag tag) {
  if (tag != ScalarTag::Quaternion) {
    Matrix m(static_cast<int>(e.rows()), static_cast<int>(e.cols()), tag);
    for (int i = 0; i < m.rows_; ++i)
      for (int j = 0; j < m.cols_; ++j)
        m(i, j) = tag == ScalarTag::Real ? Quat(e(i, j).real()) : Quat(e(i, j));
    return m;
  }
  if (e.rows() % 2 != 0 || e.cols() % 2 != 0)
    throw Error(ErrorCode::InvalidArgument, "χ-image must have even dimensions");
  const int n = static_cast<int>(e.rows() / 2);
  const int k = static_cast<int>(e.cols() / 2);
  Matrix m(n, k, tag);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < k; ++j) {
      const auto a = e(i, j);
      const auto b = e(i, j + k);
      m(i, j) = Quat(a.real(), a.imag(), b.real(), b.imag());
    }
  return m;
}

Eigen::MatrixXd Matrix::to_real() const {
  Eigen::MatrixXd e(rows_, cols_);
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < cols_; ++j) e(i, j) = (*this)(i, j).w;
  return e;
}

Eigen::MatrixXcd Matrix::to_complex() const {
  if (tag_ != ScalarTag::Quaternion) {
    Eigen::MatrixXcd e(rows_, cols_);
    for (int i = 0; i < rows_; ++i)
      for (int j = 0; j < cols_; ++j) e(i, j) = {(*this)(i, j).w, (*this)(i, j).x};
    return e;
  }
  // χ(A1 + A2 j) = [[A1, A2], [-conj A2, conj A1]]
  Eigen::MatrixXcd e(2 * rows_, 2 * cols_);
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < cols_; ++j) {
      const Quat& q = (*this)(i, j);
      const std::complex<double> a(q.w, q.x), b(q.y, q.z);
      e(i, j) = a;
      e(i, j + cols_) = b;
      e(i + rows_, j) = -std::conj(b);
      e(i + rows_, j + cols_) = std::conj(a);
    }
  return e;
}

Matrix Matrix::adjoint() const {
  Matrix m(cols_, rows_, tag_);
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < cols_; ++j) m(j, i) = (*this)(i, j).conj();
  return m;
}

Matrix Matrix::block(int r0, int c0, int nr, int nc) const {
  if (r0 < 0 || c0 < 0 || r0 + nr > rows_ || c0 + nc > cols_)
    throw Error(ErrorCode::InvalidArgument, "block out of range");
  Matrix m(nr, nc, tag_);
  for (int i = 0; i < nr; ++i)
    for (int j = 0; j < nc; ++j) m(i, j) = (*this)(r0 + i, c0 + j);
  return m;
}

void Matrix::set_block(int r0, int c0, const Matrix& b) {
  if (r0 < 0 || c0 < 0 || r0 + b.rows_ > rows_ || c0 + b.cols_ > cols_)
    throw Error(ErrorCode::InvalidArgument, "set_block out of range");
  tag_ = joined_tag(tag_, b.tag_);
  for (int i = 0; i < b.rows_; ++i)
    for (int j = 0; j < b.cols_; ++j) (*this)(r0 + i, c0 + j) = b(i, j);
}

Matrix Matrix::retagged(ScalarTag tag) const {
  Matrix m = *this;
  m.tag_ = tag;
  const int keep = tag_components(tag);
  for (auto& q : m.data_) {
    if (keep < 2) q.x = 0;
    if (keep < 4) q.y = q.z = 0;
  }
  return m;
}

double Matrix::norm() const {
  double s = 0;
  for (const auto& q : data_) s += q.norm2();
  return std::sqrt(s);
}

double Matrix::max_abs() const {
  double s = 0;
  for (const auto& q : data_) s = std::max(s, q.norm());
  return s;
}

Quat Matrix::trace() const {
  Quat t;
  for (int i = 0; i < std::min(rows_, cols_); ++i) t += (*this)(i, i);
  return t;
}

Matrix& Matrix::operator+=(const Matrix& o) {
  if (rows_ != o.rows_ || cols_ != o.cols_) throw Error(ErrorCode::InvalidArgument, "size mismatch in +");
  tag_ = joined_tag(tag_, o.tag_);
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += o.data_[k];
  return *this;
}

Matrix& Matrix::operator-=(const Matrix& o) {
  if (rows_ != o.rows_ || cols_ != o.cols_) throw Error(ErrorCode::InvalidArgument, "size mismatch in -");
  tag_ = joined_tag(tag_, o.tag_);
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= o.data_[k];
  return *this;
}

Matrix& Matrix::operator*=(double s) {
  for (auto& q : data_) q *= s;
  return *this;
}

Matrix operator*(const Matrix& a, const Matrix& b) {
  if (a.cols_ != b.rows_) throw Error(ErrorCode::InvalidArgument, "size mismatch in *");
  const ScalarTag tag = joined_tag(a.tag_, b.tag_);
  Matrix m(a.rows_, b.cols_, tag);
  const int n = a.rows_, k = a.cols_, p = b.cols_;
  switch (tag) {
    case ScalarTag::Real:
      for (int i = 0; i < n; ++i)
        for (int l = 0; l < k; ++l) {
          const double s = a(i, l).w;
          if (s == 0.0) continue;
          for (int j = 0; j < p; ++j) m(i, j).w += s * b(l, j).w;
        }
      break;
    case ScalarTag::Complex:
      for (int i = 0; i < n; ++i)
        for (int l = 0; l < k; ++l) {
          const Quat& s = a(i, l);
          for (int j = 0; j < p; ++j) {
            const Quat& t = b(l, j);
            m(i, j).w += s.w * t.w - s.x * t.x;
            m(i, j).x += s.w * t.x + s.x * t.w;
          }
        }
      break;
    case ScalarTag::Quaternion:
      for (int i = 0; i < n; ++i)
        for (int l = 0; l < k; ++l) {
          const Quat& s = a(i, l);
          for (int j = 0; j < p; ++j) m(i, j) += s * b(l, j);
        }
      break;
  }
  return m;
}

Matrix Matrix::times_scalar(const Quat& q) const {
  Matrix m = *this;
  for (auto& e : m.data_) e = e * q;
  if (q.y != 0 || q.z != 0) m.tag_ = ScalarTag::Quaternion;
  else if (q.x != 0 && m.tag_ == ScalarTag::Real) m.tag_ = ScalarTag::Complex;
  return m;
}

Matrix hstack(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) throw Error(ErrorCode::InvalidArgument, "hstack row mismatch");
  Matrix m(a.rows(), a.cols() + b.cols(), joined_tag(a.tag(), b.tag()));
  m.set_block(0, 0, a);
  m.set_block(0, a.cols(), b);
  return m;
}

Matrix vstack(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) throw Error(ErrorCode::InvalidArgument, "vstack column mismatch");
  Matrix m(a.rows() + b.rows(), a.cols(), joined_tag(a.tag(), b.tag()));
  m.set_block(0, 0, a);
  m.set_block(a.rows(), 0, b);
  return m;
}

double hermitian_defect(const Matrix& x) {
  if (x.rows() != x.cols()) throw Error(ErrorCode::NotHermitian, "matrix is not square");
  const double n = x.norm();
  return (x - x.adjoint()).norm() / std::max(n, 1e-300);
}

namespace {

std::vector<double> halve_multiplicities(std::vector<double> v) {
  // χ doubles every eigenvalue/singular value; sorted lists pair up adjacently.
  std::vector<double> out;
  out.reserve(v.size() / 2);
  for (std::size_t i = 0; i + 1 < v.size(); i += 2) out.push_back(0.5 * (v[i] + v[i + 1]));
  return out;
}

}  // namespace

std::vector<double> hermitian_eigenvalues(const Matrix& x, double tol) {
  if (x.rows() != x.cols()) throw Error(ErrorCode::NotHermitian, "matrix is not square");
  if (x.norm() > 0 && hermitian_defect(x) > tol)
    throw Error(ErrorCode::NotHermitian, "‖X − Xᴴ‖ exceeds tolerance");
  std::vector<double> ev;
  if (x.tag() == ScalarTag::Real) {
    Eigen::MatrixXd e = x.to_real();
    e = 0.5 * (e + e.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(e, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) throw Error(ErrorCode::NonConvergence, "symmetric eigensolver");
    ev.assign(solver.eigenvalues().data(), solver.eigenvalues().data() + solver.eigenvalues().size());
  } else {
    Eigen::MatrixXcd e = x.to_complex();
    e = 0.5 * (e + e.adjoint()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(e, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) throw Error(ErrorCode::NonConvergence, "Hermitian eigensolver");
    ev.assign(solver.eigenvalues().data(), solver.eigenvalues().data() + solver.eigenvalues().size());
  }
  std::sort(ev.begin(), ev.end(), std::greater<>());
  if (x.tag() == ScalarTag::Quaternion) ev = halve_multiplicities(std::move(ev));
  return ev;
}

double default_zero_tol(const Matrix& x) { return 1e-9 * std::max(1.0, spectral_norm(x)); }

Signature signature_of(std::span<const double> eigenvalues, double zero_tol) {
  Signature s;
  for (double l : eigenvalues) {
    if (l > zero_tol) ++s.pos;
    else if (l < -zero_tol) ++s.neg;
    else ++s.zero;
  }
  return s;
}

Signature signature(const Matrix& x, double zero_tol) {
  const auto ev = hermitian_eigenvalues(x);
  if (zero_tol < 0) {
    double norm2 = 0;
    for (double l : ev) norm2 = std::max(norm2, std::abs(l));
    zero_tol = 1e-9 * std::max(1.0, norm2);
  }
  return signature_of(ev, zero_tol);
}

std::vector<double> singular_values_any(const Matrix& g) {
  std::vector<double> sv;
  if (g.tag() == ScalarTag::Real) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(g.to_real());
    sv.assign(svd.singularValues().data(), svd.singularValues().data() + svd.singularValues().size());
  } else {
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(g.to_complex());
    sv.assign(svd.singularValues().data(), svd.singularValues().data() + svd.singularValues().size());
  }
  std::sort(sv.begin(), sv.end(), std::greater<>());
  if (g.tag() == ScalarTag::Quaternion) sv = halve_multiplicities(std::move(sv));
  return sv;
}

std::vector<double> singular_values(const Matrix& g) {
  if (g.rows() != g.cols()) throw Error(ErrorCode::InvalidArgument, "singular_values needs a square matrix");
  auto sv = singular_values_any(g);
  if (sv.empty() || sv.back() <= 1e-12 * sv.front())
    throw Error(ErrorCode::Singular, "matrix is numerically singular");
  return sv;
}

double spectral_norm(const Matrix& g) {
  if (g.empty()) return 0.0;
  return singular_values_any(g).front();
}

std::vector<std::complex<double>> eigenvalues(const Matrix& g) {
  if (g.rows() != g.cols()) throw Error(ErrorCode::InvalidArgument, "eigenvalues needs a square matrix");
  std::vector<std::complex<double>> ev;
  if (g.tag() == ScalarTag::Real) {
    Eigen::EigenSolver<Eigen::MatrixXd> solver(g.to_real(), false);
    if (solver.info() != Eigen::Success) throw Error(ErrorCode::NonConvergence, "real eigensolver");
    ev.assign(solver.eigenvalues().data(), solver.eigenvalues().data() + solver.eigenvalues().size());
    return ev;
  }
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(g.to_complex(), false);
  if (solver.info() != Eigen::Success) throw Error(ErrorCode::NonConvergence, "complex eigensolver");
  ev.assign(solver.eigenvalues().data(), solver.eigenvalues().data() + solver.eigenvalues().size());
  if (g.tag() == ScalarTag::Quaternion) {
    // χ has the spectrum {ν, conj ν}; keep the ones in the closed upper half plane, paired.
    std::sort(ev.begin(), ev.end(), [](auto a, auto b) {
      if (std::abs(a) != std::abs(b)) return std::abs(a) > std::abs(b);
      return a.imag() > b.imag();
    });
    std::vector<std::complex<double>> half;
    for (std::size_t i = 0; i + 1 < ev.size(); i += 2) half.push_back(ev[i]);
    return half;
  }
  return ev;
}

Matrix inverse(const Matrix& g) {
  if (g.rows() != g.cols()) throw Error(ErrorCode::InvalidArgument, "inverse needs a square matrix");
  if (g.tag() == ScalarTag::Real) {
    Eigen::FullPivLU<Eigen::MatrixXd> lu(g.to_real());
    if (!lu.isInvertible()) throw Error(ErrorCode::Singular, "matrix is not invertible");
    return Matrix::from_real(lu.inverse(), ScalarTag::Real);
  }
  Eigen::FullPivLU<Eigen::MatrixXcd> lu(g.to_complex());
  if (!lu.isInvertible()) throw Error(ErrorCode::Singular, "matrix is not invertible");
  return Matrix::from_complex(lu.inverse(), g.tag());
}

std::complex<double> complex_determinant(const Matrix& g) {
  if (g.rows() != g.cols()) throw Error(ErrorCode::InvalidArgument, "determinant needs a square matrix");
  if (g.tag() == ScalarTag::Real) return g.to_real().determinant();
  return g.to_complex().determinant();
}

double abs_determinant(const Matrix& g) {
  const double d = std::abs(complex_determinant(g));
  return g.tag() == ScalarTag::Quaternion ? std::sqrt(d) : d;
}

Matrix expm(const Matrix& z) {
  if (z.rows() != z.cols()) throw Error(ErrorCode::InvalidArgument, "expm needs a square matrix");
  if (z.tag() == ScalarTag::Real) {
    Eigen::MatrixXd e = z.to_real().exp();
    return Matrix::from_real(e, ScalarTag::Real);
  }
  Eigen::MatrixXcd e = z.to_complex().exp();
  return Matrix::from_complex(e, z.tag());
}

Matrix hermitian_sqrt(const Matrix& x) {
  Eigen::MatrixXcd e = x.to_complex();
  e = 0.5 * (e + e.adjoint()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(e);
  if (solver.info() != Eigen::Success) throw Error(ErrorCode::NonConvergence, "Hermitian eigensolver");
  Eigen::VectorXd d = solver.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  Eigen::MatrixXcd r = solver.eigenvectors() * d.asDiagonal() * solver.eigenvectors().adjoint();
  return Matrix::from_complex(r, x.tag());
}

Matrix orthonormalize(const Matrix& frame, double rank_tol) {
  Matrix q = frame;
  const int n = q.rows(), k = q.cols();
  const double scale = std::max(frame.max_abs(), 1e-300);
  for (int j = 0; j < k; ++j) {
    for (int pass = 0; pass < 2; ++pass) {
      for (int l = 0; l < j; ++l) {
        Quat dot;
        for (int i = 0; i < n; ++i) dot += q(i, l).conj() * q(i, j);
        for (int i = 0; i < n; ++i) q(i, j) -= q(i, l) * dot;
      }
    }
    double nrm = 0;
    for (int i = 0; i < n; ++i) nrm += q(i, j).norm2();
    nrm = std::sqrt(nrm);
    if (nrm <= rank_tol * scale) throw Error(ErrorCode::DegenerateFrame, "frame is rank deficient");
    for (int i = 0; i < n; ++i) q(i, j) *= 1.0 / nrm;
  }
  return q;
}

Matrix projector(const Matrix& frame) {
  const Matrix q = orthonormalize(frame);
  return q * q.adjoint();
}

double subspace_distance(const Matrix& a, const Matrix& b) {
  return spectral_norm(projector(a) - projector(b));
}

nlohmann::json to_json(const Matrix& m) {
  nlohmann::json entries = nlohmann::json::array();
  const int comps = tag_components(m.tag());
  for (const Quat& q : m.entries()) {
    const double c[4] = {q.w, q.x, q.y, q.z};
    nlohmann::json t = nlohmann::json::array();
    for (int i = 0; i < comps; ++i) t.push_back(c[i]);
    entries.push_back(std::move(t));
  }
  return {{"tag", tag_name(m.tag())}, {"rows", m.rows()}, {"cols", m.cols()}, {"entries", entries}};
}

Matrix matrix_from_json(const nlohmann::json& j) {
  try {
    const ScalarTag tag = tag_from_name(j.at("tag").get<std::string>());
    const int rows = j.at("rows").get<int>();
    const int cols = j.at("cols").get<int>();
    const auto& entries = j.at("entries");
    if (rows <= 0 || cols <= 0) throw Error(ErrorCode::Parse, "matrix dimensions must be positive");
    if (entries.size() != static_cast<std::size_t>(rows) * cols)
      throw Error(ErrorCode::Parse, "entry count does not match rows*cols");
    Matrix m(rows, cols, tag);
    const std::size_t comps = static_cast<std::size_t>(tag_components(tag));
    for (int i = 0; i < rows; ++i)
      for (int k = 0; k < cols; ++k) {
        const auto& t = entries[static_cast<std::size_t>(i) * cols + k];
        if (!t.is_array() || t.size() != comps) throw Error(ErrorCode::Parse, "bad component tuple");
        double c[4] = {0, 0, 0, 0};
        for (std::size_t s = 0; s < comps; ++s) c[s] = t[s].get<double>();
        m(i, k) = Quat(c[0], c[1], c[2], c[3]);
      }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Parse, e.what());
  }
}

}  // namespace causalflag
