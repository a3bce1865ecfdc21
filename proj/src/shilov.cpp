#include "causalflag/shilov.hpp"

#include "causalflag/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace causalflag {

namespace {

void check_frame_shape(const GroupModel& model, const Matrix& frame) {
  const int cols = model.lagrangian() ? model.size : 1;
  if (frame.rows() != model.dim() || frame.cols() != cols)
    throw Error(ErrorCode::ModelMismatch, "frame shape does not match " + model.id);
}

void check_same_model(const ShilovPoint& x, const ShilovPoint& y) {
  if (x.model()->id != y.model()->id) throw Error(ErrorCode::ModelMismatch, "points belong to different models");
}

}  // namespace

double lightcone_pairing(const GroupModel& model, const Matrix& u, const Matrix& v) {
  return (u.adjoint() * model.form * v)(0, 0).w;
}

ShilovPoint::ShilovPoint(ModelPtr model, Matrix frame, double isotropy_tol)
    : model_(std::move(model)), frame_(std::move(frame)) {
  if (!model_) throw Error(ErrorCode::InvalidArgument, "null model");
  check_frame_shape(*model_, frame_);
  if (static_cast<int>(frame_.tag()) > static_cast<int>(model_->scalar))
    throw Error(ErrorCode::ModelMismatch, "frame scalar type does not match " + model_->id);
  frame_ = frame_.retagged(model_->scalar);
  ortho_ = orthonormalize(frame_);
  const double defect = isotropy_defect();
  if (!(defect <= isotropy_tol))
    throw Error(ErrorCode::DegenerateFrame, "frame is not isotropic (defect " + std::to_string(defect) + ")");
}

ShilovPoint ShilovPoint::trusted(ModelPtr model, Matrix frame) {
  ShilovPoint p;
  p.model_ = std::move(model);
  p.frame_ = std::move(frame);
  p.ortho_ = orthonormalize(p.frame_);
  return p;
}

const Matrix& ShilovPoint::orthonormal() const { return ortho_; }

double ShilovPoint::isotropy_defect() const {
  const Matrix g = ortho_.adjoint() * model_->form * ortho_;
  return g.norm();
}

Matrix ShilovPoint::canonical_form() const {
  const Matrix& q = ortho_;
  const int n = q.rows(), k = q.cols();
  // Greedy pivoted selection of rows using only the Gram matrix QQᴴ of rows,
  // which does not depend on the chosen basis.
  std::vector<Matrix> residual;
  residual.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) residual.push_back(q.block(i, 0, 1, k));
  std::vector<int> pivots;
  std::vector<bool> used(static_cast<std::size_t>(n), false);
  for (int step = 0; step < k; ++step) {
    int best = -1;
    double best_norm = -1;
    for (int i = 0; i < n; ++i) {
      if (used[static_cast<std::size_t>(i)]) continue;
      const double nr = residual[static_cast<std::size_t>(i)].norm();
      if (nr > best_norm + 1e-12) {
        best_norm = nr;
        best = i;
      }
    }
    used[static_cast<std::size_t>(best)] = true;
    pivots.push_back(best);
    const Matrix e = residual[static_cast<std::size_t>(best)] * (1.0 / best_norm);
    for (int i = 0; i < n; ++i) {
      if (used[static_cast<std::size_t>(i)]) continue;
      auto& row = residual[static_cast<std::size_t>(i)];
      const Quat c = (row * e.adjoint())(0, 0);
      Matrix proj = e;
      for (int j = 0; j < k; ++j) proj(0, j) = c * e(0, j);
      row -= proj;
    }
  }
  std::sort(pivots.begin(), pivots.end());
  Matrix pivot_block(k, k, q.tag());
  for (int s = 0; s < k; ++s) pivot_block.set_block(s, 0, q.block(pivots[static_cast<std::size_t>(s)], 0, 1, k));
  return q * inverse(pivot_block);
}

ShilovPoint act(const GroupElement& g, const ShilovPoint& x) {
  if (g.model()->id != x.model()->id) throw Error(ErrorCode::ModelMismatch, "element and point belong to different models");
  return ShilovPoint::trusted(x.model(), g.matrix() * x.frame());
}

double frame_distance(const ShilovPoint& x, const ShilovPoint& y) {
  check_same_model(x, y);
  const Matrix& a = x.orthonormal();
  const Matrix& b = y.orthonormal();
  return spectral_norm(a * a.adjoint() - b * b.adjoint());
}

bool same_point(const ShilovPoint& x, const ShilovPoint& y, double tol) { return frame_distance(x, y) <= tol; }

std::pair<ShilovPoint, ShilovPoint> base_points(const ModelPtr& model) {
  if (model->lagrangian()) {
    const int r = model->size;
    Matrix plus(2 * r, r, model->scalar), minus(2 * r, r, model->scalar);
    for (int i = 0; i < r; ++i) {
      plus(i, i) = 1.0;
      minus(r + i, i) = 1.0;
    }
    return {ShilovPoint(model, plus), ShilovPoint(model, minus)};
  }
  const int n = model->size;
  Matrix plus(n + 2, 1), minus(n + 2, 1);
  plus(0, 0) = 1.0;
  minus(n + 1, 0) = 1.0;
  return {ShilovPoint(model, plus), ShilovPoint(model, minus)};
}

double transversality_margin(const ShilovPoint& x, const ShilovPoint& y) {
  check_same_model(x, y);
  const Matrix& a = x.orthonormal();
  const Matrix& b = y.orthonormal();
  if (!x.model()->lagrangian()) return std::abs(lightcone_pairing(*x.model(), a, b));
  return abs_determinant(hstack(a, b));
}

bool transverse(const ShilovPoint& x, const ShilovPoint& y, double* margin_out) {
  const double m = transversality_margin(x, y);
  if (margin_out != nullptr) *margin_out = m;
  return m > kTransverseTol;
}

ChartCoord hermitian_coord(const Matrix& x) { return {x}; }

ChartCoord minkowski_coord(std::span<const double> v) {
  Matrix m(static_cast<int>(v.size()), 1);
  for (std::size_t i = 0; i < v.size(); ++i) m(static_cast<int>(i), 0) = v[i];
  return {m};
}

ShilovPoint chart_point(const ModelPtr& model, const ChartCoord& x) {
  const Matrix& v = x.value;
  if (model->lagrangian()) {
    const int r = model->size;
    if (v.rows() != r || v.cols() != r) throw Error(ErrorCode::ModelMismatch, "chart coordinate must be r x r");
    if (v.norm() > 0 && hermitian_defect(v) > 1e-9) throw Error(ErrorCode::NotHermitian, "chart coordinate");
    const Matrix h = ((v + v.adjoint()) * 0.5).retagged(model->scalar);
    return ShilovPoint(model, vstack(Matrix::identity(r, model->scalar), h));
  }
  const int n = model->size;
  if (v.rows() != n || v.cols() != 1) throw Error(ErrorCode::ModelMismatch, "chart coordinate must be an n-vector");
  std::vector<double> comps(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) comps[static_cast<std::size_t>(i)] = v(i, 0).w;
  Matrix f(n + 2, 1);
  f(0, 0) = 1.0;
  for (int i = 0; i < n; ++i) f(i + 1, 0) = comps[static_cast<std::size_t>(i)];
  f(n + 1, 0) = 0.5 * minkowski_square(comps);
  return ShilovPoint(model, f);
}

ChartCoord chart_coordinates(const ShilovPoint& x) {
  const auto& model = x.model();
  const Matrix& q = x.orthonormal();
  if (model->lagrangian()) {
    const int r = model->size;
    const Matrix top = q.block(0, 0, r, r);
    // margin against p⁻: |det| of the top block of an orthonormal frame
    const double margin = abs_determinant(top);
    if (!(margin > kTransverseTol)) throw Error(ErrorCode::NotInChart, "point is not transverse to p-");
    const Matrix xc = q.block(r, 0, r, r) * inverse(top);
    const double defect = xc.norm() > 0 ? hermitian_defect(xc) : 0.0;
    if (defect > 1e-8) throw Error(ErrorCode::NotHermitian, "chart coordinate defect " + std::to_string(defect));
    return {((xc + xc.adjoint()) * 0.5).retagged(model->scalar)};
  }
  const int n = model->size;
  const double a = q(0, 0).w;
  if (!(std::abs(a) > kTransverseTol)) throw Error(ErrorCode::NotInChart, "point is not transverse to p-");
  Matrix v(n, 1);
  for (int i = 0; i < n; ++i) v(i, 0) = q(i + 1, 0).w / a;
  return {v};
}

namespace {

// Roundoff in gᴴ J g grows like ‖g‖², so the form check is scaled with it
// (1e-8 for well-conditioned g).
double standardizer_tolerance(const Matrix& s) {
  const double n = s.norm();
  return 1e-12 * std::max(1e4, n * n);
}

GroupElement standardize_lagrangian(const ShilovPoint& a, const ShilovPoint& c) {
  const auto& model = a.model();
  const int r = model->size;
  const Matrix& fa = a.orthonormal();
  const Matrix& fc = c.orthonormal();
  const Matrix pairing = fa.adjoint() * model->form * fc;
  const auto sv = singular_values_any(pairing);
  if (!(abs_determinant(hstack(fa, fc)) > kTransverseTol))
    throw Error(ErrorCode::NotTransverse, "standardize_pair needs a transverse pair");
  if (sv.back() <= 0 || sv.front() / sv.back() > 1e12)
    throw Error(ErrorCode::IllConditioned, "pairing matrix condition number exceeds 1e12");
  // Frames A' = A·N_p^{-1/2}, C' = −C·Wᴴ N_p^{-1/2} from the polar decomposition
  // N = Aᴴ J C = N_p W satisfy A'ᴴ J C' = −I, so [A' | C'] preserves J. Splitting
  // the normalization between both frames keeps ‖[A' | C']‖ at σ_min(N)^{-1/2}.
  const Matrix np = hermitian_sqrt(pairing * pairing.adjoint());
  const Matrix np_inv_half = inverse(hermitian_sqrt(np));
  const Matrix w = inverse(np) * pairing;
  Matrix fa_scaled = fa * np_inv_half;
  Matrix fc_scaled = fc * (w.adjoint() * np_inv_half) * -1.0;
  // Roundoff in W leaves A'ᴴ J C' ≈ −I; the residual pairing is well
  // conditioned, so dividing it out is exact to roundoff. The isotropy defects
  // E = A'ᴴ J A', F = C'ᴴ J C' (skew-Hermitian) are then removed to first order
  // by A' + C'·E/2 and C' − A'·F/2.
  for (int pass = 0; pass < 2; ++pass) {
    const Matrix m = fa_scaled.adjoint() * model->form * fc_scaled;
    fc_scaled = fc_scaled * inverse(m) * -1.0;
    const Matrix e = fa_scaled.adjoint() * model->form * fa_scaled;
    const Matrix f = fc_scaled.adjoint() * model->form * fc_scaled;
    fa_scaled += fc_scaled * (e * 0.5);
    fc_scaled -= fa_scaled * (f * 0.5);
  }
  Matrix g = hstack(fa_scaled, fc_scaled);
  if (model->family == Family::Su) {
    const auto det = complex_determinant(g);
    const double phi = -std::arg(det) / (2.0 * r);
    g = g.times_scalar(Quat(std::cos(phi), std::sin(phi), 0, 0));
  }
  // checked on g: the inverse −J gᴴ J below is exact for g in the group but
  // multiplies any residual defect by ‖g‖²
  if (!(form_defect(*model, g) <= standardizer_tolerance(g)))
    throw Error(ErrorCode::IllConditioned, "standardizing element loses the form");
  Matrix s = model->form * g.adjoint() * model->form * -1.0;
  s = s.retagged(model->scalar);
  return GroupElement::trusted(model, std::move(s));
}

GroupElement standardize_lightcone(const ShilovPoint& a, const ShilovPoint& c) {
  const auto& model = a.model();
  const int n = model->size;
  const int d = n + 2;
  const Matrix& b = model->form;
  Matrix u = a.orthonormal();
  Matrix w = c.orthonormal();
  const double beta = lightcone_pairing(*model, u, w);
  if (!(std::abs(beta) > kTransverseTol)) throw Error(ErrorCode::NotTransverse, "standardize_pair needs a transverse pair");
  w *= -1.0 / beta;

  // complement span(u, w)^⊥: x ↦ x + b(x,w) u + b(x,u) w
  Eigen::MatrixXd proj(d, d);
  const Eigen::MatrixXd be = b.to_real();
  const Eigen::VectorXd ue = u.to_real().col(0), we = w.to_real().col(0);
  for (int k = 0; k < d; ++k) {
    Eigen::VectorXd x = Eigen::VectorXd::Unit(d, k);
    proj.col(k) = x + (x.dot(be * we)) * ue + (x.dot(be * ue)) * we;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(proj, Eigen::ComputeFullU);
  const Eigen::MatrixXd basis = svd.matrixU().leftCols(n);
  const Eigen::MatrixXd gram = basis.transpose() * be * basis;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (gram + gram.transpose()));
  // ascending: one negative then n-1 positive
  const auto& lam = es.eigenvalues();
  if (!(lam(0) < -1e-9 && (n < 2 || lam(1) > 1e-9)))
    throw Error(ErrorCode::IllConditioned, "complement of the pair is not Lorentzian");
  Eigen::MatrixXd g(d, d);
  g.col(0) = ue;
  g.col(d - 1) = we;
  for (int k = 0; k < n - 1; ++k) g.col(1 + k) = basis * es.eigenvectors().col(k + 1) / std::sqrt(lam(k + 1));
  g.col(n) = basis * es.eigenvectors().col(0) / std::sqrt(-lam(0));
  if (g.determinant() < 0) g.col(n) *= -1.0;
  // g⁻¹ = b gᵀ b
  Eigen::MatrixXd s = be * g.transpose() * be;
  Matrix sm = Matrix::from_real(s);
  if (!(form_defect(*model, sm) <= standardizer_tolerance(sm))) throw Error(ErrorCode::IllConditioned, "standardizing element loses the form");
  return GroupElement::trusted(model, std::move(sm));
}

}  // namespace

GroupElement standardize_pair(const ShilovPoint& a, const ShilovPoint& c) {
  check_same_model(a, c);
  return a.model()->lagrangian() ? standardize_lagrangian(a, c) : standardize_lightcone(a, c);
}

nlohmann::json to_json(const ShilovPoint& x) { return {{"model", x.model()->id}, {"frame", to_json(x.frame())}}; }

ShilovPoint shilov_point_from_json(const nlohmann::json& j) {
  try {
    return ShilovPoint(model_from_id(j.at("model").get<std::string>()), matrix_from_json(j.at("frame")));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Parse, e.what());
  }
}

}  // namespace causalflag
