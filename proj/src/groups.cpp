#include "causalflag/groups.hpp"

#include "causalflag/error.hpp"
#include "causalflag/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <regex>

namespace causalflag {

const char* family_name(Family f) noexcept {
  switch (f) {
    case Family::Sp: return "SP";
    case Family::Su: return "SU";
    case Family::SoStar: return "SOSTAR";
    case Family::SoN2: return "SO_N2";
  }
  return "SP";
}

Matrix standard_symplectic_form(int r, ScalarTag tag) {
  Matrix j(2 * r, 2 * r, tag);
  for (int i = 0; i < r; ++i) {
    j(i, r + i) = -1.0;
    j(r + i, i) = 1.0;
  }
  return j;
}

Matrix lightcone_form(int n) {
  Matrix b(n + 2, n + 2, ScalarTag::Real);
  b(0, n + 1) = -1.0;
  b(n + 1, 0) = -1.0;
  for (int i = 1; i <= n; ++i) b(i, i) = i < n ? 1.0 : -1.0;
  return b;
}

double minkowski_square(std::span<const double> v) {
  double s = 0;
  const std::size_t n = v.size();
  for (std::size_t i = 0; i < n; ++i) s += (i + 1 < n ? 1.0 : -1.0) * v[i] * v[i];
  return s;
}

ModelPtr make_model(Family family, int size) {
  auto m = std::make_shared<GroupModel>();
  m->family = family;
  m->size = size;
  switch (family) {
    case Family::Sp:
      if (size < 1) throw Error(ErrorCode::InvalidArgument, "rank must be >= 1");
      m->scalar = ScalarTag::Real;
      m->id = "sp" + std::to_string(2 * size);
      break;
    case Family::Su:
      if (size < 1) throw Error(ErrorCode::InvalidArgument, "rank must be >= 1");
      m->scalar = ScalarTag::Complex;
      m->id = "su" + std::to_string(size) + std::to_string(size);
      break;
    case Family::SoStar:
      if (size < 1) throw Error(ErrorCode::InvalidArgument, "rank must be >= 1");
      m->scalar = ScalarTag::Quaternion;
      m->id = "sostar" + std::to_string(4 * size);
      break;
    case Family::SoN2:
      if (size < 2) throw Error(ErrorCode::InvalidArgument, "SO(n,2) needs n >= 2");
      m->scalar = ScalarTag::Real;
      m->id = "so" + std::to_string(size) + "2";
      break;
  }
  m->form = family == Family::SoN2 ? lightcone_form(size) : standard_symplectic_form(size, m->scalar);
  return m;
}

ModelPtr model_from_id(const std::string& id) {
  static const std::regex sp(R"(sp(\d+))"), su(R"(su(\d)(\d))"), sostar(R"(sostar(\d+))"),
      so(R"(so(\d+)2)");
  std::smatch m;
  if (std::regex_match(id, m, sostar)) {
    const int d = std::stoi(m[1]);
    if (d % 4 == 0 && d > 0) return make_model(Family::SoStar, d / 4);
  } else if (std::regex_match(id, m, sp)) {
    const int d = std::stoi(m[1]);
    if (d % 2 == 0 && d > 0) return make_model(Family::Sp, d / 2);
  } else if (std::regex_match(id, m, su)) {
    if (m[1] == m[2] && std::stoi(m[1]) > 0) return make_model(Family::Su, std::stoi(m[1]));
  } else if (std::regex_match(id, m, so)) {
    const int n = std::stoi(m[1]);
    if (n >= 2) return make_model(Family::SoN2, n);
  }
  throw Error(ErrorCode::UnknownPreset, "unknown group model '" + id + "'");
}

double form_defect(const GroupModel& model, const Matrix& g) {
  if (g.rows() != model.dim() || g.cols() != model.dim())
    throw Error(ErrorCode::ModelMismatch, "matrix size does not match " + model.id);
  const Matrix lhs = g.adjoint() * model.form * g;
  return (lhs - model.form).norm() / model.form.norm();
}

GroupElement::GroupElement(ModelPtr model, Matrix g, double bound) : model_(std::move(model)), g_(std::move(g)) {
  if (!model_) throw Error(ErrorCode::InvalidArgument, "null model");
  if (g_.tag() != model_->scalar) {
    if (static_cast<int>(g_.tag()) > static_cast<int>(model_->scalar))
      throw Error(ErrorCode::ModelMismatch, "scalar type does not match " + model_->id);
    g_ = g_.retagged(model_->scalar);
  }
  const double defect = causalflag::form_defect(*model_, g_);
  if (!(defect <= bound))
    throw Error(ErrorCode::NotInGroup, "form defect " + std::to_string(defect) + " exceeds bound");
}

GroupElement GroupElement::identity(const ModelPtr& model) {
  return trusted(model, Matrix::identity(model->dim(), model->scalar));
}

GroupElement GroupElement::trusted(ModelPtr model, Matrix g) {
  GroupElement e;
  e.model_ = std::move(model);
  e.g_ = std::move(g);
  return e;
}

double GroupElement::form_defect() const { return causalflag::form_defect(*model_, g_); }

GroupElement GroupElement::inverse() const {
  // g⁻¹ = J⁻¹ gᴴ J with J⁻¹ = −J, and b⁻¹ = b for the light-cone form.
  const Matrix& f = model_->form;
  Matrix inv = f * g_.adjoint() * f;
  if (model_->lagrangian()) inv *= -1.0;
  return trusted(model_, std::move(inv));
}

GroupElement operator*(const GroupElement& a, const GroupElement& b) {
  if (a.model_ != b.model_ && (a.model_->id != b.model_->id))
    throw Error(ErrorCode::ModelMismatch, "product of elements from different models");
  return GroupElement::trusted(a.model_, a.g_ * b.g_);
}

namespace {

std::vector<double> top_logs(std::vector<double> values, int count) {
  std::sort(values.begin(), values.end(), std::greater<>());
  std::vector<double> eps(static_cast<std::size_t>(count), 0.0);
  for (int i = 0; i < count && i < static_cast<int>(values.size()); ++i)
    eps[static_cast<std::size_t>(i)] = std::max(0.0, std::log(values[static_cast<std::size_t>(i)]));
  std::sort(eps.begin(), eps.end(), std::greater<>());
  return eps;
}

// p-th exterior power on the basis e_{i1} ∧ … ∧ e_{ip}, i1 < … < ip: entries are p×p minors.
Eigen::MatrixXcd exterior_power(const Eigen::MatrixXcd& m, int p) {
  const int n = static_cast<int>(m.rows());
  std::vector<std::vector<int>> subsets;
  std::vector<int> cur;
  const auto rec = [&](auto&& self, int start) -> void {
    if (static_cast<int>(cur.size()) == p) {
      subsets.push_back(cur);
      return;
    }
    for (int i = start; i < n; ++i) {
      cur.push_back(i);
      self(self, i + 1);
      cur.pop_back();
    }
  };
  rec(rec, 0);
  const auto count = static_cast<Eigen::Index>(subsets.size());
  Eigen::MatrixXcd out(count, count);
  Eigen::MatrixXcd minor(p, p);
  for (Eigen::Index a = 0; a < count; ++a)
    for (Eigen::Index b = 0; b < count; ++b) {
      for (int i = 0; i < p; ++i)
        for (int j = 0; j < p; ++j) minor(i, j) = m(subsets[a][i], subsets[b][j]);
      out(a, b) = minor.determinant();
    }
  return out;
}

// log σ₁(m^k) by repeated squaring with rescaling, so neither overflow nor the
// spread of the lower singular values affects it.
double log_top_singular_of_power(const Eigen::MatrixXcd& m, int k) {
  const auto n = m.rows();
  Eigen::MatrixXcd result = Eigen::MatrixXcd::Identity(n, n), base = m;
  double log_result = 0, log_base = 0;
  const auto rescale = [](Eigen::MatrixXcd& x, double& log_scale) {
    const double s = x.cwiseAbs().maxCoeff();
    x /= s;
    log_scale += std::log(s);
  };
  rescale(base, log_base);
  while (k > 0) {
    if (k & 1) {
      result = result * base;
      log_result += log_base;
      rescale(result, log_result);
    }
    k >>= 1;
    if (k) {
      base = base * base;
      log_base *= 2;
      rescale(base, log_base);
    }
  }
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(result);
  return log_result + std::log(svd.singularValues()(0));
}

// ε_i(μ(g^k)) for i < count from partial sums Σ_{j≤p} log σ_j(g^k) = log σ₁(Λ^p(g)^k).
// Quaternion singular values appear twice in χ(g).
std::vector<double> cartan_of_power(const Matrix& g, int k, int count) {
  const Eigen::MatrixXcd c = g.to_complex();
  const int mult = g.tag() == ScalarTag::Quaternion ? 2 : 1;
  std::vector<double> eps;
  double prev = 0;
  for (int p = 1; p <= count; ++p) {
    const double sum = log_top_singular_of_power(exterior_power(c, mult * p), k) / mult;
    eps.push_back(std::max(0.0, sum - prev));
    prev = sum;
  }
  std::sort(eps.begin(), eps.end(), std::greater<>());
  return eps;
}

}  // namespace

CartanVector cartan_projection(const GroupElement& g) {
  const auto sv = singular_values(g.matrix());
  return {top_logs(sv, g.model()->rank())};
}

CartanVector lyapunov_projection(const GroupElement& g, int k_max, LyapunovCheck* check) {
  const auto ev = eigenvalues(g.matrix());
  std::vector<double> moduli;
  moduli.reserve(ev.size());
  for (const auto& e : ev) moduli.push_back(std::abs(e));
  CartanVector lambda{top_logs(moduli, g.model()->rank())};

  if (check != nullptr && k_max > 0) {
    const int r = g.model()->rank();
    const auto mu = cartan_of_power(g.matrix(), k_max, r);
    check->k = k_max;
    check->deviation = 0;
    for (std::size_t i = 0; i < mu.size(); ++i)
      check->deviation = std::max(check->deviation, std::abs(mu[i] / k_max - lambda.eps[i]));
    // partial sums of Λ^p g are off by at most p·log κ(V) after k steps, so each ε_i by r·log κ(V)
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(g.matrix().to_complex(), true);
    if (solver.info() != Eigen::Success) throw Error(ErrorCode::NonConvergence, "eigenvector solve");
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(solver.eigenvectors());
    const auto& s = svd.singularValues();
    const double smin = s(s.size() - 1);
    check->bound = smin > 0 ? r * std::log(s(0) / smin) / k_max : std::numeric_limits<double>::infinity();
  }
  return lambda;
}

GroupElement tau_p(const Eigen::Matrix2d& a, const ModelPtr& model) {
  if (!model->lagrangian()) throw Error(ErrorCode::ModelMismatch, "tau_p needs a Lagrangian family");
  if (model->size % 2 != 0) throw Error(ErrorCode::OddRank, "tau_p needs even rank r = 2p");
  if (std::abs(a.determinant() - 1.0) > 1e-10) throw Error(ErrorCode::NotUnimodular, "det A != 1");
  const int r = model->size, p = r / 2;
  Matrix g(2 * r, 2 * r, model->scalar);
  // upper block A ⊗ I_p, lower block A^{-T} ⊗ I_p
  const double inv_t[2][2] = {{a(1, 1), -a(1, 0)}, {-a(0, 1), a(0, 0)}};
  for (int bi = 0; bi < 2; ++bi)
    for (int bj = 0; bj < 2; ++bj)
      for (int k = 0; k < p; ++k) {
        g(bi * p + k, bj * p + k) = a(bi, bj);
        g(r + bi * p + k, r + bj * p + k) = inv_t[bi][bj];
      }
  return GroupElement(model, std::move(g), 1e-9);
}

Matrix lie_algebra_projection(const GroupModel& model, const Matrix& z) {
  const Matrix& f = model.form;
  Matrix p(1, 1);
  if (model.lagrangian()) {
    // Z ↦ (Z + J Zᴴ J)/2
    p = (z + f * z.adjoint() * f) * 0.5;
    if (model.family == Family::Su) {
      const Quat t = p.trace() * (1.0 / p.rows());
      for (int i = 0; i < p.rows(); ++i) p(i, i) -= t;
    }
  } else {
    p = (z - f * z.adjoint() * f) * 0.5;
  }
  return p.retagged(model.scalar);
}

Matrix random_lie_algebra_element(const GroupModel& model, std::uint64_t seed) {
  Rng rng(seed, 0x4c6965ULL);
  Matrix z = lie_algebra_projection(model, rng.gaussian(model.dim(), model.dim(), model.scalar));
  const double n = z.norm();
  return n > 0 ? z * (1.0 / n) : z;
}

GroupElement random_lie_perturbation(const GroupElement& g, double eps, std::uint64_t seed) {
  if (eps < 0) throw Error(ErrorCode::InvalidArgument, "eps must be nonnegative");
  if (eps == 0.0) return g;
  const Matrix z = random_lie_algebra_element(*g.model(), seed);
  return GroupElement(g.model(), g.matrix() * expm(z * eps), 1e-8);
}

GroupElement random_group_element(const ModelPtr& model, std::uint64_t seed, double scale) {
  const Matrix z1 = random_lie_algebra_element(*model, mix_seed(seed, 1));
  const Matrix z2 = random_lie_algebra_element(*model, mix_seed(seed, 2));
  return GroupElement(model, expm(z1 * scale) * expm(z2 * scale), 1e-8);
}

nlohmann::json to_json(const GroupModel& model) {
  return {{"id", model.id}, {"family", family_name(model.family)}, {"size", model.size}};
}

nlohmann::json to_json(const GroupElement& g) {
  return {{"model", g.model()->id}, {"matrix", to_json(g.matrix())}};
}

GroupElement group_element_from_json(const nlohmann::json& j) {
  try {
    return GroupElement(model_from_id(j.at("model").get<std::string>()), matrix_from_json(j.at("matrix")), 1e-8);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Parse, e.what());
  }
}

}  // namespace causalflag
