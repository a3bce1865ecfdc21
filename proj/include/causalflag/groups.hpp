#pragma once

// Matrix models of Sp(2r,ℝ), SU(r,r), SO*(4r) (the groups G_K preserving the
// form J = [[0, -I], [I, 0]] over K = ℝ, ℂ, ℍ) and of SO(n,2).

#include "causalflag/linalg.hpp"

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace causalflag {

enum class Family : std::uint8_t { Sp, Su, SoStar, SoN2 };

const char* family_name(Family f) noexcept;

struct GroupModel {
  Family family = Family::Sp;
  /// r for the Lagrangian families, n for SO(n,2).
  int size = 1;
  ScalarTag scalar = ScalarTag::Real;
  /// J for the Lagrangian families, b for SO(n,2).
  Matrix form;
  std::string id;

  bool lagrangian() const { return family != Family::SoN2; }
  /// Real rank of the restricted root system: r, or 2 for SO(n,2).
  int rank() const { return lagrangian() ? size : 2; }
  /// Size of the matrices acting on K^dim.
  int dim() const { return lagrangian() ? 2 * size : size + 2; }
};

using ModelPtr = std::shared_ptr<const GroupModel>;

ModelPtr make_model(Family family, int size);
/// Parses "sp4", "sp8", "su22", "sostar8", "so32", "so42", ...
ModelPtr model_from_id(const std::string& id);

/// J for the Lagrangian families.
Matrix standard_symplectic_form(int r, ScalarTag tag);
/// b in light-cone coordinates (a, v_1..v_n, c): b = ψ(v, v') − (a c' + c a').
Matrix lightcone_form(int n);
/// ψ = diag(1, …, 1, −1) on the Minkowski chart ℝ^{n−1,1}.
double minkowski_square(std::span<const double> v);

class GroupElement {
public:
  GroupElement() = default;
  /// Checked constructor: throws NotInGroup when the form defect exceeds bound.
  GroupElement(ModelPtr model, Matrix g, double bound = 1e-9);

  static GroupElement identity(const ModelPtr& model);
  /// Skips the membership check (products of checked elements).
  static GroupElement trusted(ModelPtr model, Matrix g);

  const ModelPtr& model() const { return model_; }
  const Matrix& matrix() const { return g_; }
  double form_defect() const;

  GroupElement inverse() const;
  friend GroupElement operator*(const GroupElement& a, const GroupElement& b);

private:
  ModelPtr model_;
  Matrix g_;
};

/// ‖gᴴ J g − J‖ / ‖J‖ (gᵀ b g for SO(n,2)).
double form_defect(const GroupModel& model, const Matrix& g);

/// ε_i(μ(g)), weakly decreasing and nonnegative.
struct CartanVector {
  std::vector<double> eps;
  /// α_r = 2 ε_r.
  double alpha_r() const { return eps.empty() ? 0.0 : 2.0 * eps.back(); }
};

CartanVector cartan_projection(const GroupElement& g);

struct LyapunovCheck {
  int k = 0;
  /// max_i |ε_i(μ(g^k))/k − ε_i(λ(g))|.
  double deviation = 0;
  /// r·log κ(V)/k for an eigenvector matrix V (infinite when g is not diagonalizable).
  double bound = 0;
};

/// Logs of eigenvalue moduli; the limit μ(g^k)/k at k = k_max is computed as a cross-check.
CartanVector lyapunov_projection(const GroupElement& g, int k_max = 64, LyapunovCheck* check = nullptr);

/// The homomorphism SL(2,ℝ) → L_s ⊂ G_K, A ↦ diag(A ⊗ I_p, (A ⊗ I_p)^{-ᴴ}), r = 2p.
GroupElement tau_p(const Eigen::Matrix2d& a, const ModelPtr& model);

/// Projection onto the Lie algebra {Z : Zᴴ J + J Z = 0} (traceless for SU).
Matrix lie_algebra_projection(const GroupModel& model, const Matrix& z);
/// Seeded random Lie algebra element with unit Frobenius norm.
Matrix random_lie_algebra_element(const GroupModel& model, std::uint64_t seed);
/// g · exp(eps Z) for a seeded unit-norm Lie algebra element Z.
GroupElement random_lie_perturbation(const GroupElement& g, double eps, std::uint64_t seed);
/// Seeded random group element exp(Z1)·exp(Z2) with ‖Z_i‖ = scale.
GroupElement random_group_element(const ModelPtr& model, std::uint64_t seed, double scale = 1.0);

nlohmann::json to_json(const GroupModel& model);
nlohmann::json to_json(const GroupElement& g);
GroupElement group_element_from_json(const nlohmann::json& j);

}  // namespace causalflag
