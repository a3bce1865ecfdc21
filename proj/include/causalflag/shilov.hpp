#pragma once

// Points of the Shilov boundary: Lagrangian r-frames in K^{2r}, or isotropic
// lines of (ℝ^{n+2}, b) for SO(n,2).

#include "causalflag/groups.hpp"

#include <optional>
#include <utility>

namespace causalflag {

constexpr double kIsotropyTol = 1e-9;
constexpr double kTransverseTol = 1e-9;

class ShilovPoint {
public:
  ShilovPoint() = default;
  /// Validates rank and isotropy; rank-deficient frames are rejected here.
  ShilovPoint(ModelPtr model, Matrix frame, double isotropy_tol = kIsotropyTol);

  static ShilovPoint trusted(ModelPtr model, Matrix frame);

  const ModelPtr& model() const { return model_; }
  const Matrix& frame() const { return frame_; }
  /// Orthonormal frame of the same subspace.
  const Matrix& orthonormal() const;
  /// Column-reduced representative: pivot rows of the orthonormal frame set to the identity.
  Matrix canonical_form() const;

  double isotropy_defect() const;

private:
  ModelPtr model_;
  Matrix frame_;
  Matrix ortho_;
};

ShilovPoint act(const GroupElement& g, const ShilovPoint& x);

/// Projector distance (sine of the largest principal angle; for lines the sine of the angle).
double frame_distance(const ShilovPoint& x, const ShilovPoint& y);
bool same_point(const ShilovPoint& x, const ShilovPoint& y, double tol = 1e-8);

std::pair<ShilovPoint, ShilovPoint> base_points(const ModelPtr& model);

/// Scale-free transversality margin: |det [Q_x | Q_y]| for orthonormal frames,
/// i.e. the product of the principal-angle sines (Lagrangians), or
/// |b(u,v)|/(‖u‖‖v‖) (SO(n,2)).
double transversality_margin(const ShilovPoint& x, const ShilovPoint& y);
bool transverse(const ShilovPoint& x, const ShilovPoint& y, double* margin_out = nullptr);

/// Element of 𝔲⁻: r×r Hermitian over the model scalar, or a Minkowski n-vector (n×1).
struct ChartCoord {
  Matrix value;
};

ChartCoord hermitian_coord(const Matrix& x);
ChartCoord minkowski_coord(std::span<const double> v);

ShilovPoint chart_point(const ModelPtr& model, const ChartCoord& x);
/// Inverse of chart_point on the standard affine chart (points transverse to p⁻).
ChartCoord chart_coordinates(const ShilovPoint& x);

/// S ∈ G with S·a = p⁺ and S·c = p⁻.
GroupElement standardize_pair(const ShilovPoint& a, const ShilovPoint& c);

/// Bilinear pairing for SO(n,2) vectors.
double lightcone_pairing(const GroupModel& model, const Matrix& u, const Matrix& v);

nlohmann::json to_json(const ShilovPoint& x);
ShilovPoint shilov_point_from_json(const nlohmann::json& j);

}  // namespace causalflag
