#pragma once

// The invariant cone c⁰ on the standard chart (positive definite matrices, or
// the future timelike cone of Minkowski space for SO(n,2)), diamonds, causal
// hulls and the L⁰-orbit classification.

#include "causalflag/shilov.hpp"

#include <cstdint>
#include <vector>

namespace causalflag {

enum class CausalRelation { StrictFuture, StrictPast, Lightcone, Neither, Equal };

const char* relation_name(CausalRelation r) noexcept;

/// Eigenvalues of a chart vector in descending order: Hermitian eigenvalues,
/// or the Jordan eigenvalues d_n ± ‖(d_1..d_{n−1})‖ of a Minkowski vector.
std::vector<double> chart_spectrum(const GroupModel& model, const Matrix& d);
/// 1e-9·max(1, max |λ|).
double spectrum_tol(std::span<const double> ev);

/// Smallest "eigenvalue" of Y − X relative to the cone: λ_min(Y − X) for
/// Hermitian charts, (y−x)_n − ‖(y−x)_{1..n−1}‖ for Minkowski charts.
/// Positive iff Y is in the open future of X.
double cone_margin(const GroupModel& model, const Matrix& x, const Matrix& y);

bool in_cone(const GroupModel& model, const ChartCoord& x);
CausalRelation future_membership(const GroupModel& model, const ChartCoord& x, const ChartCoord& y);

struct OrbitIndex {
  int plus = 0;
  int minus = 0;
  friend bool operator==(const OrbitIndex&, const OrbitIndex&) = default;
};

/// (i₊, i₋): the point chart_point(X) lies in V_{i₊,i₋}; open orbit iff i₊ + i₋ = r.
OrbitIndex classify_orbit(const GroupModel& model, const ChartCoord& x);

/// An affine chart 𝔸_z with a transporter T ∈ G, T·p⁻ = z, mapping 𝔸_std onto 𝔸_z.
struct ChartedChart {
  ShilovPoint base;
  GroupElement transporter;
  /// The transporter image of c⁰ is declared the future (+1).
  int time_orientation = 1;
};

ChartedChart standard_chart(const ModelPtr& model);
ChartedChart make_chart(const ShilovPoint& base);
ChartCoord coordinates_in(const ChartedChart& chart, const ShilovPoint& x);
ShilovPoint point_from(const ChartedChart& chart, const ChartCoord& x);

struct Diamond {
  ChartedChart chart;
  ChartCoord x, y;
};

/// Throws InvalidArgument unless Y − X lies in the open cone.
Diamond make_diamond(const ChartedChart& chart, const ChartCoord& x, const ChartCoord& y);
bool diamond_membership(const Diamond& d, const ChartCoord& z, bool closed = false);
/// Seeded point strictly inside the diamond between x and y (chart coordinates).
ChartCoord sample_in_diamond(const GroupModel& model, const Matrix& x, const Matrix& y, std::uint64_t seed);

/// Causal hull of finitely many chart points: the union of the points and all
/// closed diamonds D^c(X_i, X_j) with X_j ∈ J⁺(X_i).
class CausalHull {
public:
  CausalHull(ModelPtr model, std::vector<Matrix> points);

  const ModelPtr& model() const { return model_; }
  const std::vector<Matrix>& points() const { return points_; }
  /// Ordered pairs (i, j), i != j, with X_j ∈ J⁺(X_i).
  const std::vector<std::pair<std::size_t, std::size_t>>& pairs() const { return pairs_; }

  /// Largest signed margin over members: min(cone_margin(X_i, Z), cone_margin(Z, X_j))
  /// over pairs, and −‖Z − X_i‖ over points. Nonnegative (up to tol) iff Z is in the hull.
  double membership_margin(const Matrix& z) const;
  bool contains(const Matrix& z, double tol = -1.0) const;

private:
  ModelPtr model_;
  std::vector<Matrix> points_;
  std::vector<std::pair<std::size_t, std::size_t>> pairs_;
  std::vector<double> traces_;
};

CausalHull causal_hull(const ModelPtr& model, const std::vector<ChartCoord>& points);

nlohmann::json to_json(const CausalHull& hull);

struct ChartIndependenceReport {
  std::size_t probes = 0;
  std::size_t agreements = 0;
  std::size_t disagreements = 0;
  std::size_t within_tol = 0;
  std::size_t skipped = 0;
  std::size_t inside_a = 0;
  double max_disagreement_margin = 0;
};

/// Membership agreement between the hulls of the same points computed in two charts.
ChartIndependenceReport chart_independence_check(const std::vector<ShilovPoint>& points, const ChartedChart& a,
                                                 const ChartedChart& b, std::size_t n_probe, std::uint64_t seed,
                                                 double band = 1e-7);

struct IdempotenceReport {
  std::size_t probes = 0;
  std::size_t disagreements = 0;
  std::size_t within_tol = 0;
};

/// hull(points ∪ samples from the hull's diamonds) has the same membership as hull(points).
IdempotenceReport hull_idempotence_check(const CausalHull& hull, std::size_t n_samples, std::size_t n_probe,
                                         std::uint64_t seed, double band = 1e-7);

struct SylvesterReport {
  std::size_t trials = 0;
  std::size_t failures = 0;
  /// histogram[k] = number of trials with pos(X + Y) = k.
  std::vector<std::size_t> histogram;
  double min_margin = 0;
};

/// Draws X with signature (i, r−i, 0) by congruence of a diagonal model and Y ≻ 0,
/// and counts trials with pos(X + Y) < i.
SylvesterReport sylvester_orbit_check(const ModelPtr& model, int i, std::size_t trials, std::uint64_t seed);

/// Random Hermitian matrix with signature (i, r−i, 0).
Matrix random_signature_matrix(int r, int i, ScalarTag tag, std::uint64_t seed);

}  // namespace causalflag
