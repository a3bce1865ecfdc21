#pragma once

// The Einstein universe Ein^{n−1,1} (isotropic lines of ℝ^{n,2}): lightcones,
// photons, the sign-product Maslov rule, invisible domains Ω(sample) and a
// Hilbert-metric utility on properly convex projective domains.

#include "causalflag/shilov.hpp"

#include <cstdint>
#include <functional>
#include <vector>

namespace causalflag {

/// A point of Ein: an isotropic line of an SO(n,2) model.
using EinPoint = ShilovPoint;

EinPoint ein_point(const ModelPtr& model, std::span<const double> v);

/// Projective line spanned by two points with b(u, w) = 0.
class Photon {
public:
  Photon(EinPoint u, EinPoint w);

  const EinPoint& u() const { return u_; }
  const EinPoint& w() const { return w_; }
  /// The point [cos θ u + sin θ w].
  EinPoint at(double theta) const;

private:
  EinPoint u_, w_;
};

/// |b(x, y)| ≤ 1e-9·‖x‖‖y‖.
bool lightcone_membership(const EinPoint& x, const EinPoint& y);

/// 0 when b(u,v)·b(v,w)·b(u,w) < 0, else 2.
int ein_maslov_sign(const EinPoint& a, const EinPoint& b, const EinPoint& c);

/// Lifts u_i with b(u_0, u_i) < 0; throws LimitSetNotNegative unless every
/// pairing between lifts is negative (negativity 3 by 3).
std::vector<Matrix> negative_lifts(const std::vector<EinPoint>& limit_pts);

/// Signed membership margin for Ω: max over signs s of min_i s·b(x, u_i)/(‖x‖‖u_i‖);
/// positive iff x is transverse to every limit point with Maslov sign 0 against every pair.
double invisible_domain_margin(const std::vector<Matrix>& lifts, const EinPoint& x);

bool invisible_domain_membership(const std::vector<EinPoint>& limit_pts, const EinPoint& x);

/// Seeded uniform point of Ein (isotropic direction from orthonormal coordinates).
EinPoint random_ein_point(const ModelPtr& model, std::uint64_t seed);

/// Seeded photon through x.
Photon random_photon_through(const EinPoint& x, std::uint64_t seed);

/// Limit set on a spacelike circle: lifts (cos θ_k, sin θ_k) + g with g a unit
/// timelike vector, pairwise pairing cos(θ_i − θ_j) − 1 < 0.
std::vector<EinPoint> spacelike_circle_sample(const ModelPtr& model, int count, std::uint64_t seed, double jitter = 0.2);

struct PhotonConvexityReport {
  std::size_t photons = 0;
  std::size_t checked = 0;
  std::size_t violations = 0;
  std::size_t vacuous = 0;
  std::size_t within_tol = 0;
  std::size_t rejected_bases = 0;
};

PhotonConvexityReport photon_convexity_check(const std::vector<EinPoint>& limit_pts, std::size_t n_photons,
                                             std::uint64_t seed, int scan = 1000, double band = 1e-9);

/// Membership oracle on homogeneous coordinates.
using ConvexOracle = std::function<bool(const Eigen::VectorXd&)>;

/// log of the cross ratio (a:x:y:b) on the projective line through x and y, with
/// a, b located by bisection on the oracle to tol (angular).
double hilbert_distance(const ConvexOracle& inside, const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                        double tol = 1e-12);

}  // namespace causalflag
