#include "causalflag/einstein.hpp"

#include "causalflag/error.hpp"
#include "causalflag/parallel.hpp"
#include "causalflag/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>

namespace causalflag {

namespace {

void check_ein_model(const GroupModel& model) {
  if (model.lagrangian()) throw Error(ErrorCode::ModelMismatch, "Einstein universe needs an SO(n,2) model");
}

double pairing(const GroupModel& model, const Matrix& u, const Matrix& v) { return lightcone_pairing(model, u, v); }

// Orthonormal basis of (ℝ^{n+2}, b) in light-cone coordinates (a, v_1..v_n, c):
// n positive vectors v_1..v_{n−1}, (e_a − e_c)/√2 and two negative ones v_n, (e_a + e_c)/√2.
struct OrthoBasis {
  std::vector<Eigen::VectorXd> pos, neg;
};

OrthoBasis ortho_basis(int n) {
  const int d = n + 2;
  OrthoBasis b;
  const double h = 1.0 / std::sqrt(2.0);
  for (int k = 1; k < n; ++k) b.pos.push_back(Eigen::VectorXd::Unit(d, k));
  Eigen::VectorXd fp = Eigen::VectorXd::Zero(d), fm = Eigen::VectorXd::Zero(d);
  fp(0) = h;
  fp(d - 1) = -h;
  fm(0) = h;
  fm(d - 1) = h;
  b.pos.push_back(fp);
  b.neg.push_back(Eigen::VectorXd::Unit(d, n));
  b.neg.push_back(fm);
  return b;
}

Matrix column(const Eigen::VectorXd& v) { return Matrix::from_real(v); }

}  // namespace

EinPoint ein_point(const ModelPtr& model, std::span<const double> v) {
  check_ein_model(*model);
  Matrix f(static_cast<int>(v.size()), 1);
  for (std::size_t i = 0; i < v.size(); ++i) f(static_cast<int>(i), 0) = v[i];
  return ShilovPoint(model, f);
}

Photon::Photon(EinPoint u, EinPoint w) : u_(std::move(u)), w_(std::move(w)) {
  const auto& model = *u_.model();
  check_ein_model(model);
  const Matrix& a = u_.orthonormal();
  const Matrix& b = w_.orthonormal();
  if (std::abs(pairing(model, a, b)) > 1e-9) throw Error(ErrorCode::DegenerateFrame, "photon endpoints are not orthogonal");
  if (frame_distance(u_, w_) < 1e-9) throw Error(ErrorCode::DegenerateFrame, "photon endpoints coincide");
}

EinPoint Photon::at(double theta) const {
  const Matrix& a = u_.orthonormal();
  const Matrix& b = w_.orthonormal();
  return ShilovPoint::trusted(u_.model(), a * std::cos(theta) + b * std::sin(theta));
}

bool lightcone_membership(const EinPoint& x, const EinPoint& y) { return !transverse(x, y); }

int ein_maslov_sign(const EinPoint& a, const EinPoint& b, const EinPoint& c) {
  const auto& model = *a.model();
  check_ein_model(model);
  if (!transverse(a, b) || !transverse(b, c) || !transverse(a, c))
    throw Error(ErrorCode::NotPairwiseTransverse, "triple is not pairwise transverse");
  const Matrix &u = a.frame(), &v = b.frame(), &w = c.frame();
  const double s = pairing(model, u, v) * pairing(model, v, w) * pairing(model, u, w);
  return s < 0 ? 0 : 2;
}

std::vector<Matrix> negative_lifts(const std::vector<EinPoint>& limit_pts) {
  if (limit_pts.empty()) throw Error(ErrorCode::EmptyInput, "empty limit set");
  if (limit_pts.size() > 1000) throw Error(ErrorCode::InvalidArgument, "limit set is capped at 1000 points");
  const auto& model = *limit_pts[0].model();
  check_ein_model(model);
  std::vector<Matrix> lifts{limit_pts[0].orthonormal()};
  for (std::size_t i = 1; i < limit_pts.size(); ++i) {
    Matrix u = limit_pts[i].orthonormal();
    const double p = pairing(model, lifts[0], u);
    if (!(std::abs(p) > 1e-9)) throw Error(ErrorCode::LimitSetNotNegative, "limit points are not pairwise transverse");
    if (p > 0) u *= -1.0;
    lifts.push_back(std::move(u));
  }
  for (std::size_t i = 1; i < lifts.size(); ++i)
    for (std::size_t j = i + 1; j < lifts.size(); ++j)
      if (!(pairing(model, lifts[i], lifts[j]) < -1e-9))
        throw Error(ErrorCode::LimitSetNotNegative, "limit set is not negative 3 by 3");
  return lifts;
}

double invisible_domain_margin(const std::vector<Matrix>& lifts, const EinPoint& x) {
  const auto& model = *x.model();
  const Matrix& v = x.orthonormal();
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& u : lifts) {
    const double c = pairing(model, v, u);
    lo = std::min(lo, c);
    hi = std::max(hi, c);
  }
  return std::max(lo, -hi);
}

bool invisible_domain_membership(const std::vector<EinPoint>& limit_pts, const EinPoint& x) {
  return invisible_domain_margin(negative_lifts(limit_pts), x) > 1e-9;
}

EinPoint random_ein_point(const ModelPtr& model, std::uint64_t seed) {
  check_ein_model(*model);
  const int n = model->size;
  const auto basis = ortho_basis(n);
  Rng rng(seed, 0x45696eULL);
  Eigen::VectorXd p(n), q(2);
  for (int k = 0; k < n; ++k) p(k) = rng.normal();
  for (int k = 0; k < 2; ++k) q(k) = rng.normal();
  p.normalize();
  q.normalize();
  Eigen::VectorXd v = Eigen::VectorXd::Zero(n + 2);
  for (int k = 0; k < n; ++k) v += p(k) * basis.pos[static_cast<std::size_t>(k)];
  for (int k = 0; k < 2; ++k) v += q(k) * basis.neg[static_cast<std::size_t>(k)];
  return ShilovPoint(model, column(v));
}

Photon random_photon_through(const EinPoint& x, std::uint64_t seed) {
  const auto& model = x.model();
  const int n = model->size;
  const auto basis = ortho_basis(n);
  const Eigen::VectorXd xv = x.orthonormal().to_real().col(0);
  const Eigen::MatrixXd b = model->form.to_real();
  // orthonormal coordinates (p, q) of x, |p| = |q|
  Eigen::VectorXd p(n), q(2);
  for (int k = 0; k < n; ++k) p(k) = xv.dot(b * basis.pos[static_cast<std::size_t>(k)]);
  for (int k = 0; k < 2; ++k) q(k) = -xv.dot(b * basis.neg[static_cast<std::size_t>(k)]);
  const double s = p.norm();
  p /= s;
  q /= q.norm();
  Rng rng(seed, 0x50686fULL);
  Eigen::VectorXd u(n);
  for (int k = 0; k < n; ++k) u(k) = rng.normal();
  u -= u.dot(p) * p;
  u.normalize();
  const Eigen::Vector2d q_perp(-q(1), q(0));
  // y = (cos φ p + sin φ u, cos φ q + sin φ q⊥) is isotropic and b-orthogonal to x;
  // w = y − cos φ x spans the same photon
  const double phi = rng.uniform(0.2, std::numbers::pi - 0.2);
  const double sg = std::sin(phi);
  Eigen::VectorXd w = Eigen::VectorXd::Zero(n + 2);
  for (int k = 0; k < n; ++k) w += sg * u(k) * basis.pos[static_cast<std::size_t>(k)];
  for (int k = 0; k < 2; ++k) w += sg * q_perp(k) * basis.neg[static_cast<std::size_t>(k)];
  return Photon(x, ShilovPoint(model, column(w)));
}

std::vector<EinPoint> spacelike_circle_sample(const ModelPtr& model, int count, std::uint64_t seed, double jitter) {
  check_ein_model(*model);
  if (count < 1) throw Error(ErrorCode::InvalidArgument, "count must be positive");
  const auto basis = ortho_basis(model->size);
  Rng rng(seed, 0x436972ULL);
  std::vector<EinPoint> out;
  for (int k = 0; k < count; ++k) {
    const double step = 2 * std::numbers::pi / count;
    const double t = k * step + jitter * step * (rng.uniform() - 0.5);
    const Eigen::VectorXd v = std::cos(t) * basis.pos[0] + std::sin(t) * basis.pos[1] + basis.neg[0];
    out.push_back(ShilovPoint(model, column(v)));
  }
  return out;
}

PhotonConvexityReport photon_convexity_check(const std::vector<EinPoint>& limit_pts, std::size_t n_photons,
                                             std::uint64_t seed, int scan, double band) {
  const auto lifts = negative_lifts(limit_pts);
  const auto& model = limit_pts[0].model();
  if (scan < 4) throw Error(ErrorCode::InvalidArgument, "scan needs at least 4 parameters");
  enum Kind { Checked, Violation, Vacuous };
  struct Res {
    Kind kind = Vacuous;
    bool within_tol = false;
    std::size_t rejected = 0;
  };
  std::vector<Res> res(n_photons);
  parallel_for(n_photons, [&](std::size_t k) {
    Res& r = res[k];
    const std::uint64_t s = mix_seed(seed, k);
    // base point of Ω(sample) by rejection
    std::optional<EinPoint> base;
    for (std::uint64_t t = 0; t < 1000 && !base; ++t) {
      EinPoint x = random_ein_point(model, mix_seed(s, t));
      if (invisible_domain_margin(lifts, x) > band)
        base = std::move(x);
      else
        ++r.rejected;
    }
    if (!base) return;
    const Photon ph = random_photon_through(*base, mix_seed(s, 0xffffULL));
    std::vector<int> state;
    std::size_t inside = 0;
    for (int j = 0; j < scan; ++j) {
      const double m = invisible_domain_margin(lifts, ph.at(std::numbers::pi * j / scan));
      if (std::abs(m) <= band) {
        r.within_tol = true;
        continue;
      }
      state.push_back(m > 0 ? 1 : 0);
      inside += m > 0 ? 1 : 0;
    }
    if (inside < 2) return;
    std::size_t changes = 0;
    for (std::size_t j = 0; j < state.size(); ++j)
      if (state[j] != state[(j + 1) % state.size()]) ++changes;
    r.kind = changes > 2 ? Violation : Checked;
  });
  PhotonConvexityReport out;
  out.photons = n_photons;
  for (const auto& r : res) {
    if (r.kind == Checked) ++out.checked;
    if (r.kind == Violation) ++out.violations;
    if (r.kind == Vacuous) ++out.vacuous;
    if (r.within_tol) ++out.within_tol;
    out.rejected_bases += r.rejected;
  }
  return out;
}

double hilbert_distance(const ConvexOracle& inside, const Eigen::VectorXd& x, const Eigen::VectorXd& y, double tol) {
  if (x.size() != y.size() || x.size() < 2) throw Error(ErrorCode::InvalidArgument, "points must share a dimension >= 2");
  if (!inside(x) || !inside(y)) throw Error(ErrorCode::NotInDomain, "point is not in the domain");
  const Eigen::VectorXd u = x.normalized();
  Eigen::VectorXd v = y.normalized();
  if ((u - v).norm() < 1e-15 || (u + v).norm() < 1e-15) return 0.0;
  // pick the lift of y whose short arc from x stays in the domain
  if (!inside((u + v).normalized())) {
    v = -v;
    if (!inside((u + v).normalized())) throw Error(ErrorCode::NotInDomain, "segment leaves the domain");
  }
  const Eigen::VectorXd w = (v - v.dot(u) * u).normalized();
  const double phi_y = std::atan2(v.dot(w), v.dot(u));
  auto at = [&](double phi) -> Eigen::VectorXd { return std::cos(phi) * u + std::sin(phi) * w; };
  const double room = std::numbers::pi - phi_y;
  constexpr int kSteps = 64;
  // bracket the boundary on [from, from + dir·room) and bisect
  auto boundary = [&](double from, double dir) {
    double in = from, out = std::numeric_limits<double>::quiet_NaN();
    for (int k = 1; k < kSteps; ++k) {
      const double phi = from + dir * room * k / kSteps;
      if (!inside(at(phi))) {
        out = phi;
        break;
      }
      in = phi;
    }
    if (std::isnan(out)) throw Error(ErrorCode::BoundaryNotBracketed, "line does not leave the domain");
    while (std::abs(out - in) > tol) {
      const double mid = 0.5 * (in + out);
      if (mid == in || mid == out) break;
      (inside(at(mid)) ? in : out) = mid;
    }
    return 0.5 * (in + out);
  };
  const double phi_a = boundary(0.0, -1.0);
  const double phi_b = boundary(phi_y, 1.0);
  const double cr = std::sin(phi_b) * std::sin(phi_y - phi_a) / (std::sin(phi_b - phi_y) * std::sin(-phi_a));
  return std::log(cr);
}

}  // namespace causalflag
