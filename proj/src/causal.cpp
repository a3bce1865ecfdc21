#include "causalflag/causal.hpp"

#include "causalflag/error.hpp"
#include "causalflag/parallel.hpp"
#include "causalflag/random.hpp"

#include <algorithm>
#include <cmath>

namespace causalflag {

std::vector<double> chart_spectrum(const GroupModel& model, const Matrix& d) {
  if (model.lagrangian()) {
    if (d.rows() != model.size || d.cols() != model.size)
      throw Error(ErrorCode::ModelMismatch, "chart coordinate must be r x r");
    return hermitian_eigenvalues(d);
  }
  const int n = model.size;
  if (d.rows() != n || d.cols() != 1) throw Error(ErrorCode::ModelMismatch, "chart coordinate must be an n-vector");
  double s2 = 0;
  for (int i = 0; i + 1 < n; ++i) s2 += d(i, 0).w * d(i, 0).w;
  const double s = std::sqrt(s2), t = d(n - 1, 0).w;
  return {t + s, t - s};
}

double spectrum_tol(std::span<const double> ev) {
  double m = 0;
  for (double e : ev) m = std::max(m, std::abs(e));
  return 1e-9 * std::max(1.0, m);
}

namespace {

void check_coord(const GroupModel& model, const Matrix& x) {
  if (!model.lagrangian()) return;
  if (x.norm() > 0 && hermitian_defect(x) > kDefaultHermitianTol)
    throw Error(ErrorCode::NotHermitian, "chart coordinate is not Hermitian");
}

}  // namespace

const char* relation_name(CausalRelation r) noexcept {
  switch (r) {
    case CausalRelation::StrictFuture: return "STRICT_FUTURE";
    case CausalRelation::StrictPast: return "STRICT_PAST";
    case CausalRelation::Lightcone: return "LIGHTCONE";
    case CausalRelation::Neither: return "NEITHER";
    case CausalRelation::Equal: return "EQUAL";
  }
  return "NEITHER";
}

double cone_margin(const GroupModel& model, const Matrix& x, const Matrix& y) {
  const auto ev = chart_spectrum(model, y - x);
  return ev.back();
}

bool in_cone(const GroupModel& model, const ChartCoord& x) {
  check_coord(model, x.value);
  const auto ev = chart_spectrum(model, x.value);
  return ev.back() > spectrum_tol(ev);
}

CausalRelation future_membership(const GroupModel& model, const ChartCoord& x, const ChartCoord& y) {
  check_coord(model, x.value);
  check_coord(model, y.value);
  const auto ev = chart_spectrum(model, y.value - x.value);
  const double tol = spectrum_tol(ev);
  const double hi = ev.front(), lo = ev.back();
  if (std::max(std::abs(hi), std::abs(lo)) <= tol) return CausalRelation::Equal;
  if (lo > tol) return CausalRelation::StrictFuture;
  if (hi < -tol) return CausalRelation::StrictPast;
  if (lo >= -tol || hi <= tol) return CausalRelation::Lightcone;
  return CausalRelation::Neither;
}

OrbitIndex classify_orbit(const GroupModel& model, const ChartCoord& x) {
  check_coord(model, x.value);
  const auto ev = chart_spectrum(model, x.value);
  const auto s = signature_of(ev, spectrum_tol(ev));
  return {s.pos, s.neg};
}

ChartedChart standard_chart(const ModelPtr& model) {
  return {base_points(model).second, GroupElement::identity(model), 1};
}

ChartedChart make_chart(const ShilovPoint& base) {
  const auto& model = base.model();
  const auto [plus, minus] = base_points(model);
  // Partner w transverse to the base: the best of a few fixed candidates.
  std::vector<ShilovPoint> candidates{plus, minus};
  if (model->lagrangian()) {
    const int r = model->size;
    candidates.push_back(chart_point(model, hermitian_coord(Matrix::identity(r, model->scalar))));
    candidates.push_back(chart_point(model, hermitian_coord(Matrix::identity(r, model->scalar) * -1.0)));
  } else {
    std::vector<double> v(static_cast<std::size_t>(model->size), 0.0);
    v.back() = 1.0;
    candidates.push_back(chart_point(model, minkowski_coord(v)));
    v.back() = -1.0;
    candidates.push_back(chart_point(model, minkowski_coord(v)));
  }
  std::size_t best = 0;
  double best_margin = -1;
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    const double m = transversality_margin(candidates[k], base);
    if (m > best_margin) {
      best_margin = m;
      best = k;
    }
  }
  // S·w = p⁺, S·base = p⁻, so T = S⁻¹ carries 𝔸_std = 𝔸_{p⁻} onto 𝔸_base.
  const GroupElement s = standardize_pair(candidates[best], base);
  return {base, s.inverse(), 1};
}

ChartCoord coordinates_in(const ChartedChart& chart, const ShilovPoint& x) {
  return chart_coordinates(act(chart.transporter.inverse(), x));
}

ShilovPoint point_from(const ChartedChart& chart, const ChartCoord& x) {
  return act(chart.transporter, chart_point(chart.transporter.model(), x));
}

Diamond make_diamond(const ChartedChart& chart, const ChartCoord& x, const ChartCoord& y) {
  const auto& model = *chart.base.model();
  check_coord(model, x.value);
  check_coord(model, y.value);
  const auto ev = chart_spectrum(model, y.value - x.value);
  if (!(ev.back() > spectrum_tol(ev))) throw Error(ErrorCode::InvalidArgument, "diamond needs y in the open future of x");
  return {chart, x, y};
}

bool diamond_membership(const Diamond& d, const ChartCoord& z, bool closed) {
  const auto& model = *d.chart.base.model();
  check_coord(model, z.value);
  const auto lower = chart_spectrum(model, z.value - d.x.value);
  const auto upper = chart_spectrum(model, d.y.value - z.value);
  if (closed) return lower.back() >= -spectrum_tol(lower) && upper.back() >= -spectrum_tol(upper);
  return lower.back() > spectrum_tol(lower) && upper.back() > spectrum_tol(upper);
}

ChartCoord sample_in_diamond(const GroupModel& model, const Matrix& x, const Matrix& y, std::uint64_t seed) {
  Rng rng(seed, 0x446961ULL);
  if (model.lagrangian()) {
    const int r = model.size;
    // Z = X + S U S with S = (Y − X)^{1/2} and 0 ≺ U ≺ I.
    const Matrix s = hermitian_sqrt(y - x);
    const Matrix q = orthonormalize(rng.invertible(r, model.scalar));
    std::vector<double> u(static_cast<std::size_t>(r));
    for (auto& e : u) e = rng.uniform(0.05, 0.95);
    const Matrix uu = q * Matrix::diagonal(u, model.scalar) * q.adjoint();
    const Matrix z = x + s * uu * s;
    return {((z + z.adjoint()) * 0.5).retagged(model.scalar)};
  }
  const int n = model.size;
  const Matrix d = y - x;
  const Matrix c = x + d * rng.uniform(0.2, 0.8);
  const double room = std::min(cone_margin(model, x, c), cone_margin(model, c, y));
  Matrix e = rng.gaussian(n, 1, ScalarTag::Real);
  const double en = e.norm();
  // a perturbation of Euclidean size ρ moves the smallest Jordan eigenvalue by at most √2 ρ
  const double rho = rng.uniform(0.0, 0.95) * room / std::sqrt(2.0);
  return {c + e * (en > 0 ? rho / en : 0.0)};
}

CausalHull::CausalHull(ModelPtr model, std::vector<Matrix> points) : model_(std::move(model)), points_(std::move(points)) {
  if (points_.empty()) throw Error(ErrorCode::EmptyInput, "causal hull of an empty set");
  for (const auto& p : points_) check_coord(*model_, p);
  const std::size_t n = points_.size();
  // Spectra of pairwise differences are needed for J⁺; the trace (or time
  // component) bounds the smallest eigenvalue and filters most pairs cheaply.
  traces_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Matrix& p = points_[i];
    traces_[i] = model_->lagrangian() ? p.trace().w : p(p.rows() - 1, 0).w;
  }
  std::vector<std::vector<std::size_t>> later(n);
  parallel_for(n, [&](std::size_t i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const Matrix d = points_[j] - points_[i];
      const double tol = 1e-9 * std::max(1.0, d.norm());
      if (traces_[j] - traces_[i] < -tol * points_[i].rows()) continue;
      const auto ev = chart_spectrum(*model_, d);
      const double etol = spectrum_tol(ev);
      if (std::max(std::abs(ev.front()), std::abs(ev.back())) <= etol) continue;
      if (ev.back() >= -etol) later[i].push_back(j);
    }
  });
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j : later[i]) pairs_.emplace_back(i, j);
}

double CausalHull::membership_margin(const Matrix& z) const {
  check_coord(*model_, z);
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& p : points_) best = std::max(best, -(z - p).norm());
  for (const auto& [i, j] : pairs_) {
    const double lower = chart_spectrum(*model_, z - points_[i]).back();
    if (lower <= best) continue;
    const double upper = chart_spectrum(*model_, points_[j] - z).back();
    best = std::max(best, std::min(lower, upper));
  }
  return best;
}

bool CausalHull::contains(const Matrix& z, double tol) const {
  if (tol < 0) tol = 1e-9 * std::max(1.0, z.norm());
  return membership_margin(z) >= -tol;
}

CausalHull causal_hull(const ModelPtr& model, const std::vector<ChartCoord>& points) {
  std::vector<Matrix> pts;
  pts.reserve(points.size());
  for (const auto& p : points) pts.push_back(p.value);
  return CausalHull(model, std::move(pts));
}

nlohmann::json to_json(const CausalHull& hull) {
  nlohmann::json pts = nlohmann::json::array(), pairs = nlohmann::json::array();
  for (const auto& p : hull.points()) pts.push_back(to_json(p));
  for (const auto& [i, j] : hull.pairs()) pairs.push_back({i, j});
  return {{"model", hull.model()->id}, {"points", pts}, {"pairs", pairs}};
}

namespace {

// Probe near the hull: a point of a random diamond (or a random input point)
// pushed by a random direction comparable to the hull's size, so that probes
// land on both sides of the boundary.
Matrix hull_probe(const CausalHull& hull, std::uint64_t seed) {
  Rng rng(seed, 0x50726fULL);
  const auto& model = *hull.model();
  const auto& pts = hull.points();
  Matrix base = pts[rng.index(pts.size())];
  double scale = 0.1;
  if (!hull.pairs().empty() && rng.uniform() < 0.8) {
    const auto [i, j] = hull.pairs()[rng.index(hull.pairs().size())];
    const Matrix& x = pts[i];
    const Matrix& y = pts[j];
    if (cone_margin(model, x, y) > 1e-9) base = sample_in_diamond(model, x, y, rng.next()).value;
    scale = (y - x).norm();
  }
  Matrix e = model.lagrangian() ? rng.hermitian(model.size, model.scalar) : rng.gaussian(model.size, 1, ScalarTag::Real);
  const double en = e.norm();
  const double step = rng.uniform(0.0, 0.5) * std::max(scale, 1e-3);
  Matrix z = base + e * (en > 0 ? step / en : 0.0);
  if (model.lagrangian()) z = ((z + z.adjoint()) * 0.5).retagged(model.scalar);
  return z;
}

}  // namespace

ChartIndependenceReport chart_independence_check(const std::vector<ShilovPoint>& points, const ChartedChart& a,
                                                 const ChartedChart& b, std::size_t n_probe, std::uint64_t seed,
                                                 double band) {
  if (points.empty()) throw Error(ErrorCode::EmptyInput, "chart independence needs points");
  const auto& model = a.base.model();
  std::vector<Matrix> in_a, in_b;
  for (const auto& p : points) {
    if (!transverse(p, a.base) || !transverse(p, b.base))
      throw Error(ErrorCode::PointsNotInBothCharts, "a point is not in both affine charts");
    in_a.push_back(coordinates_in(a, p).value);
    in_b.push_back(coordinates_in(b, p).value);
  }
  const CausalHull hull_a(model, in_a), hull_b(model, in_b);

  struct Outcome {
    int kind = 0;  // 0 agree, 1 disagree, 2 within tolerance, 3 skipped
    bool inside_a = false;
    double margin = 0;
  };
  std::vector<Outcome> out(n_probe);
  parallel_for(n_probe, [&](std::size_t k) {
    Outcome& o = out[k];
    const Matrix za = hull_probe(hull_a, mix_seed(seed, k));
    ShilovPoint p;
    Matrix zb;
    try {
      p = point_from(a, {za});
      if (!transverse(p, b.base)) {
        o.kind = 3;
        return;
      }
      zb = coordinates_in(b, p).value;
    } catch (const Error&) {
      o.kind = 3;
      return;
    }
    const double ma = hull_a.membership_margin(za);
    const double mb = hull_b.membership_margin(zb);
    const double ta = band * std::max(1.0, za.norm()), tb = band * std::max(1.0, zb.norm());
    o.inside_a = ma >= -ta;
    const bool inside_b = mb >= -tb;
    if (std::abs(ma) <= ta || std::abs(mb) <= tb) {
      o.kind = 2;
    } else if (o.inside_a != inside_b) {
      o.kind = 1;
      o.margin = std::min(std::abs(ma), std::abs(mb));
    }
  });
  ChartIndependenceReport rep;
  rep.probes = n_probe;
  for (const auto& o : out) {
    switch (o.kind) {
      case 0: ++rep.agreements; break;
      case 1: ++rep.disagreements; break;
      case 2: ++rep.within_tol; break;
      default: ++rep.skipped; break;
    }
    if (o.kind != 3 && o.inside_a) ++rep.inside_a;
    rep.max_disagreement_margin = std::max(rep.max_disagreement_margin, o.margin);
  }
  return rep;
}

IdempotenceReport hull_idempotence_check(const CausalHull& hull, std::size_t n_samples, std::size_t n_probe,
                                         std::uint64_t seed, double band) {
  const auto& model = *hull.model();
  std::vector<Matrix> augmented = hull.points();
  if (!hull.pairs().empty()) {
    Rng rng(seed, 0x49646dULL);
    for (std::size_t k = 0; k < n_samples; ++k) {
      const auto [i, j] = hull.pairs()[rng.index(hull.pairs().size())];
      const Matrix& x = hull.points()[i];
      const Matrix& y = hull.points()[j];
      if (cone_margin(model, x, y) > 1e-9) augmented.push_back(sample_in_diamond(model, x, y, rng.next()).value);
    }
  }
  const CausalHull bigger(hull.model(), std::move(augmented));
  std::vector<int> kind(n_probe, 0);
  parallel_for(n_probe, [&](std::size_t k) {
    const Matrix z = hull_probe(hull, mix_seed(seed ^ 0x9e37ULL, k));
    const double m0 = hull.membership_margin(z), m1 = bigger.membership_margin(z);
    const double t = band * std::max(1.0, z.norm());
    if (std::abs(m0) <= t || std::abs(m1) <= t)
      kind[k] = 2;
    else
      kind[k] = (m0 >= 0) == (m1 >= 0) ? 0 : 1;
  });
  IdempotenceReport rep;
  rep.probes = n_probe;
  for (int k : kind) {
    if (k == 1) ++rep.disagreements;
    if (k == 2) ++rep.within_tol;
  }
  return rep;
}

Matrix random_signature_matrix(int r, int i, ScalarTag tag, std::uint64_t seed) {
  if (i < 0 || i > r) throw Error(ErrorCode::InvalidArgument, "signature index out of range");
  Rng rng(seed, 0x53676eULL);
  std::vector<double> d(static_cast<std::size_t>(r));
  for (int k = 0; k < r; ++k) d[static_cast<std::size_t>(k)] = (k < i ? 1.0 : -1.0) * rng.uniform(0.5, 2.0);
  const Matrix m = rng.invertible(r, tag);
  const Matrix x = m.adjoint() * Matrix::diagonal(d, tag) * m;
  return ((x + x.adjoint()) * 0.5).retagged(tag);
}

SylvesterReport sylvester_orbit_check(const ModelPtr& model, int i, std::size_t trials, std::uint64_t seed) {
  if (!model->lagrangian()) throw Error(ErrorCode::ModelMismatch, "Sylvester check needs a Lagrangian family");
  const int r = model->size;
  if (i < 0 || i > r) throw Error(ErrorCode::InvalidArgument, "i must satisfy 0 <= i <= r");
  struct Trial {
    int pos = 0;
    double margin = 0;
  };
  std::vector<Trial> res(trials);
  parallel_for(trials, [&](std::size_t t) {
    const std::uint64_t s = mix_seed(seed, t);
    const Matrix x = random_signature_matrix(r, i, model->scalar, s);
    Rng rng(s, 0x59ULL);
    const Matrix y = rng.positive_definite(r, model->scalar);
    const auto ev = hermitian_eigenvalues(x + y);
    res[t].pos = signature_of(ev, spectrum_tol(ev)).pos;
    // i-th largest eigenvalue relative to the spectral radius; positive iff pos ≥ i
    double rad = 0;
    for (double e : ev) rad = std::max(rad, std::abs(e));
    res[t].margin = i == 0 ? 1.0 : ev[static_cast<std::size_t>(i - 1)] / std::max(rad, 1e-300);
  });
  SylvesterReport rep;
  rep.trials = trials;
  rep.histogram.assign(static_cast<std::size_t>(r + 1), 0);
  rep.min_margin = trials ? std::numeric_limits<double>::infinity() : 0.0;
  for (const auto& t : res) {
    ++rep.histogram[static_cast<std::size_t>(t.pos)];
    if (t.pos < i) ++rep.failures;
    rep.min_margin = std::min(rep.min_margin, t.margin);
  }
  return rep;
}

}  // namespace causalflag
