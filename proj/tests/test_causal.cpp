#include "causalflag/causal.hpp"
#include "causalflag/error.hpp"
#include "causalflag/maslov.hpp"
#include "causalflag/random.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace causalflag;

namespace {

const char* kLagrangian[] = {"sp4", "su22", "sostar8", "sp8"};

Matrix diag(std::vector<double> d) { return Matrix::diagonal(d); }
ChartCoord coord(std::vector<double> d) { return hermitian_coord(diag(std::move(d))); }

template <class F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return static_cast<ErrorCode>(0);
}

Eigen::Matrix2d random_sl2(std::mt19937_64& g) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::Matrix2d a;
  do {
    a << n(g), n(g), n(g), n(g);
  } while (std::abs(a.determinant()) < 0.1);
  if (a.determinant() < 0) a.col(0) *= -1.0;
  return a / std::sqrt(a.determinant());
}

}  // namespace

TEST(Cone, Examples) {
  const auto m = model_from_id("sp4");
  EXPECT_TRUE(in_cone(*m, coord({1, 1})));
  EXPECT_FALSE(in_cone(*m, coord({0, 0})));
  EXPECT_FALSE(in_cone(*m, coord({1, -1})));
  EXPECT_FALSE(in_cone(*m, coord({1, 0})));
}

TEST(Cone, MinkowskiFutureTimelike) {
  const auto m = model_from_id("so42");
  EXPECT_TRUE(in_cone(*m, minkowski_coord(std::vector<double>{0.1, 0.2, 0.3, 1.0})));
  EXPECT_FALSE(in_cone(*m, minkowski_coord(std::vector<double>{0.1, 0.2, 0.3, -1.0})));
  EXPECT_FALSE(in_cone(*m, minkowski_coord(std::vector<double>{1.0, 0.0, 0.0, 0.5})));
  // ψ(v) = 0 with v_n > 0 is on the boundary
  EXPECT_FALSE(in_cone(*m, minkowski_coord(std::vector<double>{0.6, 0.8, 0.0, 1.0})));
}

TEST(Cone, RejectsNonHermitian) {
  const auto m = model_from_id("sp4");
  Matrix x = diag({1, 1});
  x(0, 1) = 0.5;
  EXPECT_EQ(code_of([&] { in_cone(*m, hermitian_coord(x)); }), ErrorCode::NotHermitian);
}

TEST(FutureMembership, Examples) {
  const auto m = model_from_id("sp4");
  EXPECT_EQ(future_membership(*m, coord({0, 0}), coord({1, 1})), CausalRelation::StrictFuture);
  EXPECT_EQ(future_membership(*m, coord({1, 1}), coord({0, 0})), CausalRelation::StrictPast);
  EXPECT_EQ(future_membership(*m, coord({0.3, -2}), coord({0.3, -2})), CausalRelation::Equal);
  EXPECT_EQ(future_membership(*m, coord({0, 0}), coord({1, -1})), CausalRelation::Neither);
  EXPECT_EQ(future_membership(*m, coord({0, 0}), coord({1, 0})), CausalRelation::Lightcone);
  EXPECT_EQ(future_membership(*m, coord({0, 0}), coord({-1, 0})), CausalRelation::Lightcone);
}

TEST(FutureMembership, ConeAxiomsOnSamples) {
  std::mt19937_64 g(1);
  for (const char* id : {"sp4", "su22", "sostar8"}) {
    const auto m = model_from_id(id);
    for (int t = 0; t < 3400; ++t) {
      const ChartCoord x{oracle::random_hermitian(g, m->size, m->scalar)};
      const ChartCoord y{oracle::random_hermitian(g, m->size, m->scalar)};
      // z = y + P keeps many strict chains
      const ChartCoord z{y.value + oracle::random_positive(g, m->size, m->scalar, 0.1, 2.0)};
      const auto xy = future_membership(*m, x, y), yx = future_membership(*m, y, x);
      EXPECT_EQ(xy == CausalRelation::StrictFuture, yx == CausalRelation::StrictPast);
      if (xy == CausalRelation::StrictFuture) EXPECT_EQ(future_membership(*m, x, z), CausalRelation::StrictFuture);
      EXPECT_EQ(future_membership(*m, x, x), CausalRelation::Equal);
    }
  }
}

TEST(FutureMembership, LightconeIsNotTransverse) {
  std::mt19937_64 g(2);
  for (const char* id : {"sp4", "su22", "sostar8"}) {
    const auto m = model_from_id(id);
    const int r = m->size;
    for (int t = 0; t < 3400; ++t) {
      const Matrix x = oracle::random_hermitian(g, r, m->scalar);
      // Y − X = Q diag(d, 0) Qᴴ, singular positive semidefinite
      Matrix p = oracle::random_positive(g, r, m->scalar, 0.5, 2.0);
      const Matrix v = oracle::random_matrix(g, r, 1, m->scalar);
      p = p - v * (inverse(v.adjoint() * inverse(p) * v)) * v.adjoint();
      const ChartCoord cx{x}, cy{x + (p + p.adjoint()) * 0.5};
      ASSERT_EQ(future_membership(*m, cx, cy), CausalRelation::Lightcone);
      EXPECT_FALSE(transverse(chart_point(m, cx), chart_point(m, cy))) << id;
    }
  }
}

TEST(FutureMembership, MinkowskiAgreesWithPairing) {
  // b(chart v, chart w) = −ψ(v − w)/2; the future of v is ψ(w − v) < 0 with (w − v)_n > 0
  std::mt19937_64 g(3);
  std::normal_distribution<double> n(0.0, 1.0);
  const auto m = model_from_id("so42");
  for (int t = 0; t < 10000; ++t) {
    std::vector<double> v(4), w(4);
    for (auto& e : v) e = n(g);
    for (auto& e : w) e = n(g);
    const ShilovPoint pv = chart_point(m, minkowski_coord(v)), pw = chart_point(m, minkowski_coord(w));
    const double b = lightcone_pairing(*m, pv.frame(), pw.frame());
    const double dt = w[3] - v[3];
    const bool future_ref = b > 1e-9 && dt > 0;
    const bool past_ref = b > 1e-9 && dt < 0;
    const auto rel = future_membership(*m, minkowski_coord(v), minkowski_coord(w));
    EXPECT_EQ(rel == CausalRelation::StrictFuture, future_ref);
    EXPECT_EQ(rel == CausalRelation::StrictPast, past_ref);
  }
}

TEST(Orbit, Examples) {
  const auto m = model_from_id("sp4");
  EXPECT_EQ(classify_orbit(*m, coord({1, 1})), (OrbitIndex{2, 0}));
  EXPECT_EQ(classify_orbit(*m, coord({1, -1})), (OrbitIndex{1, 1}));
  EXPECT_EQ(classify_orbit(*m, coord({0, 0})), (OrbitIndex{0, 0}));
}

TEST(Orbit, NegationReversesIndex) {
  std::mt19937_64 g(4);
  for (const char* id : kLagrangian) {
    const auto m = model_from_id(id);
    for (int t = 0; t < 200; ++t) {
      const Matrix x = oracle::random_hermitian(g, m->size, m->scalar);
      const auto a = classify_orbit(*m, {x}), b = classify_orbit(*m, {x * -1.0});
      EXPECT_EQ(a.plus, b.minus);
      EXPECT_EQ(a.minus, b.plus);
    }
  }
}

TEST(Orbit, OpenUnderSmallPerturbation) {
  for (const char* id : {"sp4", "su22", "sostar8"}) {
    const auto m = model_from_id(id);
    const int r = m->size;
    std::mt19937_64 g(5);
    int tested = 0;
    for (std::uint64_t s = 0; tested < 3400; ++s) {
      const int i = static_cast<int>(s % static_cast<std::uint64_t>(r + 1));
      const Matrix x = random_signature_matrix(r, i, m->scalar, mix_seed(6, s));
      const auto ev = oracle::eigs(x);
      double minabs = 1e300;
      for (double e : ev) minabs = std::min(minabs, std::abs(e));
      if (minabs <= 1e-3) continue;
      Matrix d = oracle::random_hermitian(g, r, m->scalar);
      d *= 1e-6 / d.norm();
      EXPECT_EQ(classify_orbit(*m, {x + d}), (OrbitIndex{i, r - i}));
      ++tested;
    }
  }
}

TEST(Diamond, Membership) {
  const auto m = model_from_id("sp4");
  const auto chart = standard_chart(m);
  const Diamond d = make_diamond(chart, coord({0, 0}), coord({1, 1}));
  EXPECT_TRUE(diamond_membership(d, coord({0.5, 0.5})));
  EXPECT_FALSE(diamond_membership(d, coord({0, 0})));
  EXPECT_TRUE(diamond_membership(d, coord({0, 0}), true));
  EXPECT_FALSE(diamond_membership(d, coord({1.5, 0.5})));
  EXPECT_EQ(code_of([&] { make_diamond(chart, coord({0, 0}), coord({1, -1})); }), ErrorCode::InvalidArgument);
}

TEST(Diamond, AgreesWithTwoFutureTests) {
  std::mt19937_64 g(7);
  for (const char* id : {"sp4", "su22", "sostar8"}) {
    const auto m = model_from_id(id);
    const auto chart = standard_chart(m);
    const Matrix x = oracle::random_hermitian(g, m->size, m->scalar);
    const Matrix y = x + oracle::random_positive(g, m->size, m->scalar, 1.0, 3.0);
    const Diamond d = make_diamond(chart, {x}, {y});
    for (int t = 0; t < 500; ++t) {
      const Matrix z = (x + y) * 0.5 + oracle::random_hermitian(g, m->size, m->scalar) * 0.8;
      const bool ref = oracle::min_eig(z - x) > 1e-9 && oracle::min_eig(y - z) > 1e-9;
      EXPECT_EQ(diamond_membership(d, {z}), ref);
    }
  }
}

TEST(Diamond, SamplesLieInside) {
  for (const char* id : {"sp4", "su22", "sostar8", "so42"}) {
    const auto m = model_from_id(id);
    const auto chart = standard_chart(m);
    ChartCoord x, y;
    if (m->lagrangian()) {
      x = coord(std::vector<double>(m->size, 0.0));
      x.value = x.value.retagged(m->scalar);
      y = hermitian_coord(Matrix::identity(m->size, m->scalar));
    } else {
      x = minkowski_coord(std::vector<double>{0, 0, 0, 0});
      y = minkowski_coord(std::vector<double>{0, 0, 0, 1});
    }
    const Diamond d = make_diamond(chart, x, y);
    for (std::uint64_t s = 0; s < 200; ++s)
      EXPECT_TRUE(diamond_membership(d, sample_in_diamond(*m, x.value, y.value, s))) << id;
  }
}

TEST(Hull, PairIsDiamond) {
  const auto m = model_from_id("sp4");
  const CausalHull h = causal_hull(m, {coord({0, 0}), coord({1, 1})});
  EXPECT_EQ(h.pairs().size(), 1u);
  EXPECT_TRUE(h.contains(diag({0.5, 0.5})));
  EXPECT_TRUE(h.contains(diag({0.2, 0.9})));
  EXPECT_FALSE(h.contains(diag({1.2, 0.5})));
}

TEST(Hull, Singleton) {
  const auto m = model_from_id("sp4");
  const CausalHull h = causal_hull(m, {coord({0.3, -0.2})});
  EXPECT_TRUE(h.pairs().empty());
  EXPECT_TRUE(h.contains(diag({0.3, -0.2})));
  EXPECT_FALSE(h.contains(diag({0.3, -0.1})));
}

TEST(Hull, AntichainIsJustThePoints) {
  const auto m = model_from_id("sp4");
  const CausalHull h = causal_hull(m, {coord({0, 0}), coord({1, -1})});
  EXPECT_TRUE(h.pairs().empty());
  EXPECT_FALSE(h.contains(diag({0.5, -0.5})));
  EXPECT_TRUE(h.contains(diag({1, -1})));
}

TEST(Hull, EmptyInput) {
  EXPECT_EQ(code_of([] { causal_hull(model_from_id("sp4"), {}); }), ErrorCode::EmptyInput);
}

TEST(Hull, MembershipMatchesUnionOfDiamonds) {
  std::mt19937_64 g(8);
  const auto m = model_from_id("sp4");
  std::vector<ChartCoord> pts;
  for (int k = 0; k < 6; ++k) pts.push_back({oracle::random_hermitian(g, 2, ScalarTag::Real) * 0.7});
  const CausalHull h = causal_hull(m, pts);
  for (int t = 0; t < 2000; ++t) {
    const Matrix z = oracle::random_hermitian(g, 2, ScalarTag::Real) * 0.7;
    bool ref = false;
    for (const auto& a : pts)
      for (const auto& b : pts)
        if (oracle::min_eig(b.value - a.value) >= 0 && oracle::min_eig(z - a.value) >= -1e-9 &&
            oracle::min_eig(b.value - z) >= -1e-9)
          ref = true;
    EXPECT_EQ(h.contains(z), ref);
  }
}

TEST(Hull, Idempotence) {
  std::mt19937_64 g(9);
  for (const char* id : {"sp4", "su22", "so42"}) {
    const auto m = model_from_id(id);
    std::vector<ChartCoord> pts;
    for (int k = 0; k < 6; ++k) {
      if (m->lagrangian()) {
        pts.push_back({oracle::random_hermitian(g, m->size, m->scalar) * 0.5});
      } else {
        std::normal_distribution<double> n(0.0, 0.5);
        pts.push_back(minkowski_coord(std::vector<double>{n(g), n(g), n(g), n(g)}));
      }
    }
    const IdempotenceReport rep = hull_idempotence_check(causal_hull(m, pts), 64, 1000, 10);
    EXPECT_EQ(rep.probes, 1000u);
    EXPECT_EQ(rep.disagreements, 0u) << id;
  }
}

TEST(ChartIndependence, SameChartAgrees) {
  const auto m = model_from_id("sp4");
  std::vector<ShilovPoint> pts;
  for (double t : {-0.5, 0.0, 0.4}) pts.push_back(chart_point(m, coord({t, t + 0.1})));
  const auto chart = standard_chart(m);
  const auto rep = chart_independence_check(pts, chart, chart, 1000, 11);
  EXPECT_EQ(rep.disagreements, 0u);
  EXPECT_EQ(rep.skipped, 0u);
  EXPECT_EQ(rep.agreements + rep.within_tol, 1000u);
}

TEST(ChartIndependence, DualChartAgrees) {
  std::mt19937_64 g(12);
  for (const char* id : {"sp4", "su22"}) {
    const auto m = model_from_id(id);
    std::vector<ShilovPoint> pts;
    for (int k = 0; k < 6; ++k) {
      Matrix h = oracle::random_hermitian(g, m->size, m->scalar);
      h *= 0.3 / spectral_norm(h);
      std::uniform_real_distribution<double> u(-0.6, 0.6);
      pts.push_back(chart_point(m, {h + Matrix::identity(m->size, m->scalar) * u(g)}));
    }
    // base −(I + P) lies in the interior of the dual of D_std
    const Matrix base = (Matrix::identity(m->size, m->scalar) + oracle::random_positive(g, m->size, m->scalar, 0.1, 0.5)) * -1.0;
    const auto rep = chart_independence_check(pts, standard_chart(m), make_chart(chart_point(m, {base})), 2000, 13);
    EXPECT_EQ(rep.disagreements, 0u) << id;
    EXPECT_GT(rep.agreements, 1000u) << id;
    EXPECT_GT(rep.inside_a, 0u) << id;
  }
}

TEST(ChartIndependence, PointOffChartRejected) {
  const auto m = model_from_id("sp4");
  const ShilovPoint p = chart_point(m, coord({1, 1}));
  EXPECT_EQ(code_of([&] { chart_independence_check({p}, standard_chart(m), make_chart(p), 10, 0); }),
            ErrorCode::PointsNotInBothCharts);
}

TEST(Chart, TransporterMapsInfinityToBase) {
  std::mt19937_64 g(14);
  for (const char* id : {"sp4", "su22", "sostar8", "so42"}) {
    const auto m = model_from_id(id);
    const ShilovPoint z = random_shilov_point(m, 15);
    const ChartedChart c = make_chart(z);
    EXPECT_LE(frame_distance(act(c.transporter, base_points(m).second), z), 1e-8) << id;
    // coordinates_in and point_from are inverse
    const ShilovPoint x = random_shilov_point(m, 16);
    const ShilovPoint back = point_from(c, coordinates_in(c, x));
    EXPECT_LE(frame_distance(back, x), 1e-8) << id;
  }
}

TEST(Sylvester, DiagonalExamples) {
  const auto m = model_from_id("sp4");
  EXPECT_EQ(signature(diag({1, -3}) + Matrix::identity(2)).pos, 1);
  EXPECT_EQ(signature(diag({1, -1}) + diag({0.5, 2})).pos, 2);
  EXPECT_EQ(classify_orbit(*m, coord({2, -2})), (OrbitIndex{1, 1}));
}

TEST(Sylvester, SignatureMatrixHasRequestedSignature) {
  for (auto tag : {ScalarTag::Real, ScalarTag::Complex, ScalarTag::Quaternion})
    for (int r = 1; r <= 4; ++r)
      for (int i = 0; i <= r; ++i) {
        const Matrix x = random_signature_matrix(r, i, tag, static_cast<std::uint64_t>(r * 10 + i));
        int pos = 0;
        for (double e : oracle::eigs(x)) pos += e > 0;
        EXPECT_EQ(pos, i);
      }
}

TEST(Sylvester, OrbitInclusionHolds) {
  for (const char* id : {"sp4", "su22", "sostar8"}) {
    const auto m = model_from_id(id);
    for (int i = 0; i <= m->size; ++i) {
      const auto rep = sylvester_orbit_check(m, i, 1000, 17);
      EXPECT_EQ(rep.trials, 1000u);
      EXPECT_EQ(rep.failures, 0u) << id << " i=" << i;
      std::size_t below = 0, total = 0;
      for (std::size_t k = 0; k < rep.histogram.size(); ++k) {
        total += rep.histogram[k];
        if (static_cast<int>(k) < i) below += rep.histogram[k];
      }
      EXPECT_EQ(total, 1000u);
      EXPECT_EQ(below, 0u);
      if (i == m->size) {
        EXPECT_EQ(rep.histogram[static_cast<std::size_t>(i)], 1000u);
      }
    }
  }
}

TEST(DiamondPreservation, TauImagesKeepStandardDiamond) {
  std::mt19937_64 g(18);
  for (const char* id : kLagrangian) {
    const auto m = model_from_id(id);
    std::vector<GroupElement> gs;
    for (int k = 0; k < 100; ++k) gs.push_back(tau_p(random_sl2(g), m));
    for (int k = 0; k < 25; ++k) {
      const ShilovPoint z = chart_point(m, {oracle::random_positive(g, m->size, m->scalar, 0.2, 5.0)});
      for (const auto& e : gs) {
        const ShilovPoint w = act(e, z);
        const Eigen::MatrixXcd x = oracle::chart_of(w.frame());
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es((x + x.adjoint()) / 2.0, Eigen::EigenvaluesOnly);
        ASSERT_GT(es.eigenvalues()(0), 1e-10) << id;
      }
    }
  }
}

TEST(DiamondPreservation, DualImpliesCausallyConvex) {
  // pairs inside D_std with a causal relation have their whole diamond inside D_std
  std::mt19937_64 g(19);
  for (const char* id : {"sp4", "su22", "sostar8"}) {
    const auto m = model_from_id(id);
    int related = 0;
    for (int t = 0; t < 3400; ++t) {
      const Matrix x = oracle::random_positive(g, m->size, m->scalar, 0.05, 2.0);
      const Matrix y = oracle::random_positive(g, m->size, m->scalar, 0.05, 4.0);
      if (future_membership(*m, {x}, {y}) != CausalRelation::StrictFuture) continue;
      ++related;
      const ChartCoord z = sample_in_diamond(*m, x, y, static_cast<std::uint64_t>(t));
      EXPECT_GT(oracle::min_eig(z.value), 0.0) << id;
    }
    EXPECT_GT(related, 100) << id;
  }
}

TEST(HullJson, ListsPairs) {
  const auto m = model_from_id("sp4");
  const nlohmann::json j = to_json(causal_hull(m, {coord({0, 0}), coord({1, 1})}));
  EXPECT_EQ(j["pairs"].size(), 1u);
}
