#include "causalflag/error.hpp"
#include "causalflag/maslov.hpp"
#include "causalflag/random.hpp"
#include "causalflag/shilov.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace causalflag;

namespace {

const char* kLagrangian[] = {"sp4", "su22", "sostar8", "sp8"};
const char* kFamilies[] = {"sp4", "su22", "sostar8", "so42"};

template <class F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return static_cast<ErrorCode>(0);
}

// Random chart coordinate: Hermitian matrix, or Minkowski vector.
ChartCoord random_coord(std::mt19937_64& g, const GroupModel& m, double scale = 1.0) {
  if (m.lagrangian()) return hermitian_coord(oracle::random_hermitian(g, m.size, m.scalar) * scale);
  std::normal_distribution<double> n(0.0, scale);
  std::vector<double> v(static_cast<std::size_t>(m.size));
  for (auto& x : v) x = n(g);
  return minkowski_coord(v);
}

}  // namespace

TEST(BasePoints, StandardFrames) {
  const auto m = model_from_id("sp4");
  const auto [pp, pm] = base_points(m);
  Matrix top(4, 2), bot(4, 2);
  top(0, 0) = top(1, 1) = 1;
  bot(2, 0) = bot(3, 1) = 1;
  EXPECT_LE((pp.frame() - top).norm(), 0.0);
  EXPECT_LE((pm.frame() - bot).norm(), 0.0);
  EXPECT_LE(pp.isotropy_defect(), 1e-15);
  EXPECT_LE(pm.isotropy_defect(), 1e-15);
  EXPECT_TRUE(transverse(pp, pm));
}

TEST(BasePoints, AllFamiliesIsotropicAndTransverse) {
  for (const char* id : kFamilies) {
    const auto [pp, pm] = base_points(model_from_id(id));
    EXPECT_LE(pp.isotropy_defect(), 1e-15) << id;
    EXPECT_LE(pm.isotropy_defect(), 1e-15) << id;
    EXPECT_TRUE(transverse(pp, pm)) << id;
    EXPECT_FALSE(transverse(pp, pp)) << id;
  }
}

TEST(ShilovPoint, RejectsNonIsotropicFrame) {
  const auto m = model_from_id("sp4");
  Matrix f(4, 2);
  f(0, 0) = 1;
  f(2, 1) = 1;  // span(e1, e3): ω(e1, e3) ≠ 0
  EXPECT_EQ(code_of([&] { ShilovPoint(m, f); }), ErrorCode::DegenerateFrame);
}

TEST(ShilovPoint, RejectsRankDeficientFrame) {
  const auto m = model_from_id("sp4");
  Matrix f(4, 2);
  f(0, 0) = 1;
  f(0, 1) = 2;
  EXPECT_EQ(code_of([&] { ShilovPoint(m, f); }), ErrorCode::DegenerateFrame);
  EXPECT_EQ(code_of([&] { ShilovPoint(m, Matrix(4, 3)); }), ErrorCode::ModelMismatch);
}

TEST(ShilovPoint, RepresentativeIndependence) {
  std::mt19937_64 g(1);
  for (const char* id : kLagrangian) {
    const auto m = model_from_id(id);
    const ShilovPoint x = chart_point(m, random_coord(g, *m));
    Matrix mix = oracle::random_matrix(g, m->size, m->size, m->scalar);
    mix = mix + Matrix::identity(m->size, m->scalar) * 3.0;
    const ShilovPoint y(m, x.frame() * mix);
    EXPECT_TRUE(same_point(x, y)) << id;
    EXPECT_LE((x.canonical_form() - y.canonical_form()).norm(), 1e-10) << id;
  }
}

TEST(ShilovPoint, LineScalingIndependence) {
  std::mt19937_64 g(2);
  const auto m = model_from_id("so42");
  const ShilovPoint x = chart_point(m, random_coord(g, *m));
  const ShilovPoint y(m, x.frame() * -2.5);
  EXPECT_TRUE(same_point(x, y));
  EXPECT_LE((x.canonical_form() - y.canonical_form()).norm(), 1e-12);
}

TEST(Transverse, ChartPointAgainstBase) {
  // det[[I, I], [0, X]] = det X
  const auto m = model_from_id("sp4");
  const auto [pp, pm] = base_points(m);
  const Matrix x = Matrix::diagonal(std::vector<double>{2.0, -0.5});
  double margin = 0;
  EXPECT_TRUE(transverse(pp, chart_point(m, hermitian_coord(x)), &margin));
  EXPECT_GT(margin, 0.0);
  const Matrix sing = Matrix::diagonal(std::vector<double>{2.0, 0.0});
  EXPECT_FALSE(transverse(pp, chart_point(m, hermitian_coord(sing))));
  EXPECT_TRUE(transverse(pm, chart_point(m, hermitian_coord(sing))));
}

TEST(Transverse, MarginMatchesReference) {
  std::mt19937_64 g(3);
  for (const char* id : kLagrangian) {
    const auto m = model_from_id(id);
    for (int t = 0; t < 100; ++t) {
      const ShilovPoint x = chart_point(m, random_coord(g, *m)), y = chart_point(m, random_coord(g, *m));
      const double ref = oracle::transversality(x.frame(), y.frame(), m->scalar);
      EXPECT_NEAR(transversality_margin(x, y), ref, 1e-10) << id;
    }
  }
}

TEST(Transverse, LightconeMarginIsNormalizedPairing) {
  std::mt19937_64 g(4);
  const auto m = model_from_id("so42");
  for (int t = 0; t < 100; ++t) {
    const ShilovPoint x = chart_point(m, random_coord(g, *m)), y = chart_point(m, random_coord(g, *m));
    const Matrix& u = x.frame();
    const Matrix& v = y.frame();
    const double ref = std::abs(lightcone_pairing(*m, u, v)) / (u.norm() * v.norm());
    EXPECT_NEAR(transversality_margin(x, y), ref, 1e-14);
  }
}

TEST(Transverse, Symmetric) {
  for (const char* id : kFamilies) {
    const auto m = model_from_id(id);
    for (std::uint64_t s = 0; s < 2500; ++s) {
      const ShilovPoint x = random_shilov_point(m, mix_seed(5, s)), y = random_shilov_point(m, mix_seed(6, s));
      double a = 0, b = 0;
      ASSERT_EQ(transverse(x, y, &a), transverse(y, x, &b));
      EXPECT_NEAR(a, b, 1e-12);
    }
  }
}

TEST(Transverse, GroupInvariant) {
  for (const char* id : kFamilies) {
    const auto m = model_from_id(id);
    int flagged = 0;
    for (std::uint64_t s = 0; s < 500; ++s) {
      const ShilovPoint x = random_shilov_point(m, mix_seed(7, s)), y = random_shilov_point(m, mix_seed(8, s));
      const GroupElement g = random_bounded_element(m, mix_seed(9, s), 100.0);
      double a = 0, b = 0;
      const bool t1 = transverse(x, y, &a), t2 = transverse(act(g, x), act(g, y), &b);
      // near the threshold the predicate may legitimately flip
      if (std::min(a, b) < 10 * kTransverseTol) {
        ++flagged;
        continue;
      }
      EXPECT_EQ(t1, t2) << id;
      const auto sv = singular_values(g.matrix());
      const double cond = sv.front() / sv.back();
      const double k = m->lagrangian() ? std::pow(cond, 2.0 * m->size) : cond * cond;
      EXPECT_LE(b, a * k * (1 + 1e-9)) << id;
      EXPECT_GE(b, a / k * (1 - 1e-9)) << id;
    }
    EXPECT_LT(flagged, 50) << id;
  }
}

TEST(Transverse, ModelMismatch) {
  const auto a = base_points(model_from_id("sp4")).first;
  const auto b = base_points(model_from_id("su22")).second;
  EXPECT_EQ(code_of([&] { transverse(a, b); }), ErrorCode::ModelMismatch);
}

TEST(Chart, ZeroIsBasePoint) {
  for (const char* id : kFamilies) {
    const auto m = model_from_id(id);
    const ChartCoord zero =
        m->lagrangian() ? hermitian_coord(Matrix::zeros(m->size, m->size, m->scalar)) : minkowski_coord(std::vector<double>(m->size, 0.0));
    EXPECT_TRUE(same_point(chart_point(m, zero), base_points(m).first)) << id;
    EXPECT_LE(chart_coordinates(base_points(m).first).value.norm(), 0.0) << id;
  }
}

TEST(Chart, FrameOfChartPoint) {
  std::mt19937_64 g(10);
  const auto m = model_from_id("sp4");
  const Matrix x = oracle::random_hermitian(g, 2, ScalarTag::Real);
  const ShilovPoint p = chart_point(m, hermitian_coord(x));
  EXPECT_LE((p.frame() - vstack(Matrix::identity(2), x)).norm(), 1e-15);
  // [I; X]ᵀ J [I; X] = X − Xᵀ
  EXPECT_LE(p.isotropy_defect(), 1e-12);
  EXPECT_LE((chart_coordinates(ShilovPoint(m, vstack(Matrix::identity(2), x))).value - x).norm(), 1e-14);
}

TEST(Chart, RoundTrip) {
  std::mt19937_64 g(11);
  for (const char* id : kFamilies) {
    const auto m = model_from_id(id);
    double worst = 0;
    for (int t = 0; t < 2500; ++t) {
      const ChartCoord x = random_coord(g, *m);
      const Matrix back = chart_coordinates(chart_point(m, x)).value;
      worst = std::max(worst, (back - x.value).norm() / std::max(1.0, x.value.norm()));
    }
    EXPECT_LE(worst, 1e-10) << id;
  }
}

TEST(Chart, ImageOfBaseIsHermitian) {
  for (const char* id : kLagrangian) {
    const auto m = model_from_id(id);
    for (std::uint64_t s = 0; s < 100; ++s) {
      const ShilovPoint x = random_shilov_point(m, mix_seed(12, s));
      if (transversality_margin(x, base_points(m).second) < 1e-3) continue;
      const Matrix c = chart_coordinates(x).value;
      EXPECT_LE(hermitian_defect(c), 1e-8) << id;
      const Eigen::MatrixXcd ref = oracle::chart_of(x.frame());
      EXPECT_LE((c.to_complex() - ref).norm(), 1e-8 * (1 + ref.norm())) << id;
    }
  }
}

TEST(Chart, NotInChartAtInfinity) {
  for (const char* id : kFamilies) {
    const auto m = model_from_id(id);
    EXPECT_EQ(code_of([&] { chart_coordinates(base_points(m).second); }), ErrorCode::NotInChart) << id;
  }
}

TEST(Standardize, BasePairIsFixed) {
  for (const char* id : kFamilies) {
    const auto m = model_from_id(id);
    const auto [pp, pm] = base_points(m);
    const GroupElement s = standardize_pair(pp, pm);
    EXPECT_TRUE(same_point(act(s, pp), pp)) << id;
    EXPECT_TRUE(same_point(act(s, pm), pm)) << id;
  }
}

TEST(Standardize, ResidualsAllFamilies) {
  for (const char* id : {"sp2", "sp4", "sp8", "su22", "sostar8", "so32", "so42"}) {
    const auto m = model_from_id(id);
    const auto [pp, pm] = base_points(m);
    for (std::uint64_t s = 0; s < 200; ++s) {
      const ShilovPoint a = random_shilov_point(m, mix_seed(13, s)), c = random_shilov_point(m, mix_seed(14, s));
      if (transversality_margin(a, c) < 1e-4) continue;
      const GroupElement g = standardize_pair(a, c);
      EXPECT_LE(g.form_defect(), 1e-8) << id;
      EXPECT_LE(frame_distance(act(g, a), pp), 1e-8) << id;
      EXPECT_LE(frame_distance(act(g, c), pm), 1e-8) << id;
    }
  }
}

TEST(Standardize, Equivariance) {
  // S·g fixes both base points
  for (const char* id : kFamilies) {
    const auto m = model_from_id(id);
    const auto [pp, pm] = base_points(m);
    for (std::uint64_t s = 0; s < 50; ++s) {
      const GroupElement g = random_group_element(m, mix_seed(15, s));
      const GroupElement sg = standardize_pair(act(g, pp), act(g, pm)) * g;
      EXPECT_LE(frame_distance(act(sg, pp), pp), 1e-8) << id;
      EXPECT_LE(frame_distance(act(sg, pm), pm), 1e-8) << id;
    }
  }
}

TEST(Standardize, NotTransverse) {
  for (const char* id : kFamilies) {
    const auto pp = base_points(model_from_id(id)).first;
    EXPECT_EQ(code_of([&] { standardize_pair(pp, pp); }), ErrorCode::NotTransverse) << id;
  }
}

TEST(ShilovJson, RoundTrip) {
  std::mt19937_64 g(16);
  for (const char* id : kFamilies) {
    const auto m = model_from_id(id);
    const ShilovPoint x = chart_point(m, random_coord(g, *m));
    const ShilovPoint y = shilov_point_from_json(nlohmann::json::parse(to_json(x).dump()));
    EXPECT_EQ(y.model()->id, m->id);
    EXPECT_LE((y.frame() - x.frame()).norm(), 0.0);
  }
}
