#include "causalflag/causalflag.h"

#include <gtest/gtest.h>

#include <cstring>
#include <string>

namespace {

struct Model {
  cf_model* m = nullptr;
  explicit Model(const char* id) { EXPECT_EQ(cf_model_new(id, &m), CF_OK); }
  ~Model() { cf_model_free(m); }
};

struct Point {
  cf_point* p = nullptr;
  ~Point() { cf_point_free(p); }
};

struct Report {
  cf_report* r = nullptr;
  ~Report() { cf_report_free(r); }
};

}  // namespace

TEST(CApi, Version) { EXPECT_STREQ(cf_version(), "0.1.0"); }

TEST(CApi, StatusNames) {
  EXPECT_STREQ(cf_status_name(CF_OK), "Ok");
  EXPECT_STREQ(cf_status_name(CF_NOT_IN_CHART), "NotInChart");
  EXPECT_STRNE(cf_status_name(CF_NOT_TRANSVERSE), "");
  EXPECT_STRNE(cf_status_name(CF_INTERNAL), "");
}

TEST(CApi, ModelShape) {
  Model sp4("sp4"), so42("so42"), sostar("sostar8");
  EXPECT_EQ(cf_model_rank(sp4.m), 2);
  EXPECT_EQ(cf_model_dim(sp4.m), 4);
  EXPECT_EQ(cf_model_rank(so42.m), 2);
  EXPECT_EQ(cf_model_dim(so42.m), 6);
  EXPECT_EQ(cf_model_rank(sostar.m), 2);
}

TEST(CApi, UnknownModel) {
  cf_model* m = nullptr;
  EXPECT_EQ(cf_model_new("sp5", &m), CF_UNKNOWN_PRESET);
  EXPECT_EQ(m, nullptr);
  EXPECT_GT(std::strlen(cf_last_error()), 0u);
  EXPECT_EQ(cf_model_new(nullptr, &m), CF_INVALID_ARGUMENT);
}

TEST(CApi, LastErrorClearsOnSuccess) {
  cf_model* m = nullptr;
  ASSERT_NE(cf_model_new("bogus", &m), CF_OK);
  Model ok("sp4");
  EXPECT_STREQ(cf_last_error(), "");
}

TEST(CApi, NullHandlesRejected) {
  double margin = 0;
  EXPECT_EQ(cf_transversality_margin(nullptr, nullptr, &margin), CF_INVALID_ARGUMENT);
  cf_model_free(nullptr);
  cf_point_free(nullptr);
  cf_report_free(nullptr);
}

TEST(CApi, BasePointsAreTransverse) {
  Model sp4("sp4");
  Point p, q;
  ASSERT_EQ(cf_point_base(sp4.m, 1, &p.p), CF_OK);
  ASSERT_EQ(cf_point_base(sp4.m, -1, &q.p), CF_OK);
  double margin = 0;
  ASSERT_EQ(cf_transversality_margin(p.p, q.p, &margin), CF_OK);
  EXPECT_NEAR(margin, 1.0, 1e-14);
  ASSERT_EQ(cf_transversality_margin(p.p, p.p, &margin), CF_OK);
  EXPECT_NEAR(margin, 0.0, 1e-14);
  cf_point* bad = nullptr;
  EXPECT_EQ(cf_point_base(sp4.m, 0, &bad), CF_INVALID_ARGUMENT);
}

TEST(CApi, MaslovOfChartTriple) {
  Model sp4("sp4");
  Point a, b, c, d;
  ASSERT_EQ(cf_point_base(sp4.m, 1, &a.p), CF_OK);
  ASSERT_EQ(cf_point_base(sp4.m, -1, &c.p), CF_OK);
  const double x[] = {1, 0, 0, -1};
  ASSERT_EQ(cf_point_from_chart(sp4.m, x, 2, 2, &b.p), CF_OK);
  int idx = -1, i = -1;
  ASSERT_EQ(cf_maslov_index(a.p, b.p, c.p, &idx, &i), CF_OK);
  EXPECT_EQ(idx, 0);
  EXPECT_EQ(i, 1);
  const double y[] = {2, 0.5, 0.5, 1};
  ASSERT_EQ(cf_point_from_chart(sp4.m, y, 2, 2, &d.p), CF_OK);
  ASSERT_EQ(cf_maslov_index(a.p, d.p, c.p, &idx, nullptr), CF_OK);
  EXPECT_EQ(idx, 2);
  EXPECT_EQ(cf_maslov_index(a.p, a.p, c.p, &idx, nullptr), CF_NOT_PAIRWISE_TRANSVERSE);
}

TEST(CApi, FrameErrors) {
  Model sp4("sp4");
  Point p;
  // columns e1, e3 span a non-isotropic plane
  const double f[] = {1, 0, 0, 0, 0, 1, 0, 0};
  EXPECT_EQ(cf_point_from_frame(sp4.m, f, 4, 2, &p.p), CF_DEGENERATE_FRAME);
  EXPECT_EQ(p.p, nullptr);
  const double g[] = {1, 0, 0, 1, 0, 0, 0, 0};
  EXPECT_EQ(cf_point_from_frame(sp4.m, g, 4, 2, &p.p), CF_OK);
  const double ns[] = {1, 2, 0, 1};
  Point q;
  EXPECT_EQ(cf_point_from_chart(sp4.m, ns, 2, 2, &q.p), CF_NOT_HERMITIAN);
  EXPECT_EQ(cf_point_from_frame(sp4.m, g, 3, 2, &q.p), CF_MODEL_MISMATCH);
}

TEST(CApi, MixedModels) {
  Model sp4("sp4"), so42("so42");
  Point a, b;
  ASSERT_EQ(cf_point_base(sp4.m, 1, &a.p), CF_OK);
  ASSERT_EQ(cf_point_base(so42.m, -1, &b.p), CF_OK);
  double margin = 0;
  EXPECT_EQ(cf_transversality_margin(a.p, b.p, &margin), CF_MODEL_MISMATCH);
}

TEST(CApi, MinkowskiChart) {
  Model so42("so42");
  Point p, x;
  ASSERT_EQ(cf_point_base(so42.m, 1, &p.p), CF_OK);
  const double v[] = {0.6, 0.8, 0.0, 1.0};
  ASSERT_EQ(cf_point_from_chart(so42.m, v, 4, 1, &x.p), CF_OK);
  double margin = 1;
  ASSERT_EQ(cf_transversality_margin(p.p, x.p, &margin), CF_OK);
  EXPECT_LE(margin, 1e-12);
}

TEST(CApi, Commands) {
  ASSERT_EQ(cf_command_count(), 15u);
  bool saw_maslov = false;
  for (size_t k = 0; k < cf_command_count(); ++k) {
    const char* help = nullptr;
    ASSERT_EQ(cf_command_help(cf_command_name(k), &help), CF_OK);
    EXPECT_NE(std::string(help).find(cf_command_name(k)), std::string::npos);
    saw_maslov = saw_maslov || std::string(cf_command_name(k)) == "maslov";
  }
  EXPECT_TRUE(saw_maslov);
  EXPECT_EQ(cf_command_name(99), nullptr);
  const char* help = nullptr;
  EXPECT_EQ(cf_command_help("nope", &help), CF_INVALID_ARGUMENT);
}

TEST(CApi, RunMaslov) {
  Report r;
  ASSERT_EQ(cf_run(R"({"command":"maslov","model":"sp4","triple":["p+",[[1,0],[0,-1]],"p-"]})", &r.r), CF_OK);
  EXPECT_EQ(cf_report_verdict(r.r), CF_PASS);
  const std::string json = cf_report_json(r.r);
  EXPECT_NE(json.find("\"idx\": 0"), std::string::npos) << json;
  EXPECT_NE(json.find("\"status\": \"PASS\""), std::string::npos);
}

TEST(CApi, RunTables) {
  Report r;
  ASSERT_EQ(cf_run(R"({"command":"sylvester-check","model":"sp4","trials":50})", &r.r), CF_OK);
  EXPECT_EQ(cf_report_verdict(r.r), CF_PASS);
  ASSERT_GT(cf_report_table_count(r.r), 0u);
  EXPECT_GT(std::strlen(cf_report_table_name(r.r, 0)), 0u);
  const std::string csv = cf_report_table_csv(r.r, 0);
  EXPECT_NE(csv.find('\n'), std::string::npos);
  EXPECT_EQ(cf_report_table_name(r.r, 1000), nullptr);
}

TEST(CApi, RunViolationStillReports) {
  Report r;
  ASSERT_EQ(cf_run(R"({"command":"maslov","model":"sp4","triple":[{"frame":[[1,0],[0,0],[0,1],[0,0]]},"p+","p-"]})",
                   &r.r),
            CF_OK);
  EXPECT_EQ(cf_report_verdict(r.r), CF_VIOLATION);
  EXPECT_NE(std::string(cf_report_json(r.r)).find("DegenerateFrame"), std::string::npos);
}

TEST(CApi, RunErrors) {
  Report r;
  EXPECT_EQ(cf_run("{not json", &r.r), CF_PARSE);
  EXPECT_EQ(r.r, nullptr);
  EXPECT_EQ(cf_run(R"({"command":"maslov","model":"sp4","bogus":1})", &r.r), CF_INVALID_ARGUMENT);
  EXPECT_NE(std::string(cf_last_error()).find("bogus"), std::string::npos);
  EXPECT_EQ(cf_run(R"({"command":"rep-build","rep":"nope"})", &r.r), CF_UNKNOWN_PRESET);
  EXPECT_EQ(cf_run(R"({"command":"frobnicate"})", &r.r), CF_INVALID_ARGUMENT);
}
