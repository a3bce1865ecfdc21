#include "causalflag/causalflag.h"

#include "causalflag/error.hpp"
#include "causalflag/experiments.hpp"
#include "causalflag/maslov.hpp"

#include <string>
#include <vector>

struct cf_model {
  causalflag::ModelPtr model;
};

struct cf_point {
  causalflag::ShilovPoint point;
};

struct cf_report {
  causalflag::Verdict verdict;
  std::string json;
  std::vector<std::string> table_names;
  std::vector<std::string> tables;
};

namespace {

thread_local std::string last_error;
thread_local std::string help_text;

cf_status fail(cf_status s, const std::string& msg) {
  last_error = msg;
  return s;
}

// Runs f, translating exceptions into a status and the thread-local message.
template <class F>
cf_status guarded(F&& f) {
  try {
    f();
    last_error.clear();
    return CF_OK;
  } catch (const causalflag::Error& e) {
    return fail(static_cast<cf_status>(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(CF_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(CF_INTERNAL, e.what());
  }
}

causalflag::Matrix real_matrix(const double* data, int rows, int cols) {
  if (!data || rows <= 0 || cols <= 0) throw causalflag::Error(causalflag::ErrorCode::InvalidArgument, "bad matrix");
  causalflag::Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = data[i * cols + j];
  return m;
}

}  // namespace

extern "C" {

const char* cf_version(void) { return "0.1.0"; }

const char* cf_status_name(cf_status s) {
  if (s == CF_OK) return "Ok";
  if (s == CF_INTERNAL) return "Internal";
  if (s < CF_INVALID_ARGUMENT || s > CF_IO) return "Unknown";
  return causalflag::error_name(static_cast<causalflag::ErrorCode>(s));
}

const char* cf_last_error(void) { return last_error.c_str(); }

cf_status cf_model_new(const char* id, cf_model** out) {
  if (!id || !out) return fail(CF_INVALID_ARGUMENT, "null argument");
  return guarded([&] { *out = new cf_model{causalflag::model_from_id(id)}; });
}

void cf_model_free(cf_model* m) { delete m; }

int cf_model_rank(const cf_model* m) { return m ? m->model->rank() : 0; }

int cf_model_dim(const cf_model* m) { return m ? m->model->dim() : 0; }

cf_status cf_point_from_frame(const cf_model* m, const double* data, int rows, int cols, cf_point** out) {
  if (!m || !out) return fail(CF_INVALID_ARGUMENT, "null argument");
  return guarded([&] { *out = new cf_point{causalflag::ShilovPoint(m->model, real_matrix(data, rows, cols))}; });
}

cf_status cf_point_from_chart(const cf_model* m, const double* data, int rows, int cols, cf_point** out) {
  if (!m || !out) return fail(CF_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    const auto x = real_matrix(data, rows, cols);
    causalflag::ChartCoord c{x.retagged(m->model->scalar)};
    *out = new cf_point{causalflag::chart_point(m->model, c)};
  });
}

cf_status cf_point_base(const cf_model* m, int which, cf_point** out) {
  if (!m || !out || (which != 1 && which != -1)) return fail(CF_INVALID_ARGUMENT, "bad argument");
  return guarded([&] {
    auto [pp, pm] = causalflag::base_points(m->model);
    *out = new cf_point{which == 1 ? pp : pm};
  });
}

void cf_point_free(cf_point* p) { delete p; }

cf_status cf_transversality_margin(const cf_point* a, const cf_point* b, double* out) {
  if (!a || !b || !out) return fail(CF_INVALID_ARGUMENT, "null argument");
  return guarded([&] { *out = causalflag::transversality_margin(a->point, b->point); });
}

cf_status cf_maslov_index(const cf_point* a, const cf_point* b, const cf_point* c, int* idx_out, int* i_out) {
  if (!a || !b || !c || !idx_out) return fail(CF_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    const auto t = causalflag::maslov_index(a->point, b->point, c->point);
    *idx_out = t.idx;
    if (i_out) *i_out = t.i;
  });
}

size_t cf_command_count(void) { return causalflag::experiment_commands().size(); }

const char* cf_command_name(size_t i) {
  const auto& c = causalflag::experiment_commands();
  return i < c.size() ? c[i].c_str() : nullptr;
}

cf_status cf_command_help(const char* command, const char** out) {
  if (!command || !out) return fail(CF_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    help_text = causalflag::experiment_help(command);
    *out = help_text.c_str();
  });
}

cf_status cf_run(const char* config_json, cf_report** out) {
  if (!config_json || !out) return fail(CF_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    nlohmann::json cfg;
    try {
      cfg = nlohmann::json::parse(config_json);
    } catch (const nlohmann::json::exception& e) {
      throw causalflag::Error(causalflag::ErrorCode::Parse, e.what());
    }
    auto res = causalflag::run_experiment(cfg);
    auto r = std::make_unique<cf_report>();
    r->verdict = res.verdict;
    r->json = causalflag::render_json(res.report);
    for (const auto& t : res.tables) {
      r->table_names.push_back(t.name);
      r->tables.push_back(causalflag::render_csv(t));
    }
    *out = r.release();
  });
}

void cf_report_free(cf_report* r) { delete r; }

cf_verdict cf_report_verdict(const cf_report* r) {
  return r && r->verdict == causalflag::Verdict::Pass ? CF_PASS : CF_VIOLATION;
}

const char* cf_report_json(const cf_report* r) { return r ? r->json.c_str() : nullptr; }

size_t cf_report_table_count(const cf_report* r) { return r ? r->tables.size() : 0; }

const char* cf_report_table_name(const cf_report* r, size_t i) {
  return r && i < r->table_names.size() ? r->table_names[i].c_str() : nullptr;
}

const char* cf_report_table_csv(const cf_report* r, size_t i) {
  return r && i < r->tables.size() ? r->tables[i].c_str() : nullptr;
}

}  // extern "C"
