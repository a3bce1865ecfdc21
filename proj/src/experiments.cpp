#include "causalflag/experiments.hpp"

#include "causalflag/einstein.hpp"
#include "causalflag/error.hpp"
#include "causalflag/random.hpp"
#include "causalflag/reps.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

namespace causalflag {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

using json = nlohmann::json;

void render(const ordered_json& j, int depth, std::string& out) {
  const std::string pad(static_cast<std::size_t>(2 * (depth + 1)), ' ');
  const std::string close(static_cast<std::size_t>(2 * depth), ' ');
  switch (j.type()) {
    case ordered_json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ",\n";
        first = false;
        out += pad + ordered_json(it.key()).dump() + ": ";
        render(it.value(), depth + 1, out);
      }
      out += "\n" + close + "}";
      return;
    }
    case ordered_json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      // flat numeric arrays stay on one line
      const bool flat = std::all_of(j.begin(), j.end(), [](const ordered_json& e) { return e.is_primitive(); });
      out += flat ? "[" : "[\n";
      bool first = true;
      for (const auto& e : j) {
        if (!first) out += flat ? ", " : ",\n";
        first = false;
        if (!flat) out += pad;
        render(e, depth + 1, out);
      }
      out += flat ? "]" : "\n" + close + "]";
      return;
    }
    case ordered_json::value_t::number_float: {
      const double v = j.get<double>();
      out += std::isfinite(v) ? format_double(v) : "null";
      return;
    }
    default:
      out += j.dump();
  }
}

ordered_json ordered(const json& j) {
  if (j.is_object()) {
    ordered_json o = ordered_json::object();
    for (auto it = j.begin(); it != j.end(); ++it) o[it.key()] = ordered(it.value());
    return o;
  }
  if (j.is_array()) {
    ordered_json a = ordered_json::array();
    for (const auto& e : j) a.push_back(ordered(e));
    return a;
  }
  return ordered_json::parse(j.dump());
}

bool is_violation(ErrorCode c) {
  switch (c) {
    case ErrorCode::InvalidArgument:
    case ErrorCode::ModelMismatch:
    case ErrorCode::UnknownPreset:
    case ErrorCode::NonConvergence:
    case ErrorCode::BallTooLarge:
    case ErrorCode::Parse:
    case ErrorCode::Io:
      return false;
    default:
      return true;
  }
}

// ---------------------------------------------------------------- config

struct CommandSpec;

class Config {
public:
  Config(const json& raw, const CommandSpec& spec);

  const json& at(const std::string& key) const { return values_.at(key); }
  bool given(const std::string& key) const { return !values_.at(key).is_null(); }
  std::string str(const std::string& key) const;
  long long integer(const std::string& key, long long lo, long long hi) const;
  std::uint64_t seed() const { return seed_; }
  double tol(const std::string& key) const { return tolerances_.at(key); }
  /// Effective parameters (without output paths) for the report.
  ordered_json echo() const;

private:
  std::map<std::string, json> values_;
  std::vector<std::string> order_;
  std::map<std::string, double> tolerances_;
  std::uint64_t seed_ = 0;
};

using Runner = std::function<ExperimentResult(const Config&)>;

struct CommandSpec {
  std::string name;
  std::string summary;
  std::vector<std::pair<std::string, json>> params;
  std::vector<std::pair<std::string, double>> tolerances;
  Runner run;
};

// Keys accepted by every command; out and csv are consumed by the CLI.
const std::set<std::string> kCommonKeys{"command", "seed", "tolerances", "out", "csv"};

Config::Config(const json& raw, const CommandSpec& spec) {
  if (!raw.is_object()) throw Error(ErrorCode::InvalidArgument, "config must be a JSON object");
  for (auto it = raw.begin(); it != raw.end(); ++it) {
    const bool known = kCommonKeys.count(it.key()) ||
                       std::any_of(spec.params.begin(), spec.params.end(),
                                   [&](const auto& p) { return p.first == it.key(); });
    if (!known) throw Error(ErrorCode::InvalidArgument, "unknown key '" + it.key() + "' for " + spec.name);
  }
  for (const auto& [k, def] : spec.params) {
    values_[k] = raw.contains(k) ? raw.at(k) : def;
    order_.push_back(k);
  }
  if (raw.contains("seed") && !raw.at("seed").is_null()) {
    const auto& s = raw.at("seed");
    if (!s.is_number_integer() || (s.is_number_integer() && !s.is_number_unsigned() && s.get<long long>() < 0))
      throw Error(ErrorCode::InvalidArgument, "seed must be a nonnegative integer");
    seed_ = s.get<std::uint64_t>();
  }
  for (const auto& [k, def] : spec.tolerances) tolerances_[k] = def;
  if (raw.contains("tolerances") && !raw.at("tolerances").is_null()) {
    const auto& t = raw.at("tolerances");
    if (!t.is_object()) throw Error(ErrorCode::InvalidArgument, "tolerances must be an object");
    for (auto it = t.begin(); it != t.end(); ++it) {
      if (!tolerances_.count(it.key()))
        throw Error(ErrorCode::InvalidArgument, "unknown tolerance '" + it.key() + "' for " + spec.name);
      if (!it.value().is_number()) throw Error(ErrorCode::InvalidArgument, "tolerance must be a number");
      const double v = it.value().get<double>();
      if (!(v >= 1e-14 && v <= 1e-3))
        throw Error(ErrorCode::InvalidArgument, "tolerance '" + it.key() + "' outside [1e-14, 1e-3]");
      tolerances_[it.key()] = v;
    }
  }
}

std::string Config::str(const std::string& key) const {
  const auto& v = at(key);
  if (!v.is_string()) throw Error(ErrorCode::InvalidArgument, key + " must be a string");
  return v.get<std::string>();
}

long long Config::integer(const std::string& key, long long lo, long long hi) const {
  const auto& v = at(key);
  if (!v.is_number_integer()) throw Error(ErrorCode::InvalidArgument, key + " must be an integer");
  const long long x = v.get<long long>();
  if (x < lo || x > hi)
    throw Error(ErrorCode::InvalidArgument,
                key + " must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  return x;
}

ordered_json Config::echo() const {
  ordered_json o = ordered_json::object();
  o["seed"] = seed_;
  for (const auto& k : order_) o[k] = ordered(values_.at(k));
  if (!tolerances_.empty()) {
    ordered_json t = ordered_json::object();
    for (const auto& [k, v] : tolerances_) t[k] = v;
    o["tolerances"] = t;
  }
  return o;
}

// ---------------------------------------------------------------- input parsing

Matrix parse_matrix(const json& j) {
  if (j.is_object()) return matrix_from_json(j);
  if (!j.is_array() || j.empty()) throw Error(ErrorCode::Parse, "matrix must be a tagged object or a nonempty array");
  if (j[0].is_number()) {
    Matrix m(static_cast<int>(j.size()), 1);
    for (std::size_t i = 0; i < j.size(); ++i) m(static_cast<int>(i), 0) = j[i].get<double>();
    return m;
  }
  const std::size_t rows = j.size(), cols = j[0].size();
  Matrix m(static_cast<int>(rows), static_cast<int>(cols));
  for (std::size_t i = 0; i < rows; ++i) {
    if (!j[i].is_array() || j[i].size() != cols) throw Error(ErrorCode::Parse, "ragged matrix rows");
    for (std::size_t k = 0; k < cols; ++k) {
      if (!j[i][k].is_number()) throw Error(ErrorCode::Parse, "matrix entries must be numbers");
      m(static_cast<int>(i), static_cast<int>(k)) = j[i][k].get<double>();
    }
  }
  return m;
}

ChartCoord parse_chart(const ModelPtr& model, const json& j) {
  const Matrix m = parse_matrix(j);
  if (model->lagrangian()) return hermitian_coord(m.retagged(joined_tag(m.tag(), model->scalar)));
  if (m.cols() != 1) throw Error(ErrorCode::Parse, "Minkowski chart points are vectors");
  std::vector<double> v(static_cast<std::size_t>(m.rows()));
  for (int i = 0; i < m.rows(); ++i) v[static_cast<std::size_t>(i)] = m(i, 0).w;
  return minkowski_coord(v);
}

// "p+", "p-", {"frame": M}, {"chart": X}, or a bare array read as a frame when its
// row count is dim and as a chart coordinate otherwise.
ShilovPoint parse_point(const ModelPtr& model, const json& j) {
  try {
    if (j.is_string()) {
      const auto s = j.get<std::string>();
      const auto [pp, pm] = base_points(model);
      if (s == "p+") return pp;
      if (s == "p-") return pm;
      throw Error(ErrorCode::Parse, "unknown named point '" + s + "'");
    }
    if (j.is_object() && j.contains("frame")) return ShilovPoint(model, parse_matrix(j.at("frame")));
    if (j.is_object() && j.contains("chart")) return chart_point(model, parse_chart(model, j.at("chart")));
    const Matrix m = parse_matrix(j);
    if (m.rows() == model->dim()) return ShilovPoint(model, m);
    return chart_point(model, parse_chart(model, j));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Parse, e.what());
  }
}

ordered_json point_json(const ShilovPoint& p) { return ordered(to_json(p.canonical_form())); }

// Flattened real components of a matrix (row-major).
std::vector<std::string> flat_components(const Matrix& m) {
  std::vector<std::string> out;
  const int comps = tag_components(m.tag());
  for (const Quat& q : m.entries()) {
    const double c[4] = {q.w, q.x, q.y, q.z};
    for (int i = 0; i < comps; ++i) out.push_back(format_double(c[i]));
  }
  return out;
}

std::vector<std::string> component_header(const Matrix& m) {
  std::vector<std::string> h;
  const std::size_t n = static_cast<std::size_t>(m.rows() * m.cols() * tag_components(m.tag()));
  for (std::size_t i = 0; i < n; ++i) h.push_back("f" + std::to_string(i));
  return h;
}

std::string to_s(double v) { return format_double(v); }
template <class T>
std::string to_s(T v) requires std::is_integral_v<T> { return std::to_string(v); }

ordered_json histogram_json(const std::vector<std::size_t>& h) {
  ordered_json a = ordered_json::array();
  for (auto v : h) a.push_back(v);
  return a;
}

double finite_or(double v, double fallback) { return std::isfinite(v) ? v : fallback; }

// Minimal pairwise transversality margin of a sample.
double min_pairwise_margin(const std::vector<ShilovPoint>& pts) {
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j) m = std::min(m, transversality_margin(pts[i], pts[j]));
  return m;
}

// Chart point s·I (or s times the unit future time vector).
ShilovPoint scaled_centre(const ModelPtr& model, double s) {
  if (model->lagrangian()) return chart_point(model, hermitian_coord(Matrix::identity(model->size, model->scalar) * s));
  std::vector<double> v(static_cast<std::size_t>(model->size), 0.0);
  v.back() = s;
  return chart_point(model, minkowski_coord(v));
}

LimitSampleOptions limit_options(const Config& c) {
  LimitSampleOptions o;
  o.per_length_cap = static_cast<std::size_t>(c.integer("per_length_cap", 1, 1 << 20));
  o.separation = c.tol("separation");
  o.dedup_tol = c.tol("dedup");
  return o;
}

ordered_json limit_summary(const LimitSample& ls) {
  ordered_json o;
  o["points"] = ls.points.size();
  o["candidates"] = ls.candidates;
  o["no_gap"] = ls.no_gap;
  o["merged"] = ls.merged;
  o["thinned"] = ls.thinned;
  return o;
}

ordered_json gap_json(const GapReport& g) {
  ordered_json o;
  o["max_len"] = g.max_len;
  o["words"] = g.words;
  o["slope"] = g.slope;
  o["intercept"] = g.intercept;
  o["offset"] = g.offset;
  o["min_margin"] = g.min_margin;
  o["zero_words"] = g.zero_words;
  o["per_length_min"] = g.per_length_min;
  o["per_length_max"] = g.per_length_max;
  o["pass"] = g.pass;
  return o;
}

ordered_json certificate_json(const DomainCertificate& c) {
  ordered_json o;
  o["pass"] = c.pass;
  o["min_margin"] = c.min_margin;
  o["threshold"] = kCertificateMargin;
  o["orbit_points"] = c.orbit_points;
  o["limit_points"] = c.limit_points;
  o["candidates_tried"] = c.candidates_tried;
  o["z0"] = point_json(c.z0);
  return o;
}

ExperimentResult make_result(bool pass, ordered_json result, std::vector<CsvTable> tables = {}) {
  ExperimentResult r;
  r.verdict = pass ? Verdict::Pass : Verdict::Violation;
  r.report["result"] = std::move(result);
  r.tables = std::move(tables);
  return r;
}

// ---------------------------------------------------------------- runners

ExperimentResult run_sylvester(const Config& c) {
  const auto model = model_from_id(c.str("model"));
  const int r = model->rank();
  const auto trials = static_cast<std::size_t>(c.integer("trials", 1, 100'000'000));
  std::vector<int> is;
  if (c.given("i"))
    is.push_back(static_cast<int>(c.integer("i", 0, r)));
  else
    for (int i = 0; i <= r; ++i) is.push_back(i);
  ordered_json per = ordered_json::array();
  CsvTable hist{"histogram", {"i", "pos", "count"}, {}};
  std::size_t failures = 0;
  for (int i : is) {
    const auto rep = sylvester_orbit_check(model, i, trials, c.seed());
    ordered_json o;
    o["i"] = i;
    o["trials"] = rep.trials;
    o["failures"] = rep.failures;
    o["min_margin"] = rep.min_margin;
    o["histogram"] = histogram_json(rep.histogram);
    per.push_back(o);
    failures += rep.failures;
    for (std::size_t k = 0; k < rep.histogram.size(); ++k) hist.rows.push_back({to_s(i), to_s(k), to_s(rep.histogram[k])});
  }
  ordered_json res;
  res["model"] = model->id;
  res["r"] = r;
  res["failures"] = failures;
  res["per_i"] = per;
  return make_result(failures == 0, res, {hist});
}

ExperimentResult run_maslov(const Config& c) {
  const auto model = model_from_id(c.str("model"));
  if (!c.given("triple")) throw Error(ErrorCode::InvalidArgument, "maslov needs a triple");
  const json& t = c.at("triple");
  std::vector<ShilovPoint> pts;
  if (t.is_array() && t.size() == 3) {
    for (const auto& e : t) pts.push_back(parse_point(model, e));
  } else if (t.is_object() && t.contains("a") && t.contains("b") && t.contains("c")) {
    for (const char* k : {"a", "b", "c"}) pts.push_back(parse_point(model, t.at(k)));
  } else {
    throw Error(ErrorCode::Parse, "triple must be [a, b, c] or {\"a\", \"b\", \"c\"}");
  }
  const TripleType tt = maslov_index(pts[0], pts[1], pts[2]);
  ordered_json res;
  res["model"] = model->id;
  res["idx"] = tt.idx;
  res["i"] = tt.i;
  res["i_min"] = tt.i_min;
  res["r"] = tt.r;
  res["margin_ab"] = tt.margin_ab;
  res["margin_bc"] = tt.margin_bc;
  res["margin_ac"] = tt.margin_ac;
  res["spectral_margin"] = tt.spectral_margin;
  return make_result(true, res);
}

ExperimentResult run_maslov_invariance(const Config& c) {
  std::vector<std::string> ids;
  const json& m = c.at("models");
  if (c.given("model")) {
    ids.push_back(c.str("model"));
  } else {
    if (!m.is_array() || m.empty()) throw Error(ErrorCode::InvalidArgument, "models must be a nonempty array");
    for (const auto& e : m) ids.push_back(e.get<std::string>());
  }
  const auto trials = static_cast<std::size_t>(c.integer("trials", 1, 100'000'000));
  ordered_json per = ordered_json::array();
  CsvTable tab{"invariance", {"model", "trials", "evaluated", "skipped", "invariance_violations", "swap_violations",
                              "parity_violations", "min_margin"}, {}};
  std::size_t violations = 0;
  for (const auto& id : ids) {
    const auto model = model_from_id(id);
    const auto rep = maslov_invariance_report(model, trials, c.seed(), c.tol("skip_margin"));
    ordered_json o;
    o["model"] = id;
    o["trials"] = rep.trials;
    o["evaluated"] = rep.evaluated;
    o["skipped"] = rep.skipped;
    o["invariance_violations"] = rep.invariance_violations;
    o["swap_violations"] = rep.swap_violations;
    o["parity_violations"] = rep.parity_violations;
    o["min_margin"] = finite_or(rep.min_margin, 0.0);
    o["idx_histogram"] = histogram_json(rep.idx_histogram);
    per.push_back(o);
    violations += rep.violations();
    tab.rows.push_back({id, to_s(rep.trials), to_s(rep.evaluated), to_s(rep.skipped), to_s(rep.invariance_violations),
                        to_s(rep.swap_violations), to_s(rep.parity_violations), to_s(finite_or(rep.min_margin, 0.0))});
  }
  ordered_json res;
  res["violations"] = violations;
  res["per_model"] = per;
  return make_result(violations == 0, res, {tab});
}

ExperimentResult run_rep_build(const Config& c) {
  const Representation rep = preset(c.str("rep"));
  ordered_json res;
  res["representation"] = ordered(to_json(rep));
  const double inv = rep.inverse_residual(), rel = rep.relator_residual();
  res["inverse_residual"] = inv;
  res["relator_residual"] = rel;
  double defect = 0;
  for (const auto& g : rep.generators()) defect = std::max(defect, g.g.form_defect());
  res["max_form_defect"] = defect;
  bool pass = inv <= 1e-9 && rel <= 1e-9 && defect <= 1e-9;
  if (rep.model()->lagrangian() && rep.model()->size == 1 && rep.generators().size() == 2) {
    const auto pp = ping_pong_check(rep);
    ordered_json o;
    o["disjoint"] = pp.disjoint;
    o["mapped"] = pp.mapped;
    o["min_slack"] = pp.min_slack;
    res["ping_pong"] = o;
    pass = pass && pp.pass();
  }
  return make_result(pass, res);
}

ExperimentResult run_rep_gap(const Config& c) {
  const Representation rep = preset(c.str("rep"));
  const int L = static_cast<int>(c.integer("max_word_len", 1, 40));
  const auto cap = static_cast<std::uint64_t>(c.integer("cap", 1, 1'000'000'000));
  const GapReport g = anosov_gap_report(rep, L, cap);
  ordered_json res;
  res["rep"] = rep.preset_id;
  res["gap"] = gap_json(g);
  bool pass = g.pass;
  if (rep.tau_image && !rep.deformation && rep.model()->lagrangian() && rep.model()->size % 2 == 0) {
    const auto lv = levi_gap_report(rep, L, cap);
    ordered_json o;
    o["checked"] = lv.checked;
    o["violations"] = lv.violations;
    o["min_separation"] = finite_or(lv.min_separation, 0.0);
    o["pass"] = lv.pass;
    res["levi_gap"] = o;
    pass = pass && lv.pass;
  }
  CsvTable tab{"gap", {"length", "min_alpha_r", "max_alpha_r"}, {}};
  for (std::size_t k = 0; k < g.per_length_min.size(); ++k)
    tab.rows.push_back({to_s(k + 1), to_s(g.per_length_min[k]), to_s(g.per_length_max[k])});
  return make_result(pass, res, {tab});
}

CsvTable limit_table(const Representation& rep, const LimitSample& ls) {
  CsvTable tab{"limit_points", {"index", "word", "length", "residual"}, {}};
  if (!ls.points.empty()) {
    const auto h = component_header(ls.points[0].canonical_form());
    tab.header.insert(tab.header.end(), h.begin(), h.end());
  }
  for (std::size_t i = 0; i < ls.points.size(); ++i) {
    std::vector<std::string> row{to_s(i), rep.word_name(ls.words[i]), to_s(ls.word_lengths[i]), to_s(ls.residuals[i])};
    const auto f = flat_components(ls.points[i].canonical_form());
    row.insert(row.end(), f.begin(), f.end());
    tab.rows.push_back(std::move(row));
  }
  return tab;
}

ExperimentResult run_rep_limitset(const Config& c) {
  const Representation rep = preset(c.str("rep"));
  const int L = static_cast<int>(c.integer("max_word_len", 1, 40));
  const auto min_points = static_cast<std::size_t>(c.integer("min_points", 0, 1'000'000));
  const auto opt = limit_options(c);
  const LimitSample ls = sample_limit_set(rep, L, c.seed(), opt);
  const double mm = min_pairwise_margin(ls.points);
  ordered_json res;
  res["rep"] = rep.preset_id;
  res["max_word_len"] = L;
  res["sample"] = limit_summary(ls);
  res["min_pairwise_margin"] = finite_or(mm, 0.0);
  res["min_points"] = min_points;
  ordered_json pts = ordered_json::array();
  for (std::size_t i = 0; i < ls.points.size(); ++i) {
    ordered_json o;
    o["word"] = rep.word_name(ls.words[i]);
    o["residual"] = ls.residuals[i];
    o["point"] = point_json(ls.points[i]);
    pts.push_back(o);
  }
  res["points"] = pts;
  const bool pass = ls.points.size() >= min_points && (ls.points.size() < 2 || mm > opt.separation);
  return make_result(pass, res, {limit_table(rep, ls)});
}

ExperimentResult run_rep_verify(const Config& c) {
  const Representation rep = preset(c.str("rep"));
  const int L = static_cast<int>(c.integer("max_word_len", 1, 40));
  const auto triples = static_cast<std::size_t>(c.integer("triples", 1, 100'000'000));
  const LimitSample ls = sample_limit_set(rep, L, c.seed(), limit_options(c));
  const auto mz = verify_maslov_zero(ls.points, triples, mix_seed(c.seed(), 0x6d7a));
  ordered_json res;
  res["rep"] = rep.preset_id;
  res["sample"] = limit_summary(ls);
  res["triples"] = mz.triples;
  res["violations"] = mz.violations;
  res["skipped"] = mz.skipped;
  res["min_margin"] = finite_or(mz.min_margin, 0.0);
  res["idx_histogram"] = histogram_json(mz.idx_histogram);
  return make_result(mz.violations == 0 && mz.skipped < mz.triples, res);
}

ExperimentResult run_rep_certificate(const Config& c) {
  const Representation rep = preset(c.str("rep"));
  const int L = static_cast<int>(c.integer("max_word_len", 1, 40));
  const auto probes = static_cast<std::size_t>(c.integer("probes", 1, 1'000'000));
  const auto opt = limit_options(c);
  const LimitSample ls = sample_limit_set(rep, L, c.seed(), opt);
  const auto cert = proper_domain_certificate(rep, ls.points, L, probes, mix_seed(c.seed(), 0x6365), opt.per_length_cap);
  ordered_json res;
  res["rep"] = rep.preset_id;
  res["sample"] = limit_summary(ls);
  res["certificate"] = certificate_json(cert);
  return make_result(cert.pass, res);
}

ExperimentResult run_rep_core(const Config& c) {
  const Representation rep = preset(c.str("rep"));
  const int L = static_cast<int>(c.integer("max_word_len", 1, 40));
  const auto core_cap = static_cast<std::size_t>(c.integer("core_cap", 1, 4096));
  const auto probes = static_cast<std::size_t>(c.integer("probes", 1, 1'000'000));
  const auto opt = limit_options(c);
  const LimitSample ls = sample_limit_set(rep, L, c.seed(), opt);
  const auto cert = proper_domain_certificate(rep, ls.points, L, 8, mix_seed(c.seed(), 0x6365), opt.per_length_cap);
  const auto chart = make_chart(cert.z0);
  const auto& model = rep.model();
  const std::vector<ShilovPoint> base{scaled_centre(model, 0.5), scaled_centre(model, 1.0), scaled_centre(model, 2.0)};
  const ConvexCore core = convex_core_sample(rep, ls.points, base, chart, L, mix_seed(c.seed(), 0x636f), core_cap);
  const auto idem = hull_idempotence_check(core.core, 64, probes, mix_seed(c.seed(), 0x6964), c.tol("band"));
  ordered_json res;
  res["rep"] = rep.preset_id;
  res["sample"] = limit_summary(ls);
  res["chart_base"] = point_json(cert.z0);
  res["core_points"] = core.core.points().size();
  res["core_pairs"] = core.core.pairs().size();
  res["long_words"] = core.long_words;
  res["ideal_residual"] = core.ideal_residual;
  ordered_json id;
  id["probes"] = idem.probes;
  id["disagreements"] = idem.disagreements;
  id["within_tol"] = idem.within_tol;
  res["idempotence"] = id;
  CsvTable tab{"core_points", {"index"}, {}};
  if (!core.core.points().empty()) {
    const auto h = component_header(core.core.points()[0]);
    tab.header.insert(tab.header.end(), h.begin(), h.end());
  }
  for (std::size_t i = 0; i < core.core.points().size(); ++i) {
    std::vector<std::string> row{to_s(i)};
    const auto f = flat_components(core.core.points()[i]);
    row.insert(row.end(), f.begin(), f.end());
    tab.rows.push_back(std::move(row));
  }
  return make_result(idem.disagreements == 0, res, {tab});
}

ExperimentResult run_rep_deform(const Config& c) {
  const Representation rep = preset(c.str("rep"));
  const int L = static_cast<int>(c.integer("max_word_len", 1, 40));
  const auto probes = static_cast<std::size_t>(c.integer("probes", 1, 1'000'000));
  std::vector<double> eps;
  const json& e = c.at("eps");
  if (e.is_number()) {
    eps.push_back(e.get<double>());
  } else if (e.is_array() && !e.empty()) {
    for (const auto& v : e) {
      if (!v.is_number()) throw Error(ErrorCode::InvalidArgument, "eps entries must be numbers");
      eps.push_back(v.get<double>());
    }
  } else {
    throw Error(ErrorCode::InvalidArgument, "eps must be a number or a nonempty array");
  }
  for (double v : eps)
    if (!(v >= 0 && v <= 1)) throw Error(ErrorCode::InvalidArgument, "eps must lie in [0, 1]");
  const auto opt = limit_options(c);
  const LimitSample base = sample_limit_set(rep, L, c.seed(), opt);
  ordered_json per = ordered_json::array();
  CsvTable tab{"deform", {"eps", "gap_pass", "slope", "certificate_margin", "max_move", "move_bound", "pass"}, {}};
  bool all = true;
  for (double ep : eps) {
    const Representation d = deform(rep, ep, c.seed());
    const GapReport g = anosov_gap_report(d, L);
    const auto moved = attracting_points_of(d, base.words);
    double move = 0;
    std::size_t lost = 0;
    for (std::size_t i = 0; i < base.words.size(); ++i) {
      if (!moved[i]) {
        ++lost;
        continue;
      }
      move = std::max(move, frame_distance(moved[i]->point, base.points[i]));
    }
    ordered_json o;
    o["eps"] = ep;
    o["relator_residual"] = d.relator_residual();
    o["gap"] = gap_json(g);
    bool cert_pass = false;
    try {
      const LimitSample ls = sample_limit_set(d, L, c.seed(), opt);
      const auto cert = proper_domain_certificate(d, ls.points, L, probes, mix_seed(c.seed(), 0x6365), opt.per_length_cap);
      o["certificate"] = certificate_json(cert);
      cert_pass = cert.pass;
    } catch (const Error& err) {
      if (!is_violation(err.code())) throw;
      o["certificate"] = {{"pass", false}, {"error", error_name(err.code())}, {"message", err.what()}};
    }
    o["matched_words"] = base.words.size();
    o["lost_words"] = lost;
    o["max_move"] = move;
    o["move_bound"] = 50 * ep;
    const bool pass = g.pass && g.slope > 0.05 && cert_pass && lost == 0 && move <= 50 * ep;
    o["pass"] = pass;
    all = all && pass;
    const double margin = o["certificate"].contains("min_margin") ? o["certificate"]["min_margin"].get<double>() : 0.0;
    tab.rows.push_back({to_s(ep), g.pass ? "1" : "0", to_s(g.slope), to_s(margin), to_s(move), to_s(50 * ep),
                        pass ? "1" : "0"});
    per.push_back(o);
  }
  ordered_json res;
  res["rep"] = rep.preset_id;
  res["per_eps"] = per;
  return make_result(all, res, {tab});
}

// Seeded chart points t·I + 0.3·H/‖H‖ with t ∈ [−spread, spread]: a mix of
// causally related and unrelated points, all inside D_std when spread ≤ 0.6.
std::vector<ChartCoord> random_chart_points(const ModelPtr& model, std::size_t n, double spread, std::uint64_t seed) {
  std::vector<ChartCoord> out;
  for (std::size_t k = 0; k < n; ++k) {
    Rng rng(seed, k);
    const double t = rng.uniform(-spread, spread);
    if (model->lagrangian()) {
      Matrix h = rng.hermitian(model->size, model->scalar);
      h *= 0.3 / std::max(spectral_norm(h), 1e-12);
      out.push_back(hermitian_coord(h + Matrix::identity(model->size, model->scalar) * t));
    } else {
      std::vector<double> v(static_cast<std::size_t>(model->size));
      double nrm = 0;
      for (auto& x : v) {
        x = rng.normal();
        nrm += x * x;
      }
      nrm = std::sqrt(nrm);
      for (auto& x : v) x *= 0.3 / nrm;
      v.back() += t;
      out.push_back(minkowski_coord(v));
    }
  }
  return out;
}

std::vector<ChartCoord> chart_points_arg(const Config& c, const ModelPtr& model, double spread) {
  if (c.given("points")) {
    const json& p = c.at("points");
    if (!p.is_array() || p.empty()) throw Error(ErrorCode::InvalidArgument, "points must be a nonempty array");
    std::vector<ChartCoord> out;
    for (const auto& e : p) out.push_back(parse_chart(model, e));
    return out;
  }
  const auto n = static_cast<std::size_t>(c.integer("n_points", 1, 10'000));
  return random_chart_points(model, n, spread, mix_seed(c.seed(), 0x7074));
}

ordered_json idempotence_json(const IdempotenceReport& r) {
  ordered_json o;
  o["probes"] = r.probes;
  o["disagreements"] = r.disagreements;
  o["within_tol"] = r.within_tol;
  return o;
}

ExperimentResult run_hull(const Config& c) {
  const auto model = model_from_id(c.str("model"));
  const auto pts = chart_points_arg(c, model, 1.0);
  const auto probes = static_cast<std::size_t>(c.integer("probes", 1, 10'000'000));
  const auto samples = static_cast<std::size_t>(c.integer("samples", 0, 100'000));
  const CausalHull hull = causal_hull(model, pts);
  const auto idem = hull_idempotence_check(hull, samples, probes, mix_seed(c.seed(), 0x6964), c.tol("band"));
  ordered_json res;
  res["model"] = model->id;
  res["hull"] = ordered(to_json(hull));
  res["idempotence"] = idempotence_json(idem);
  CsvTable tab{"pairs", {"past", "future"}, {}};
  for (const auto& [i, j] : hull.pairs()) tab.rows.push_back({to_s(i), to_s(j)});
  return make_result(idem.disagreements == 0, res, {tab});
}

ExperimentResult run_chart_independence(const Config& c) {
  const auto model = model_from_id(c.str("model"));
  const auto coords = chart_points_arg(c, model, 0.6);
  const auto probes = static_cast<std::size_t>(c.integer("probes", 1, 10'000'000));
  std::vector<ShilovPoint> pts;
  for (const auto& x : coords) pts.push_back(chart_point(model, x));
  // chart B is based at −P with P ⪰ I, which is transverse to all of D_std
  Rng rng(c.seed(), 0x4348);
  ChartCoord base_b;
  if (model->lagrangian()) {
    Matrix p = rng.positive_definite(model->size, model->scalar, 0.0);
    p *= 0.5 / std::max(spectral_norm(p), 1e-12);
    base_b = hermitian_coord((p + Matrix::identity(model->size, model->scalar)) * -1.0);
  } else {
    std::vector<double> v(static_cast<std::size_t>(model->size));
    double nrm = 0;
    for (std::size_t k = 0; k + 1 < v.size(); ++k) {
      v[k] = rng.normal();
      nrm += v[k] * v[k];
    }
    const double s = rng.uniform(0.0, 0.5) / std::max(std::sqrt(nrm), 1e-12);
    for (std::size_t k = 0; k + 1 < v.size(); ++k) v[k] *= s;
    v.back() = 1.0 + 0.5 + rng.uniform(0.0, 0.5);
    for (auto& x : v) x = -x;
    base_b = minkowski_coord(v);
  }
  const ChartedChart a = standard_chart(model);
  const ChartedChart b = make_chart(chart_point(model, base_b));
  const auto rep = chart_independence_check(pts, a, b, probes, mix_seed(c.seed(), 0x6369), c.tol("band"));
  const CausalHull hull_a = causal_hull(model, coords);
  const auto idem = hull_idempotence_check(hull_a, 64, probes, mix_seed(c.seed(), 0x6964), c.tol("band"));
  ordered_json res;
  res["model"] = model->id;
  res["points"] = pts.size();
  res["pairs"] = hull_a.pairs().size();
  res["chart_b_base"] = point_json(chart_point(model, base_b));
  ordered_json ci;
  ci["probes"] = rep.probes;
  ci["agreements"] = rep.agreements;
  ci["disagreements"] = rep.disagreements;
  ci["within_tol"] = rep.within_tol;
  ci["skipped"] = rep.skipped;
  ci["inside_a"] = rep.inside_a;
  ci["max_disagreement_margin"] = rep.max_disagreement_margin;
  res["chart_independence"] = ci;
  res["idempotence"] = idempotence_json(idem);
  return make_result(rep.disagreements == 0 && idem.disagreements == 0, res);
}

std::vector<EinPoint> ein_limit_arg(const Config& c, const ModelPtr& model) {
  if (c.given("limit_points")) {
    const json& p = c.at("limit_points");
    if (!p.is_array() || p.empty()) throw Error(ErrorCode::InvalidArgument, "limit_points must be a nonempty array");
    std::vector<EinPoint> out;
    for (const auto& e : p) out.push_back(parse_point(model, e));
    return out;
  }
  return spacelike_circle_sample(model, static_cast<int>(c.integer("n_limit", 1, 1000)), mix_seed(c.seed(), 0x6c69));
}

ExperimentResult run_ein_invisible(const Config& c) {
  const auto model = model_from_id(c.str("model"));
  const auto limit = ein_limit_arg(c, model);
  const auto lifts = negative_lifts(limit);
  std::vector<EinPoint> queries;
  if (c.given("queries")) {
    for (const auto& e : c.at("queries")) queries.push_back(parse_point(model, e));
  } else {
    const auto n = static_cast<std::size_t>(c.integer("n_queries", 1, 1'000'000));
    for (std::size_t k = 0; k < n; ++k) queries.push_back(random_ein_point(model, mix_seed(c.seed(), k)));
  }
  const double band = c.tol("band");
  std::size_t inside = 0, literal_mismatch = 0, equiv_mismatch = 0, ambiguous = 0;
  CsvTable tab{"queries", {"index", "margin", "inside"}, {}};
  ordered_json per = ordered_json::array();
  for (std::size_t k = 0; k < queries.size(); ++k) {
    const auto& x = queries[k];
    const double m = invisible_domain_margin(lifts, x);
    const bool in = m > 1e-9;
    inside += in ? 1 : 0;
    tab.rows.push_back({to_s(k), to_s(m), in ? "1" : "0"});
    if (std::abs(m) <= band) {
      ++ambiguous;
      continue;
    }
    // all-pairs rule straight from the sign products
    bool literal = true;
    for (std::size_t i = 0; i < limit.size() && literal; ++i) {
      if (!transverse(limit[i], x)) {
        literal = false;
        break;
      }
      for (std::size_t j = i + 1; j < limit.size() && literal; ++j)
        if (ein_maslov_sign(limit[i], x, limit[j]) != 0) literal = false;
    }
    if (limit.size() == 1) literal = transverse(limit[0], x);
    if (literal != in) ++literal_mismatch;
    const GroupElement g = random_bounded_element(model, mix_seed(c.seed() ^ 0x6571ULL, k), 1e2);
    std::vector<EinPoint> moved;
    for (const auto& p : limit) moved.push_back(act(g, p));
    const double mg = invisible_domain_margin(negative_lifts(moved), act(g, x));
    if (std::abs(mg) > band && (mg > 1e-9) != in) ++equiv_mismatch;
  }
  ordered_json res;
  res["model"] = model->id;
  res["limit_points"] = limit.size();
  res["queries"] = queries.size();
  res["inside"] = inside;
  res["ambiguous"] = ambiguous;
  res["literal_mismatches"] = literal_mismatch;
  res["equivariance_mismatches"] = equiv_mismatch;
  return make_result(literal_mismatch == 0 && equiv_mismatch == 0, res, {tab});
}

ExperimentResult run_ein_photon(const Config& c) {
  const auto model = model_from_id(c.str("model"));
  const auto limit = ein_limit_arg(c, model);
  const auto photons = static_cast<std::size_t>(c.integer("photons", 1, 10'000'000));
  const int scan = static_cast<int>(c.integer("scan", 4, 1'000'000));
  const auto rep = photon_convexity_check(limit, photons, mix_seed(c.seed(), 0x7068), scan, c.tol("band"));
  ordered_json res;
  res["model"] = model->id;
  res["limit_points"] = limit.size();
  res["object"] = "Omega(sample)";
  res["photons"] = rep.photons;
  res["checked"] = rep.checked;
  res["violations"] = rep.violations;
  res["vacuous"] = rep.vacuous;
  res["within_tol"] = rep.within_tol;
  res["rejected_bases"] = rep.rejected_bases;
  return make_result(rep.violations == 0 && rep.checked > 0, res);
}

Eigen::VectorXd affine_to_homogeneous(const json& j, int dim) {
  Eigen::VectorXd v(dim + 1);
  v(0) = 1.0;
  if (dim == 1 && j.is_number()) {
    v(1) = j.get<double>();
    return v;
  }
  if (!j.is_array() || static_cast<int>(j.size()) != dim)
    throw Error(ErrorCode::InvalidArgument, "point must have " + std::to_string(dim) + " affine coordinates");
  for (int k = 0; k < dim; ++k) v(k + 1) = j[static_cast<std::size_t>(k)].get<double>();
  return v;
}

ExperimentResult run_hilbert(const Config& c) {
  const std::string domain = c.str("domain");
  int dim = 0;
  if (domain == "interval")
    dim = 1;
  else if (domain == "disk")
    dim = 2;
  else
    throw Error(ErrorCode::InvalidArgument, "domain must be interval or disk");
  // the unit ball {|v_{1..}| < v_0}, up to the sign of the representative
  const ConvexOracle ball = [](const Eigen::VectorXd& v) {
    return std::abs(v(0)) > 0 && v.tail(v.size() - 1).norm() < std::abs(v(0));
  };
  const double tol = c.tol("bisection");
  json xj = c.at("x"), yj = c.at("y");
  if (xj.is_null()) xj = dim == 1 ? json(0.0) : json::array({0.0, 0.0});
  if (yj.is_null()) yj = dim == 1 ? json(0.5) : json::array({0.5, 0.0});
  const Eigen::VectorXd x = affine_to_homogeneous(xj, dim), y = affine_to_homogeneous(yj, dim);
  const double d = hilbert_distance(ball, x, y, tol);
  ordered_json res;
  res["domain"] = domain;
  res["distance"] = d;
  bool pass = true;
  if (dim == 1) {
    const double a = x(1), b = y(1);
    const double closed = std::abs(std::log((1 + b) * (1 - a) / ((1 + a) * (1 - b))));
    res["closed_form"] = closed;
    res["abs_error"] = std::abs(d - closed);
    pass = std::abs(d - closed) <= 1e-10;
  }
  // metric checks on the unit disk
  const auto samples = static_cast<std::size_t>(c.integer("samples", 0, 10'000'000));
  auto disk_point = [](Rng& rng) {
    const double r = 0.9 * std::sqrt(rng.uniform()), t = rng.uniform(0.0, 2 * std::numbers::pi);
    Eigen::VectorXd v(3);
    v << 1.0, r * std::cos(t), r * std::sin(t);
    return v;
  };
  std::size_t tri_viol = 0;
  double max_excess = -std::numeric_limits<double>::infinity(), max_dev = 0, max_sym = 0;
  for (std::size_t k = 0; k < samples; ++k) {
    Rng rng(c.seed(), k);
    const auto p = disk_point(rng), q = disk_point(rng), r = disk_point(rng);
    const double pq = hilbert_distance(ball, p, q, tol), qr = hilbert_distance(ball, q, r, tol);
    const double pr = hilbert_distance(ball, p, r, tol);
    const double excess = pr - pq - qr;
    max_excess = std::max(max_excess, excess);
    if (excess > 1e-9) ++tri_viol;
    max_sym = std::max(max_sym, std::abs(hilbert_distance(ball, q, p, tol) - pq));
    Eigen::Matrix3d g = Eigen::Matrix3d::Identity();
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) g(i, j) += 0.3 * rng.normal();
    const Eigen::Matrix3d gi = g.inverse();
    const ConvexOracle moved = [&](const Eigen::VectorXd& v) { return ball(gi * v); };
    const double dg = hilbert_distance(moved, g * p, g * q, tol);
    max_dev = std::max(max_dev, std::abs(dg - pq));
  }
  ordered_json tri;
  tri["samples"] = samples;
  tri["violations"] = tri_viol;
  tri["max_excess"] = samples ? max_excess : 0.0;
  res["triangle"] = tri;
  res["max_symmetry_deviation"] = max_sym;
  res["max_invariance_deviation"] = max_dev;
  pass = pass && tri_viol == 0 && max_dev <= 1e-9 && max_sym <= 1e-9;
  return make_result(pass, res);
}

const std::vector<CommandSpec>& specs() {
  static const std::vector<CommandSpec> s = [] {
    const json null;
    const std::vector<std::pair<std::string, double>> limit_tols{{"separation", 1e-6}, {"dedup", 1e-6}};
    std::vector<CommandSpec> v;
    v.push_back({"sylvester-check", "pos(X + Y) >= i for X of signature (i, r-i) and Y > 0",
                 {{"model", "sp4"}, {"i", null}, {"trials", 10000}}, {}, run_sylvester});
    v.push_back({"maslov", "Maslov index of one triple",
                 {{"model", "sp4"}, {"triple", null}}, {}, run_maslov});
    v.push_back({"maslov-invariance", "G-invariance and swap symmetry of the Maslov index",
                 {{"model", null}, {"models", json::array({"sp4", "su22", "sostar8"})}, {"trials", 10000}},
                 {{"skip_margin", 1e-8}}, run_maslov_invariance});
    v.push_back({"rep-build", "build a preset representation and check it", {{"rep", "tau0-sp4-f2"}}, {},
                 run_rep_build});
    v.push_back({"rep-gap", "linear growth of alpha_r over a word ball",
                 {{"rep", "tau0-sp4-f2"}, {"max_word_len", 10}, {"cap", 10'000'000}}, {}, run_rep_gap});
    v.push_back({"rep-limitset", "sampled limit set from attracting points",
                 {{"rep", "tau0-sp4-f2"}, {"max_word_len", 10}, {"per_length_cap", 256}, {"min_points", 100}},
                 limit_tols, run_rep_limitset});
    v.push_back({"rep-verify-maslov0", "idx = 0 on triples of limit points",
                 {{"rep", "tau0-sp4-f2"}, {"max_word_len", 10}, {"per_length_cap", 256}, {"triples", 1000}},
                 limit_tols, run_rep_verify});
    v.push_back({"rep-certificate", "sampled proper-domain certificate",
                 {{"rep", "tau0-sp4-f2"}, {"max_word_len", 10}, {"per_length_cap", 256}, {"probes", 8}},
                 limit_tols, run_rep_certificate});
    auto core_tols = limit_tols;
    core_tols.push_back({"band", 1e-7});
    v.push_back({"rep-core", "sampled convex core in the certified chart",
                 {{"rep", "tau0-sp4-f2"}, {"max_word_len", 8}, {"per_length_cap", 256}, {"core_cap", 32},
                  {"probes", 1000}},
                 core_tols, run_rep_core});
    v.push_back({"rep-deform", "gap and certificate after a small deformation",
                 {{"rep", "tau0-sp4-f2"}, {"eps", json::array({1e-4, 1e-3})}, {"max_word_len", 10},
                  {"per_length_cap", 256}, {"probes", 8}},
                 limit_tols, run_rep_deform});
    v.push_back({"hull", "causal hull of chart points and its idempotence",
                 {{"model", "sp4"}, {"points", null}, {"n_points", 6}, {"samples", 64}, {"probes", 1000}},
                 {{"band", 1e-7}}, run_hull});
    v.push_back({"chart-independence", "hull membership agreement between two charts",
                 {{"model", "sp4"}, {"points", null}, {"n_points", 6}, {"probes", 10000}}, {{"band", 1e-7}},
                 run_chart_independence});
    v.push_back({"ein-invisible", "membership in the invisible domain of a negative sample",
                 {{"model", "so42"}, {"limit_points", null}, {"n_limit", 8}, {"queries", null}, {"n_queries", 1000}},
                 {{"band", 1e-7}}, run_ein_invisible});
    v.push_back({"ein-photon-convexity", "photon scans through the invisible domain",
                 {{"model", "so42"}, {"limit_points", null}, {"n_limit", 8}, {"photons", 1000}, {"scan", 1000}},
                 {{"band", 1e-9}}, run_ein_photon});
    v.push_back({"hilbert", "Hilbert distance with metric checks",
                 {{"domain", "interval"}, {"x", null}, {"y", null}, {"samples", 1000}}, {{"bisection", 1e-12}},
                 run_hilbert});
    return v;
  }();
  return s;
}

const CommandSpec& find_spec(const std::string& name) {
  for (const auto& s : specs())
    if (s.name == name) return s;
  throw Error(ErrorCode::InvalidArgument, "unknown command '" + name + "'");
}

}  // namespace

const std::vector<std::string>& experiment_commands() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& s : specs()) v.push_back(s.name);
    return v;
  }();
  return names;
}

std::string experiment_help(const std::string& command) {
  const auto& s = find_spec(command);
  std::ostringstream o;
  o << s.name << ": " << s.summary << "\n";
  o << "  seed = 0\n";
  for (const auto& [k, def] : s.params) o << "  " << k << " = " << (def.is_null() ? "(none)" : def.dump()) << "\n";
  for (const auto& [k, def] : s.tolerances) o << "  tolerances." << k << " = " << format_double(def) << "\n";
  return o.str();
}

ExperimentResult run_experiment(const nlohmann::json& config) {
  if (!config.is_object() || !config.contains("command") || !config.at("command").is_string())
    throw Error(ErrorCode::InvalidArgument, "config needs a command");
  const auto& spec = find_spec(config.at("command").get<std::string>());
  const Config cfg(config, spec);
  ExperimentResult out;
  try {
    out = spec.run(cfg);
  } catch (const Error& e) {
    if (!is_violation(e.code())) throw;
    out.verdict = Verdict::Violation;
    ordered_json err;
    err["code"] = error_name(e.code());
    err["message"] = e.what();
    out.report = ordered_json::object();
    out.report["error"] = err;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Parse, e.what());
  }
  ordered_json report;
  report["command"] = spec.name;
  report["status"] = out.verdict == Verdict::Pass ? "PASS" : "VIOLATION";
  report["config"] = cfg.echo();
  for (auto it = out.report.begin(); it != out.report.end(); ++it) report[it.key()] = it.value();
  out.report = std::move(report);
  return out;
}

std::string render_json(const ordered_json& j) {
  std::string out;
  render(j, 0, out);
  out += "\n";
  return out;
}

std::string render_csv(const CsvTable& t) {
  auto field = [](const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char ch : s) {
      if (ch == '"') q += '"';
      q += ch;
    }
    return q + "\"";
  };
  std::string out;
  auto line = [&](const std::vector<std::string>& row) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ",";
      out += field(row[i]);
    }
    out += "\n";
  };
  line(t.header);
  for (const auto& r : t.rows) line(r);
  return out;
}

}  // namespace causalflag
