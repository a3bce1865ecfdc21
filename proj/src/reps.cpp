#include "causalflag/reps.hpp"

#include "causalflag/error.hpp"
#include "causalflag/parallel.hpp"
#include "causalflag/random.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <set>

namespace causalflag {

namespace {

std::string default_inverse_name(const std::string& name) {
  if (!name.empty() && std::islower(static_cast<unsigned char>(name[0]))) {
    std::string inv = name;
    inv[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(inv[0])));
    return inv;
  }
  return name + "^-1";
}

}  // namespace

Representation::Representation(ModelPtr model, std::vector<std::pair<std::string, Matrix>> generators, double bound)
    : model_(std::move(model)) {
  if (generators.empty()) throw Error(ErrorCode::EmptyInput, "representation needs at least one generator");
  if (generators.size() > 64) throw Error(ErrorCode::InvalidArgument, "too many generators");
  for (auto& [name, m] : generators) {
    GroupElement g(model_, std::move(m), bound);
    GroupElement inv = g.inverse();
    gens_.push_back({name, default_inverse_name(name), std::move(g), std::move(inv)});
  }
}

Matrix Representation::evaluate(const Word& w) const {
  Matrix m = Matrix::identity(model_->dim(), model_->scalar);
  for (auto l : w) m = m * letter(l).matrix();
  return m;
}

std::string Representation::word_name(const Word& w) const {
  if (w.empty()) return "e";
  std::string s;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (i) s += '.';
    s += letter_name(w[i]);
  }
  return s;
}

double Representation::inverse_residual() const {
  double worst = 0;
  const Matrix id = Matrix::identity(model_->dim(), model_->scalar);
  for (const auto& g : gens_) worst = std::max(worst, (g.g.matrix() * g.inv.matrix() - id).norm());
  return worst;
}

double Representation::relator_residual() const {
  if (relator.empty()) return 0.0;
  return (evaluate(relator) - Matrix::identity(model_->dim(), model_->scalar)).norm();
}

namespace {

Eigen::Matrix2d rotation(double t) {
  Eigen::Matrix2d k;
  k << std::cos(t), -std::sin(t), std::sin(t), std::cos(t);
  return k;
}

std::vector<Eigen::Matrix2d> f2_generators() {
  const Eigen::Matrix2d h1 = Eigen::Vector2d(3.0, 1.0 / 3.0).asDiagonal();
  const Eigen::Matrix2d k = rotation(std::numbers::pi / 4);
  return {h1, k * h1 * k.transpose()};
}

// Side pairings of the regular octagon with interior angles π/4 in the disc
// model, X(i,j) = R(θ_i) T R(π − θ_j), conjugated to the upper half plane.
std::vector<Eigen::Matrix2d> genus2_generators() {
  using C = std::complex<double>;
  using M2 = Eigen::Matrix2cd;
  const double c = 1.0 + std::sqrt(2.0), s = std::sqrt(c * c - 1.0);
  M2 t;
  t << c, s, s, c;
  auto rot = [](double a) {
    M2 r = M2::Zero();
    r(0, 0) = std::polar(1.0, a / 2);
    r(1, 1) = std::polar(1.0, -a / 2);
    return r;
  };
  auto side = [&](int i, int j) {
    return M2(rot(i * std::numbers::pi / 4) * t * rot(std::numbers::pi - j * std::numbers::pi / 4));
  };
  M2 cay;
  cay << C(1, 0), C(0, -1), C(1, 0), C(0, 1);
  const M2 cay_inv = cay.inverse();
  std::vector<Eigen::Matrix2d> out;
  for (const auto& [i, j] : std::vector<std::pair<int, int>>{{0, 2}, {3, 1}, {4, 6}, {7, 5}}) {
    const M2 a = cay_inv * side(i, j) * cay;
    out.push_back(a.real());
  }
  return out;
}

Representation build(const ModelPtr& model, const std::vector<std::string>& names, const std::vector<Eigen::Matrix2d>& mats,
                     bool through_tau) {
  std::vector<std::pair<std::string, Matrix>> gens;
  for (std::size_t k = 0; k < mats.size(); ++k) {
    Matrix m = through_tau ? tau_p(mats[k], model).matrix() : Matrix::from_real(mats[k]);
    gens.emplace_back(names[k], std::move(m));
  }
  Representation rep(model, std::move(gens), 1e-9);
  rep.tau_image = through_tau;
  return rep;
}

}  // namespace

std::vector<std::string> preset_ids() {
  return {"f2-fuchsian-sl2", "tau0-sp4-f2", "tau0-su22-f2", "tau0-sostar8-f2",
          "tau0-sp8-f2",     "genus2-sl2",  "tau0-sp4-genus2"};
}

Representation preset(const std::string& id) {
  Representation rep;
  if (id == "f2-fuchsian-sl2") {
    rep = build(make_model(Family::Sp, 1), {"a", "b"}, f2_generators(), false);
  } else if (id == "tau0-sp4-f2" || id == "tau0-su22-f2" || id == "tau0-sostar8-f2" || id == "tau0-sp8-f2") {
    const std::string model_id = id.substr(5, id.size() - 8);
    rep = build(model_from_id(model_id), {"a", "b"}, f2_generators(), true);
  } else if (id == "genus2-sl2" || id == "tau0-sp4-genus2") {
    const bool tau = id == "tau0-sp4-genus2";
    rep = build(tau ? make_model(Family::Sp, 2) : make_model(Family::Sp, 1), {"a1", "b1", "a2", "b2"},
                genus2_generators(), tau);
    // [a1,b1][a2,b2] = a1 b1 A1 B1 a2 b2 A2 B2
    rep.relator = {0, 2, 1, 3, 4, 6, 5, 7};
  } else {
    throw Error(ErrorCode::UnknownPreset, "unknown preset '" + id + "'");
  }
  rep.preset_id = id;
  return rep;
}

Representation trivial_representation(const ModelPtr& model, int generators) {
  std::vector<std::pair<std::string, Matrix>> gens;
  for (int k = 0; k < generators; ++k)
    gens.emplace_back(std::string(1, static_cast<char>('a' + k)), Matrix::identity(model->dim(), model->scalar));
  return Representation(model, std::move(gens));
}

nlohmann::json to_json(const Representation& rep) {
  nlohmann::json gens = nlohmann::json::array();
  for (const auto& g : rep.generators())
    gens.push_back({{"name", g.name}, {"inverse_name", g.inverse_name}, {"matrix", to_json(g.g.matrix())}});
  nlohmann::json relator = nlohmann::json::array();
  for (auto l : rep.relator) relator.push_back(rep.letter_name(l));
  nlohmann::json j = {{"model", rep.model()->id},
                      {"generators", gens},
                      {"preset", rep.preset_id.empty() ? nlohmann::json() : nlohmann::json(rep.preset_id)},
                      {"tau_image", rep.tau_image},
                      {"relator", relator}};
  if (rep.deformation) {
    const auto& d = *rep.deformation;
    j["deformation"] = {{"base", d.base}, {"eps", d.eps}, {"seed", d.seed}, {"relator_residual", d.relator_residual}};
  } else {
    j["deformation"] = nullptr;
  }
  return j;
}

Representation representation_from_json(const nlohmann::json& j) {
  try {
    const auto model = model_from_id(j.at("model").get<std::string>());
    std::vector<std::pair<std::string, Matrix>> gens;
    for (const auto& g : j.at("generators")) gens.emplace_back(g.at("name").get<std::string>(), matrix_from_json(g.at("matrix")));
    Representation rep(model, std::move(gens), 1e-8);
    if (j.contains("preset") && j["preset"].is_string()) rep.preset_id = j["preset"].get<std::string>();
    if (j.contains("tau_image")) rep.tau_image = j["tau_image"].get<bool>();
    if (j.contains("relator")) {
      for (const auto& name : j["relator"]) {
        bool found = false;
        for (int l = 0; l < rep.letters(); ++l) {
          if (rep.letter_name(static_cast<std::uint8_t>(l)) == name.get<std::string>()) {
            rep.relator.push_back(static_cast<std::uint8_t>(l));
            found = true;
            break;
          }
        }
        if (!found) throw Error(ErrorCode::Parse, "relator letter '" + name.get<std::string>() + "' is not a generator");
      }
    }
    if (j.contains("deformation") && j["deformation"].is_object()) {
      const auto& d = j["deformation"];
      rep.deformation = DeformationRecord{d.at("base").get<std::string>(), d.at("eps").get<double>(),
                                          d.at("seed").get<std::uint64_t>(), d.value("relator_residual", 0.0)};
    }
    return rep;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Parse, e.what());
  }
}

namespace {

double angle_of(const Eigen::Vector2d& v) {
  double a = std::atan2(v(1), v(0));
  a = std::fmod(a, std::numbers::pi);
  if (a < 0) a += std::numbers::pi;
  return a;
}

double mod_pi(double a) {
  a = std::fmod(a, std::numbers::pi);
  return a < 0 ? a + std::numbers::pi : a;
}

double act_angle(const Eigen::Matrix2d& g, double a) { return angle_of(g * Eigen::Vector2d(std::cos(a), std::sin(a))); }

double attracting_angle(const Eigen::Matrix2d& g) {
  Eigen::EigenSolver<Eigen::Matrix2d> es(g);
  const auto ev = es.eigenvalues();
  const int top = std::abs(ev(0)) >= std::abs(ev(1)) ? 0 : 1;
  return angle_of(es.eigenvectors().col(top).real());
}

}  // namespace

PingPongReport ping_pong_check(const Representation& rep, double half_width) {
  if (rep.model()->dim() != 2 || rep.model()->scalar != ScalarTag::Real)
    throw Error(ErrorCode::ModelMismatch, "ping-pong check needs SL(2,R) generators");
  PingPongReport out;
  const int n = rep.letters();
  std::vector<Eigen::Matrix2d> g(static_cast<std::size_t>(n));
  std::vector<double> centre(static_cast<std::size_t>(n));
  for (int l = 0; l < n; ++l) {
    g[static_cast<std::size_t>(l)] = rep.letter(static_cast<std::uint8_t>(l)).matrix().to_real();
    centre[static_cast<std::size_t>(l)] = attracting_angle(g[static_cast<std::size_t>(l)]);
  }
  out.disjoint = true;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const double d = mod_pi(centre[static_cast<std::size_t>(i)] - centre[static_cast<std::size_t>(j)]);
      if (std::min(d, std::numbers::pi - d) <= 2 * half_width) out.disjoint = false;
    }
  out.mapped = true;
  out.min_slack = std::numeric_limits<double>::infinity();
  for (int l = 0; l < n; ++l) {
    const auto& m = g[static_cast<std::size_t>(l)];
    const double c = centre[static_cast<std::size_t>(l)];
    const double cinv = centre[static_cast<std::size_t>(inverse_letter(static_cast<std::uint8_t>(l)))];
    // complement of U_{l⁻¹}, traversed positively, maps to the positive arc between the endpoint images
    const double s = act_angle(m, cinv + half_width);
    const double e = act_angle(m, cinv + std::numbers::pi - half_width);
    const double lo = c - half_width;
    const double o1 = mod_pi(s - lo), o2 = mod_pi(e - lo);
    const double slack = std::min(o1, 2 * half_width - o2);
    if (!(o1 <= o2 && o2 <= 2 * half_width && slack > 0)) out.mapped = false;
    out.min_slack = std::min(out.min_slack, o1 <= o2 ? slack : -1.0);
  }
  return out;
}

std::uint64_t reduced_word_count(int letters, int len) {
  if (len == 0) return 1;
  std::uint64_t n = static_cast<std::uint64_t>(letters);
  for (int k = 1; k < len; ++k) {
    if (n > std::numeric_limits<std::uint64_t>::max() / static_cast<std::uint64_t>(letters)) return std::numeric_limits<std::uint64_t>::max();
    n *= static_cast<std::uint64_t>(letters - 1);
  }
  return n;
}

Word word_at(int letters, int len, std::uint64_t k) {
  Word w;
  if (len == 0) return w;
  const auto b = static_cast<std::uint64_t>(letters - 1);
  std::uint64_t high = 1;
  for (int i = 1; i < len; ++i) high *= b;
  w.push_back(static_cast<std::uint8_t>(k / high));
  std::uint64_t rem = k % high;
  for (int i = 1; i < len; ++i) {
    high /= b;
    const auto d = static_cast<std::uint8_t>(rem / high);
    rem %= high;
    const std::uint8_t forbidden = inverse_letter(w.back());
    w.push_back(static_cast<std::uint8_t>(d >= forbidden ? d + 1 : d));
  }
  return w;
}

namespace {

std::uint64_t ball_count(int letters, int max_len) {
  std::uint64_t total = 0;
  for (int len = 1; len <= max_len; ++len) {
    const std::uint64_t n = reduced_word_count(letters, len);
    if (n > std::numeric_limits<std::uint64_t>::max() - total) return std::numeric_limits<std::uint64_t>::max();
    total += n;
  }
  return total;
}

void check_cap(const Representation& rep, int max_len, std::uint64_t cap) {
  if (max_len < 1) throw Error(ErrorCode::InvalidArgument, "max_len must be >= 1");
  const std::uint64_t n = ball_count(rep.letters(), max_len);
  if (n > cap)
    throw Error(ErrorCode::BallTooLarge,
                "word ball has " + std::to_string(n) + " words, cap is " + std::to_string(cap));
}

void dfs(const Representation& rep, int max_len, Word& w, const Matrix& m,
         const std::function<void(const Word&, const Matrix&)>& visit) {
  visit(w, m);
  if (static_cast<int>(w.size()) == max_len) return;
  const std::uint8_t forbidden = inverse_letter(w.back());
  for (int l = 0; l < rep.letters(); ++l) {
    const auto letter = static_cast<std::uint8_t>(l);
    if (letter == forbidden) continue;
    w.push_back(letter);
    dfs(rep, max_len, w, m * rep.letter(letter).matrix(), visit);
    w.pop_back();
  }
}

std::uint64_t matrix_hash(const Matrix& m, double tol) {
  const double scale = tol * std::max(1.0, m.max_abs());
  std::uint64_t h = 0x243f6a8885a308d3ULL;
  const int comps = tag_components(m.tag());
  for (const auto& q : m.entries()) {
    const double c[4] = {q.w, q.x, q.y, q.z};
    for (int k = 0; k < comps; ++k) {
      const auto v = static_cast<std::int64_t>(std::llround(c[k] / scale));
      h = mix_seed(h, static_cast<std::uint64_t>(v));
    }
  }
  return h;
}

}  // namespace

void visit_ball(const Representation& rep, int max_len, const std::function<void(const Word&, const Matrix&)>& visit,
                std::uint64_t cap) {
  check_cap(rep, max_len, cap);
  parallel_for(static_cast<std::size_t>(rep.letters()), [&](std::size_t l) {
    Word w{static_cast<std::uint8_t>(l)};
    dfs(rep, max_len, w, rep.letter(static_cast<std::uint8_t>(l)).matrix(), visit);
  });
}

WordBall enumerate_ball(const Representation& rep, int max_len, double dedup_tol, std::uint64_t cap, bool store) {
  check_cap(rep, max_len, cap);
  WordBall ball;
  ball.max_len = max_len;
  ball.dedup_tol = dedup_tol;
  ball.free_count = ball_count(rep.letters(), max_len);
  if (dedup_tol <= 0) {
    ball.distinct_count = ball.free_count;
    if (store) {
      ball.words.reserve(static_cast<std::size_t>(ball.free_count));
      for (int l = 0; l < rep.letters(); ++l) {
        Word w{static_cast<std::uint8_t>(l)};
        dfs(rep, max_len, w, rep.letter(w[0]).matrix(), [&](const Word& word, const Matrix&) { ball.words.push_back(word); });
      }
    }
    return ball;
  }
  // (hash, lexicographic position); equal hashes keep the first word
  std::vector<std::pair<std::uint64_t, std::uint64_t>> keys;
  keys.reserve(static_cast<std::size_t>(ball.free_count));
  std::uint64_t pos = 0;
  for (int l = 0; l < rep.letters(); ++l) {
    Word w{static_cast<std::uint8_t>(l)};
    dfs(rep, max_len, w, rep.letter(w[0]).matrix(),
        [&](const Word&, const Matrix& m) { keys.emplace_back(matrix_hash(m, dedup_tol), pos++); });
  }
  std::sort(keys.begin(), keys.end());
  std::vector<std::uint64_t> kept;
  for (std::size_t i = 0; i < keys.size(); ++i)
    if (i == 0 || keys[i].first != keys[i - 1].first) kept.push_back(keys[i].second);
  ball.distinct_count = kept.size();
  if (store) {
    std::vector<std::pair<std::uint64_t, std::uint64_t>>().swap(keys);
    std::sort(kept.begin(), kept.end());
    ball.words.reserve(kept.size());
    std::size_t next = 0;
    pos = 0;
    for (int l = 0; l < rep.letters(); ++l) {
      Word w{static_cast<std::uint8_t>(l)};
      dfs(rep, max_len, w, rep.letter(w[0]).matrix(), [&](const Word& word, const Matrix&) {
        if (next < kept.size() && kept[next] == pos) {
          ball.words.push_back(word);
          ++next;
        }
        ++pos;
      });
    }
  }
  return ball;
}

double alpha_r_of(const GroupModel& model, const Matrix& g) {
  const auto sv = singular_values_any(g);
  const int r = model.rank();
  if (static_cast<int>(sv.size()) < r || sv[static_cast<std::size_t>(r - 1)] <= 0) return 0.0;
  return 2.0 * std::max(0.0, std::log(sv[static_cast<std::size_t>(r - 1)]));
}

GapReport anosov_gap_report(const Representation& rep, int max_len, std::uint64_t cap) {
  check_cap(rep, max_len, cap);
  const auto letters = static_cast<std::size_t>(rep.letters());
  const auto len = static_cast<std::size_t>(max_len);
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<std::vector<double>> mins(letters, std::vector<double>(len, inf)), maxs(letters, std::vector<double>(len, -inf));
  std::vector<std::uint64_t> zeros(letters, 0), counts(letters, 0);
  const auto& model = *rep.model();
  parallel_for(letters, [&](std::size_t l) {
    Word w{static_cast<std::uint8_t>(l)};
    dfs(rep, max_len, w, rep.letter(w[0]).matrix(), [&](const Word& word, const Matrix& m) {
      const double a = alpha_r_of(model, m);
      const std::size_t k = word.size() - 1;
      mins[l][k] = std::min(mins[l][k], a);
      maxs[l][k] = std::max(maxs[l][k], a);
      if (a <= 1e-12) ++zeros[l];
      ++counts[l];
    });
  });
  GapReport rep_out;
  rep_out.max_len = max_len;
  rep_out.per_length_min.assign(len, inf);
  rep_out.per_length_max.assign(len, -inf);
  for (std::size_t l = 0; l < letters; ++l) {
    for (std::size_t k = 0; k < len; ++k) {
      rep_out.per_length_min[k] = std::min(rep_out.per_length_min[k], mins[l][k]);
      rep_out.per_length_max[k] = std::max(rep_out.per_length_max[k], maxs[l][k]);
    }
    rep_out.zero_words += zeros[l];
    rep_out.words += counts[l];
  }
  // least squares line through (L, m_L)
  const double n = static_cast<double>(len);
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t k = 0; k < len; ++k) {
    const double x = static_cast<double>(k + 1), y = rep_out.per_length_min[k];
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double den = n * sxx - sx * sx;
  rep_out.slope = den > 0 ? (n * sxy - sx * sy) / den : 0.0;
  rep_out.intercept = (sy - rep_out.slope * sx) / n;
  rep_out.offset = -inf;
  rep_out.min_margin = inf;
  for (std::size_t k = 0; k < len; ++k) {
    const double m = rep_out.per_length_min[k];
    rep_out.offset = std::max(rep_out.offset, rep_out.slope * static_cast<double>(k + 1) - m);
    rep_out.min_margin = std::min(rep_out.min_margin, m);
  }
  rep_out.pass = rep_out.slope > 0.05 && rep_out.min_margin > 1e-12 &&
                 rep_out.offset <= rep_out.slope * static_cast<double>(max_len) / 2.0;
  return rep_out;
}

LeviGapReport levi_gap_report(const Representation& rep, int max_len, std::uint64_t cap) {
  const auto& model = *rep.model();
  if (!model.lagrangian()) throw Error(ErrorCode::ModelMismatch, "Levi gap report needs a Lagrangian family");
  const int r = model.size;
  if (r % 2 != 0) throw Error(ErrorCode::OddRank, "Levi gap report needs even rank");
  for (const auto& g : rep.generators()) {
    const Matrix& m = g.g.matrix();
    const double off = std::max(m.block(0, r, r, r).norm(), m.block(r, 0, r, r).norm());
    if (off > 1e-8 * m.norm()) throw Error(ErrorCode::NotInLevi, "generator " + g.name + " is not block diagonal");
  }
  check_cap(rep, max_len, cap);
  const int p = r / 2;
  const auto letters = static_cast<std::size_t>(rep.letters());
  std::vector<std::uint64_t> checked(letters, 0), bad(letters, 0);
  std::vector<double> sep(letters, std::numeric_limits<double>::infinity());
  parallel_for(letters, [&](std::size_t l) {
    Word w{static_cast<std::uint8_t>(l)};
    dfs(rep, max_len, w, rep.letter(w[0]).matrix(), [&](const Word& word, const Matrix& m) {
      if (word.size() < 3) return;
      const auto sv = singular_values_any(m.block(0, 0, r, r));
      const double s = std::min(std::log(sv[static_cast<std::size_t>(p - 1)]), -std::log(sv[static_cast<std::size_t>(p)]));
      ++checked[l];
      if (!(s > 1e-12)) ++bad[l];
      sep[l] = std::min(sep[l], s);
    });
  });
  LeviGapReport out;
  out.min_separation = std::numeric_limits<double>::infinity();
  for (std::size_t l = 0; l < letters; ++l) {
    out.checked += checked[l];
    out.violations += bad[l];
    out.min_separation = std::min(out.min_separation, sep[l]);
  }
  if (out.checked == 0) out.min_separation = 0;
  out.pass = out.checked > 0 && out.violations == 0;
  return out;
}

AttractingPoint attracting_point(const GroupElement& g, double tol, int max_iter, double gap_floor) {
  const auto& model = g.model();
  const int k = model->lagrangian() ? model->size : 1;
  const auto ev = eigenvalues(g.matrix());
  std::vector<double> mod;
  for (const auto& e : ev) mod.push_back(std::abs(e));
  std::sort(mod.begin(), mod.end(), std::greater<>());
  const double lo = mod[static_cast<std::size_t>(k)];
  const double gap = lo > 0 ? std::log(mod[static_cast<std::size_t>(k - 1)] / lo) : std::numeric_limits<double>::infinity();
  if (!(gap > gap_floor)) throw Error(ErrorCode::NoGap, "no eigenvalue gap at the flag");

  Rng rng(0x41747472ULL);
  Matrix z = orthonormalize(rng.gaussian(model->dim(), k, model->scalar));
  Matrix step = g.matrix() * (1.0 / g.matrix().max_abs());
  AttractingPoint out;
  bool converged = false;
  for (int it = 1; it <= max_iter; ++it) {
    Matrix next = orthonormalize(step * z);
    const double d = subspace_distance(next, z);
    z = std::move(next);
    out.iterations = it;
    if (d < tol) {
      converged = true;
      break;
    }
    // repeated squaring speeds up small gaps
    if (it % 8 == 0) {
      step = step * step;
      step *= 1.0 / step.max_abs();
    }
  }
  if (!converged) throw Error(ErrorCode::NonConvergence, "power iteration did not converge");
  const Matrix gz = g.matrix() * z;
  out.residual = spectral_norm(gz - z * (z.adjoint() * gz)) / spectral_norm(g.matrix());
  if (!(out.residual <= 1e-8)) throw Error(ErrorCode::NonConvergence, "attracting subspace is not invariant");
  out.point = ShilovPoint(model, z, 1e-8);
  out.gap = gap;
  return out;
}

std::vector<std::optional<AttractingPoint>> attracting_points_of(const Representation& rep, const std::vector<Word>& words) {
  std::vector<std::optional<AttractingPoint>> out(words.size());
  parallel_for(words.size(), [&](std::size_t i) {
    try {
      out[i] = attracting_point(GroupElement::trusted(rep.model(), rep.evaluate(words[i])));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NoGap && e.code() != ErrorCode::NonConvergence) throw;
    }
  });
  return out;
}

namespace {

// Seeded distinct word indices per length (all of them when the length is small).
std::vector<Word> sampled_words(int letters, int min_len, int max_len, std::size_t cap, std::uint64_t seed) {
  std::vector<Word> words;
  for (int len = min_len; len <= max_len; ++len) {
    const std::uint64_t n = reduced_word_count(letters, len);
    std::vector<std::uint64_t> idx;
    if (n <= cap) {
      for (std::uint64_t k = 0; k < n; ++k) idx.push_back(k);
    } else {
      // Floyd's sampling of cap distinct indices
      Rng rng(seed, static_cast<std::uint64_t>(len));
      std::set<std::uint64_t> chosen;
      for (std::uint64_t j = n - cap; j < n; ++j) {
        const std::uint64_t t = rng.next() % (j + 1);
        if (!chosen.insert(t).second) chosen.insert(j);
      }
      idx.assign(chosen.begin(), chosen.end());
    }
    for (auto k : idx) words.push_back(word_at(letters, len, k));
  }
  return words;
}

}  // namespace

LimitSample sample_limit_set(const Representation& rep, int max_len, std::uint64_t seed, const LimitSampleOptions& opt) {
  if (max_len < 1) throw Error(ErrorCode::InvalidArgument, "max_len must be >= 1");
  const int min_len = std::max(1, std::min(opt.min_len, max_len));
  std::vector<Word> words = sampled_words(rep.letters(), min_len, max_len, opt.per_length_cap, seed);
  const auto pts = attracting_points_of(rep, words);
  LimitSample out;
  out.candidates = words.size();
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (!pts[i]) {
      ++out.no_gap;
      continue;
    }
    const auto& p = pts[i]->point;
    bool keep = true;
    for (const auto& q : out.points) {
      if (opt.separation > 0 && transversality_margin(p, q) > opt.separation) continue;
      const bool merge = frame_distance(p, q) < opt.dedup_tol;
      if (!merge && opt.separation <= 0) continue;
      ++(merge ? out.merged : out.thinned);
      keep = false;
      break;
    }
    if (!keep) continue;
    out.points.push_back(p);
    out.words.push_back(words[i]);
    out.word_lengths.push_back(static_cast<int>(words[i].size()));
    out.residuals.push_back(pts[i]->residual);
  }
  return out;
}

MaslovZeroReport verify_maslov_zero(const std::vector<ShilovPoint>& sample, std::size_t n_triples, std::uint64_t seed) {
  const std::size_t n = sample.size();
  if (n < 3) throw Error(ErrorCode::TooFewPoints, "need at least 3 sample points");
  std::vector<std::array<std::size_t, 3>> triples;
  const double total = static_cast<double>(n) * static_cast<double>(n - 1) * static_cast<double>(n - 2) / 6.0;
  if (total <= static_cast<double>(n_triples)) {
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = a + 1; b < n; ++b)
        for (std::size_t c = b + 1; c < n; ++c) triples.push_back({a, b, c});
  } else {
    for (std::size_t t = 0; t < n_triples; ++t) {
      Rng rng(seed, t);
      std::size_t a = rng.index(n), b = rng.index(n - 1), c = rng.index(n - 2);
      if (b >= a) ++b;
      const std::size_t lo = std::min(a, b), hi = std::max(a, b);
      if (c >= lo) ++c;
      if (c >= hi) ++c;
      triples.push_back({a, b, c});
    }
  }
  struct Res {
    int idx = -1;
    double margin = 0;
  };
  std::vector<Res> res(triples.size());
  parallel_for(triples.size(), [&](std::size_t t) {
    const auto& [a, b, c] = triples[t];
    try {
      const auto tt = maslov_index(sample[a], sample[b], sample[c]);
      res[t] = {tt.idx, std::min({tt.margin_ab, tt.margin_bc, tt.margin_ac})};
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NotPairwiseTransverse && e.code() != ErrorCode::DegenerateSignature) throw;
    }
  });
  MaslovZeroReport out;
  out.triples = triples.size();
  out.idx_histogram.assign(static_cast<std::size_t>(sample[0].model()->rank() + 1), 0);
  out.min_margin = std::numeric_limits<double>::infinity();
  for (const auto& r : res) {
    if (r.idx < 0) {
      ++out.skipped;
      continue;
    }
    ++out.idx_histogram[static_cast<std::size_t>(r.idx)];
    if (r.idx != 0) ++out.violations;
    out.min_margin = std::min(out.min_margin, r.margin);
  }
  if (out.skipped == out.triples) out.min_margin = 0;
  return out;
}

ShilovPoint domain_centre(const ModelPtr& model) {
  if (model->lagrangian()) return chart_point(model, hermitian_coord(Matrix::identity(model->size, model->scalar)));
  std::vector<double> v(static_cast<std::size_t>(model->size), 0.0);
  v.back() = 1.0;
  return chart_point(model, minkowski_coord(v));
}

ShilovPoint dual_centre(const ModelPtr& model) {
  if (model->lagrangian()) return chart_point(model, hermitian_coord(Matrix::identity(model->size, model->scalar) * -1.0));
  std::vector<double> v(static_cast<std::size_t>(model->size), 0.0);
  v.back() = -1.0;
  return chart_point(model, minkowski_coord(v));
}

DomainCertificate proper_domain_certificate(const Representation& rep, const std::vector<ShilovPoint>& sample,
                                            int max_len, std::size_t probe_count, std::uint64_t seed,
                                            std::size_t per_length_cap) {
  const auto& model = rep.model();
  const ShilovPoint centre = domain_centre(model);
  std::vector<ShilovPoint> orbit{centre};
  if (max_len >= 1) {
    for (const auto& w : sampled_words(rep.letters(), 1, max_len, per_length_cap, mix_seed(seed, 0x6f7262ULL)))
      orbit.push_back(act(GroupElement::trusted(model, rep.evaluate(w)), centre));
  }
  auto score = [&](const ShilovPoint& z0) {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& p : orbit) m = std::min(m, transversality_margin(z0, p));
    for (const auto& p : sample) m = std::min(m, transversality_margin(z0, p));
    return m;
  };
  DomainCertificate cert;
  cert.orbit_points = orbit.size();
  cert.limit_points = sample.size();
  std::vector<ShilovPoint> candidates;
  if (rep.tau_image) candidates.push_back(dual_centre(model));
  for (std::size_t k = 0; k < probe_count; ++k) candidates.push_back(random_shilov_point(model, mix_seed(seed, k), 1.0));
  bool have = false;
  for (const auto& z : candidates) {
    ++cert.candidates_tried;
    const double m = score(z);
    if (!have || m > cert.min_margin) {
      cert.z0 = z;
      cert.min_margin = m;
      have = true;
    }
    if (cert.min_margin > kCertificateMargin) break;
  }
  cert.pass = have && cert.min_margin > kCertificateMargin;
  if (!cert.pass) throw Error(ErrorCode::NoCertificate, "no candidate z0 is transverse to the sampled data");
  return cert;
}

ConvexCore convex_core_sample(const Representation& rep, const std::vector<ShilovPoint>& sample,
                              const std::vector<ShilovPoint>& base, const ChartedChart& chart, int max_len,
                              std::uint64_t seed, std::size_t per_length_cap) {
  if (base.empty()) throw Error(ErrorCode::EmptyInput, "convex core needs base points");
  const auto& model = rep.model();
  std::vector<Word> words{Word{}};
  if (max_len >= 1) {
    auto more = sampled_words(rep.letters(), 1, max_len, per_length_cap, mix_seed(seed, 0x636f72ULL));
    words.insert(words.end(), more.begin(), more.end());
  }
  std::vector<Matrix> coords;
  std::vector<ShilovPoint> long_points;
  std::vector<Word> long_words;
  for (const auto& w : words) {
    const GroupElement g = GroupElement::trusted(model, rep.evaluate(w));
    for (const auto& x : base) {
      const ShilovPoint p = act(g, x);
      coords.push_back(coordinates_in(chart, p).value);
      if (max_len >= 1 && static_cast<int>(w.size()) == max_len) {
        long_points.push_back(p);
        long_words.push_back(w);
      }
    }
  }
  ConvexCore out{CausalHull(model, std::move(coords)), words, 0.0, long_points.size()};
  if (!long_points.empty()) {
    const auto ideal = attracting_points_of(rep, long_words);
    std::vector<double> dist(long_points.size(), 0.0);
    parallel_for(long_points.size(), [&](std::size_t i) {
      double d = std::numeric_limits<double>::infinity();
      if (ideal[i]) d = frame_distance(long_points[i], ideal[i]->point);
      for (const auto& q : sample) d = std::min(d, frame_distance(long_points[i], q));
      dist[i] = d;
    });
    out.ideal_residual = *std::max_element(dist.begin(), dist.end());
  }
  return out;
}

Representation deform(const Representation& rep, double eps, std::uint64_t seed) {
  if (eps < 0) throw Error(ErrorCode::InvalidArgument, "eps must be nonnegative");
  std::vector<std::pair<std::string, Matrix>> gens;
  for (std::size_t i = 0; i < rep.generators().size(); ++i) {
    const auto& g = rep.generators()[i];
    gens.emplace_back(g.name, random_lie_perturbation(g.g, eps, seed + i).matrix());
  }
  Representation out(rep.model(), std::move(gens), 1e-8);
  out.relator = rep.relator;
  out.tau_image = rep.tau_image;
  DeformationRecord rec;
  rec.base = rep.deformation ? rep.deformation->base : rep.preset_id;
  rec.eps = eps;
  rec.seed = seed;
  rec.relator_residual = out.relator_residual();
  out.deformation = rec;
  return out;
}

}  // namespace causalflag
