// Acceptance driver: one PASS/FAIL line per criterion, nonzero exit if any fails.
// Tolerances, sizes and time limits are fixed here.

#include "causalflag/causal.hpp"
#include "causalflag/einstein.hpp"
#include "causalflag/experiments.hpp"
#include "causalflag/maslov.hpp"
#include "causalflag/random.hpp"
#include "causalflag/reps.hpp"
#include "oracles.hpp"

#include <nlohmann/json.hpp>
#include <unsupported/Eigen/MatrixFunctions>

#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>

using namespace causalflag;
namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kSeed = 20240611;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// 1. pos(X + Y) >= i on 10⁴ trials per family and i, under 30 s; the library
// counts are re-derived with reference eigenvalues on independent draws.
Outcome sylvester() {
  const auto t0 = std::chrono::steady_clock::now();
  std::size_t failures = 0, trials = 0;
  for (const char* id : {"sp4", "su22", "sostar8"}) {
    const auto m = model_from_id(id);
    for (int i = 0; i <= m->size; ++i) {
      const auto rep = sylvester_orbit_check(m, i, 10000, mix_seed(kSeed, static_cast<std::uint64_t>(i)));
      failures += rep.failures;
      trials += rep.trials;
    }
  }
  const double t = seconds_since(t0);
  std::size_t ref_failures = 0;
  std::mt19937_64 g(kSeed);
  for (const char* id : {"sp4", "su22", "sostar8"}) {
    const auto m = model_from_id(id);
    for (int i = 0; i <= m->size; ++i)
      for (int k = 0; k < 10000; ++k) {
        std::vector<double> d(static_cast<std::size_t>(m->size));
        for (int j = 0; j < m->size; ++j) d[static_cast<std::size_t>(j)] = j < i ? 1.0 + j : -1.0 - j;
        const Matrix q = oracle::random_matrix(g, m->size, m->size, m->scalar);
        const Matrix x = q * Matrix::diagonal(d, m->scalar) * q.adjoint();
        const Matrix y = oracle::random_positive(g, m->size, m->scalar, 1e-3, 3.0);
        int pos = 0;
        for (double e : oracle::eigs(x + y)) pos += e > 0;
        ref_failures += pos < i;
      }
  }
  return {failures == 0 && ref_failures == 0 && trials == 90000 && t < 30.0,
          std::to_string(trials) + " trials, " + std::to_string(failures) + " failures, reference recount " +
              std::to_string(ref_failures) + ", " + fmt("%.1f s", t)};
}

// 2. G-invariance and swap symmetry of idx on 10⁴ triples per family, under 60 s.
Outcome maslov_invariance() {
  const auto t0 = std::chrono::steady_clock::now();
  std::size_t violations = 0, evaluated = 0, skipped = 0;
  for (const char* id : {"sp4", "su22", "sostar8", "so42"}) {
    const auto rep = maslov_invariance_report(model_from_id(id), 10000, kSeed);
    violations += rep.violations();
    evaluated += rep.evaluated;
    skipped += rep.skipped;
  }
  const double t = seconds_since(t0);
  // a skip rate above 1% would make the count vacuous
  return {violations == 0 && skipped * 100 <= evaluated + skipped && t < 60.0,
          std::to_string(evaluated) + " evaluated, " + std::to_string(skipped) + " skipped, " +
              std::to_string(violations) + " violations, " + fmt("%.1f s", t)};
}

// 3. tau0-sp4-f2 at length 10: >= 100 limit points, pairwise margins > 1e-6
// (reference determinants), zero idx != 0 triples over 10³ draws, under 5 min.
Outcome restriction() {
  const auto t0 = std::chrono::steady_clock::now();
  const Representation rep = preset("tau0-sp4-f2");
  const LimitSample ls = sample_limit_set(rep, 10, kSeed);
  const auto zero = verify_maslov_zero(ls.points, 1000, kSeed);
  const double t = seconds_since(t0);
  const std::size_t n = ls.points.size();
  std::vector<Eigen::MatrixXcd> q;
  for (const auto& p : ls.points) q.push_back(oracle::span_basis(oracle::chi(p.frame())));
  double worst = 1e300;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      Eigen::MatrixXcd m(4, 4);
      m << q[i], q[j];
      worst = std::min(worst, std::abs(m.determinant()));
    }
  // reference index on seeded triples
  std::size_t ref_nonzero = 0, ref_checked = 0;
  std::mt19937_64 g(kSeed);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  while (ref_checked < 1000 && n >= 3) {
    const std::size_t a = pick(g), b = pick(g), c = pick(g);
    if (a == b || b == c || a == c) continue;
    double gap = 0;
    const int i = oracle::triple_index(*rep.model(), ls.points[a].frame(), ls.points[b].frame(), ls.points[c].frame(), &gap);
    ref_nonzero += std::abs(2 - 2 * i) != 0;
    ++ref_checked;
  }
  return {n >= 100 && worst > 1e-6 && zero.triples == 1000 && zero.violations == 0 && ref_nonzero == 0 && t < 300.0,
          std::to_string(n) + " points, min margin " + fmt("%.6e", worst) + ", " + std::to_string(zero.violations) +
              "/" + std::to_string(zero.triples) + " nonzero triples, reference " + std::to_string(ref_nonzero) + "/" +
              std::to_string(ref_checked) + ", " + fmt("%.1f s", t)};
}

// 4. 10⁴ (τ_p(A), Z) pairs, Z in D_std: the image stays in D_std with margin > 1e-10.
Outcome diamond_preservation() {
  std::mt19937_64 g(kSeed);
  std::normal_distribution<double> nd(0.0, 1.0);
  std::size_t pairs = 0, violations = 0;
  double worst = 1e300;
  for (const char* id : {"sp4", "su22", "sostar8", "sp8"}) {
    const auto m = model_from_id(id);
    for (int k = 0; k < 2500; ++k) {
      Eigen::Matrix2d x;
      x << nd(g), nd(g), nd(g), nd(g);
      x -= 0.5 * x.trace() * Eigen::Matrix2d::Identity();
      if (x.norm() > 2.0) x *= 2.0 / x.norm();
      const Eigen::Matrix2d a = x.exp();
      const Matrix z = oracle::random_positive(g, m->size, m->scalar, 0.1, 10.0);
      const ShilovPoint w = act(tau_p(a, m), chart_point(m, hermitian_coord(z)));
      const Eigen::MatrixXcd c = oracle::chart_of(w.frame());
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es((c + c.adjoint()) / 2.0, Eigen::EigenvaluesOnly);
      const double lo = es.eigenvalues()(0);
      worst = std::min(worst, lo);
      violations += !(lo > 1e-10);
      ++pairs;
    }
  }
  return {pairs == 10000 && violations == 0,
          std::to_string(pairs) + " pairs, " + std::to_string(violations) + " violations, min eigenvalue " +
              fmt("%.3g", worst)};
}

// 5. Hull idempotence and two-chart agreement on 10⁴ probes.
Outcome chart_independence() {
  std::size_t dis = 0, idem = 0, probes = 0;
  for (const char* id : {"sp4", "su22"}) {
    const auto r = run_experiment({{"command", "chart-independence"}, {"model", id}, {"probes", 10000}, {"seed", kSeed}});
    const auto& rep = r.report.contains("result") ? r.report["result"] : r.report;
    if (!rep.contains("chart_independence")) return {false, std::string(id) + ": " + r.report.dump()};
    dis += rep["chart_independence"]["disagreements"].get<std::size_t>();
    idem += rep["idempotence"]["disagreements"].get<std::size_t>();
    probes += rep["chart_independence"]["probes"].get<std::size_t>();
  }
  return {dis == 0 && idem == 0 && probes == 20000,
          std::to_string(probes) + " probes, " + std::to_string(dis) + " chart disagreements, " + std::to_string(idem) +
              " idempotence disagreements"};
}

// 6. Deformations eps in {1e-4, 1e-3}: slope > 0.05, certificate margin > 1e-6,
// matched limit points move <= 50·eps, under 5 min.
Outcome deformation() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto r = run_experiment(
      {{"command", "rep-deform"}, {"rep", "tau0-sp4-f2"}, {"eps", {1e-4, 1e-3}}, {"max_word_len", 10}, {"seed", kSeed}});
  const double t = seconds_since(t0);
  const auto& rep = r.report.contains("result") ? r.report["result"] : r.report;
  if (!rep.contains("per_eps")) return {false, r.report.dump()};
  bool ok = rep["per_eps"].size() == 2;
  std::string detail;
  for (const auto& e : rep["per_eps"]) {
    const double eps = e["eps"].get<double>();
    const double slope = e["gap"]["slope"].get<double>();
    const double margin = e["certificate"].value("min_margin", 0.0);
    const double move = e["max_move"].get<double>();
    const bool gap_pass = e["gap"]["pass"].get<bool>();
    const bool cert = e["certificate"].value("pass", false);
    const auto lost = e["lost_words"].get<std::size_t>();
    ok = ok && gap_pass && slope > 0.05 && cert && margin > 1e-6 && lost == 0 && move <= 50 * eps;
    detail += "eps " + fmt("%.0e", eps) + ": slope " + fmt("%.3f", slope) + ", margin " + fmt("%.3g", margin) +
              ", move " + fmt("%.3g", move) + "; ";
  }
  return {ok && t < 300.0, detail + fmt("%.1f s", t)};
}

// 7. ein_maslov_sign = maslov_index on 10⁴ Ein^{3,1} triples; photon check on an
// 8-point negative sample over 10³ photons.
Outcome einstein() {
  const auto m = model_from_id("so42");
  std::size_t compared = 0, disagree = 0, degenerate = 0;
  for (std::uint64_t s = 0; s < 10000; ++s) {
    const EinPoint a = random_ein_point(m, mix_seed(kSeed, 3 * s)), b = random_ein_point(m, mix_seed(kSeed, 3 * s + 1)),
                   c = random_ein_point(m, mix_seed(kSeed, 3 * s + 2));
    if (!transverse(a, b) || !transverse(b, c) || !transverse(a, c)) {
      ++degenerate;
      continue;
    }
    ++compared;
    disagree += ein_maslov_sign(a, b, c) != maslov_index(a, b, c).idx;
  }
  const auto photons = photon_convexity_check(spacelike_circle_sample(m, 8, kSeed), 1000, kSeed);
  return {compared + degenerate == 10000 && degenerate == 0 && disagree == 0 && photons.photons == 1000 &&
              photons.violations == 0 && photons.checked > 0,
          std::to_string(compared) + " triples, " + std::to_string(disagree) + " disagreements; " +
              std::to_string(photons.photons) + " photons, " + std::to_string(photons.checked) + " checked, " +
              std::to_string(photons.violations) + " violations"};
}

// 8. log 3 on the interval to 1e-10; triangle and projective invariance on 10³
// disk samples to 1e-9 (reference chord formula alongside).
Outcome hilbert() {
  const ConvexOracle interval = [](const Eigen::VectorXd& v) { return std::abs(v(0)) < std::abs(v(1)); };
  const double d = hilbert_distance(interval, Eigen::Vector2d(0.0, 1.0), Eigen::Vector2d(0.5, 1.0));
  const double err = std::abs(d - std::log(3.0));
  const ConvexOracle disk = [](const Eigen::VectorXd& v) { return v(0) * v(0) + v(1) * v(1) < v(2) * v(2); };
  auto chord = [](Eigen::Vector2d p, Eigen::Vector2d q) {
    const Eigen::Vector2d dv = q - p;
    const double a = dv.squaredNorm(), b = 2 * p.dot(dv), c = p.squaredNorm() - 1;
    const double disc = std::sqrt(b * b - 4 * a * c);
    const double ta = (-b - disc) / (2 * a), tb = (-b + disc) / (2 * a);
    return std::log((tb * (1 - ta)) / ((tb - 1) * (-ta)));
  };
  std::mt19937_64 g(kSeed);
  std::uniform_real_distribution<double> u(-0.9, 0.9), s(-1.5, 1.5), phi(0, 6.283185307179586);
  auto point = [&] {
    Eigen::Vector2d p;
    do p = Eigen::Vector2d(u(g), u(g));
    while (p.norm() >= 0.9);
    return p;
  };
  double tri = -1e300, inv = 0, ref = 0;
  for (int k = 0; k < 1000; ++k) {
    const Eigen::Vector2d p = point(), q = point(), r = point();
    const Eigen::Vector3d x(p(0), p(1), 1), y(q(0), q(1), 1), z(r(0), r(1), 1);
    const double xy = hilbert_distance(disk, x, y), yz = hilbert_distance(disk, y, z), xz = hilbert_distance(disk, x, z);
    tri = std::max(tri, xz - xy - yz);
    const double sh = s(g), t = phi(g), ch = std::cosh(sh), sn = std::sinh(sh), c = std::cos(t), sa = std::sin(t);
    Eigen::Matrix3d boost, rot;
    boost << ch, 0, sn, 0, 1, 0, sn, 0, ch;
    rot << c, -sa, 0, sa, c, 0, 0, 0, 1;
    const Eigen::Matrix3d a = rot * boost;
    inv = std::max(inv, std::abs(hilbert_distance(disk, a * x, a * y) - xy));
    if ((p - q).norm() > 1e-6) ref = std::max(ref, std::abs(xy - chord(p, q)));
  }
  const auto r = run_experiment({{"command", "hilbert"}, {"domain", "interval"}, {"samples", 1000}, {"seed", kSeed}});
  const bool cmd = r.verdict == Verdict::Pass;
  return {err <= 1e-10 && tri <= 1e-9 && inv <= 1e-9 && ref <= 1e-9 && cmd,
          "log 3 error " + fmt("%.2e", err) + ", max triangle excess " + fmt("%.2e", tri) + ", invariance " +
              fmt("%.2e", inv) + ", chord formula " + fmt("%.2e", ref) + ", command " + (cmd ? "PASS" : "VIOLATION")};
}

struct Proc {
  int code = -1;
  std::string out;
};

Proc shell(const std::string& cmd) {
  Proc r;
  FILE* p = popen((cmd + " 2>&1").c_str(), "r");
  if (!p) return r;
  char buf[4096];
  std::size_t n = 0;
  while ((n = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
  const int st = pclose(p);
  r.code = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// 9. Every command at small size, byte-identical outputs with 1 and 3 workers.
Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / ("causalflag_accept_" + std::to_string(::getpid()));
  fs::remove_all(root);
  fs::create_directories(root);
  std::ofstream(root / "triple.json") << R"(["p+", [[2, 0.5], [0.5, -1]], "p-"])";
  const std::vector<std::pair<std::string, std::string>> runs{
      {"sylvester-check", "--model su22 --trials 500"},
      {"maslov", "--model sp4 --triple " + (root / "triple.json").string()},
      {"maslov-invariance", "--trials 300"},
      {"rep-build", "--rep tau0-sostar8-f2"},
      {"rep-gap", "--rep tau0-sp4-f2 --max-word-len 6"},
      {"rep-limitset", "--rep tau0-sp4-f2 --max-word-len 6 --cap 64"},
      {"rep-verify-maslov0", "--rep tau0-su22-f2 --max-word-len 6 --cap 32 --triples 200"},
      {"rep-certificate", "--rep tau0-sp4-f2 --max-word-len 6 --cap 32"},
      {"rep-core", "--rep tau0-sp4-f2 --max-word-len 4 --cap 16 --probes 200"},
      {"rep-deform", "--rep tau0-sp4-f2 --max-word-len 6 --cap 32 --eps 1e-4,1e-3"},
      {"hull", "--model su22 --probes 300"},
      {"chart-independence", "--model sp4 --probes 500"},
      {"ein-invisible", "--n-queries 300"},
      {"ein-photon-convexity", "--photons 100 --scan 200"},
      {"hilbert", "--domain disk --samples 100"},
  };
  std::size_t identical = 0, differing = 0, errors = 0;
  std::string bad;
  for (const auto& [cmd, args] : runs) {
    int codes[2] = {0, 0};
    for (int k = 0; k < 2; ++k) {
      const fs::path out = root / cmd / (k == 0 ? "t1" : "t3");
      const std::string line = std::string("CAUSALFLAG_THREADS=") + (k == 0 ? "1" : "3") + " '" + CAUSALFLAG_CLI + "' " +
                               cmd + " " + args + " --seed 5 --csv --out '" + out.string() + "'";
      codes[k] = shell(line).code;
    }
    if (codes[0] == 1 || codes[1] == 1 || codes[0] != codes[1]) {
      ++errors;
      bad += " " + cmd;
      continue;
    }
    std::set<std::string> names[2];
    for (int k = 0; k < 2; ++k)
      for (const auto& e : fs::directory_iterator(root / cmd / (k == 0 ? "t1" : "t3")))
        names[k].insert(e.path().filename().string());
    bool same = !names[0].empty() && names[0] == names[1];
    for (const auto& name : names[0])
      same = same && slurp(root / cmd / "t1" / name) == slurp(root / cmd / "t3" / name);
    if (same) {
      ++identical;
    } else {
      ++differing;
      bad += " " + cmd;
    }
  }
  fs::remove_all(root);
  return {identical == runs.size(),
          std::to_string(identical) + "/" + std::to_string(runs.size()) + " commands identical, " +
              std::to_string(differing) + " differing, " + std::to_string(errors) + " failed to run" +
              (bad.empty() ? "" : ":" + bad)};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"sylvester orbit law", sylvester},
      {"maslov invariance", maslov_invariance},
      {"restriction at sample scale", restriction},
      {"diamond preservation", diamond_preservation},
      {"hull and chart independence", chart_independence},
      {"openness under deformation", deformation},
      {"einstein cross-validation", einstein},
      {"hilbert metric", hilbert},
      {"determinism", determinism},
  };
  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " " << (k + 1) << " " << criteria[k].first << ": " << o.detail << std::endl;
  }
  std::cout << (failed == 0 ? "all criteria pass" : std::to_string(failed) + " criteria fail") << std::endl;
  return failed == 0 ? 0 : 1;
}
