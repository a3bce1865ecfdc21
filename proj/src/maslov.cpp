#include "causalflag/maslov.hpp"

#include "causalflag/causal.hpp"
#include "causalflag/error.hpp"
#include "causalflag/parallel.hpp"
#include "causalflag/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace causalflag {

TripleType maslov_index(const ShilovPoint& a, const ShilovPoint& b, const ShilovPoint& c) {
  TripleType t;
  t.margin_ab = transversality_margin(a, b);
  t.margin_bc = transversality_margin(b, c);
  t.margin_ac = transversality_margin(a, c);
  if (!(std::min({t.margin_ab, t.margin_bc, t.margin_ac}) > kTransverseTol))
    throw Error(ErrorCode::NotPairwiseTransverse, "triple is not pairwise transverse");
  const auto& model = *a.model();
  const GroupElement s = standardize_pair(a, c);
  const auto ev = chart_spectrum(model, chart_coordinates(act(s, b)).value);
  double lo = std::numeric_limits<double>::infinity(), hi = 0;
  for (double e : ev) {
    lo = std::min(lo, std::abs(e));
    hi = std::max(hi, std::abs(e));
  }
  t.spectral_margin = hi > 0 ? lo / hi : 0.0;
  const double tol = spectrum_tol(ev);
  if (lo <= tol) throw Error(ErrorCode::DegenerateSignature, "classifying signature has a zero eigenvalue");
  const auto sig = signature_of(ev, tol);
  t.r = model.rank();
  t.i = sig.pos;
  t.idx = std::abs(t.r - 2 * t.i);
  t.i_min = std::min(t.i, t.r - t.i);
  return t;
}

ShilovPoint random_shilov_point(const ModelPtr& model, std::uint64_t seed, double scale) {
  return act(random_group_element(model, seed, scale), base_points(model).first);
}

GroupElement random_bounded_element(const ModelPtr& model, std::uint64_t seed, double max_cond) {
  for (std::uint64_t k = 0; k < 64; ++k) {
    GroupElement g = random_group_element(model, mix_seed(seed, k));
    const auto sv = singular_values_any(g.matrix());
    if (sv.back() > 0 && sv.front() / sv.back() <= max_cond) return g;
  }
  return GroupElement::identity(model);
}

MaslovInvarianceReport maslov_invariance_report(const ModelPtr& model, std::size_t n_trials, std::uint64_t seed,
                                                double skip_margin) {
  struct Trial {
    bool skipped = false;
    bool invariance = true, swap = true, parity = true;
    int idx = 0;
    double margin = 0;
  };
  std::vector<Trial> res(n_trials);
  parallel_for(n_trials, [&](std::size_t k) {
    Trial& t = res[k];
    const std::uint64_t s = mix_seed(seed, k);
    const auto a = random_shilov_point(model, mix_seed(s, 1), 1.5);
    const auto b = random_shilov_point(model, mix_seed(s, 2), 1.5);
    const auto c = random_shilov_point(model, mix_seed(s, 3), 1.5);
    const auto g = random_bounded_element(model, mix_seed(s, 4));
    const ShilovPoint ga = act(g, a), gb = act(g, b), gc = act(g, c);
    const double m = std::min({transversality_margin(a, b), transversality_margin(b, c), transversality_margin(a, c),
                               transversality_margin(ga, gb), transversality_margin(gb, gc),
                               transversality_margin(ga, gc)});
    t.margin = m;
    if (!(m >= skip_margin)) {
      t.skipped = true;
      return;
    }
    try {
      const auto base = maslov_index(a, b, c);
      const auto moved = maslov_index(ga, gb, gc);
      const auto swapped = maslov_index(a, c, b);
      t.idx = base.idx;
      t.invariance = moved.idx == base.idx;
      t.swap = swapped.idx == base.idx;
      t.parity = (base.idx - base.r) % 2 == 0;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::DegenerateSignature && e.code() != ErrorCode::NotPairwiseTransverse) throw;
      t.skipped = true;
    }
  });
  MaslovInvarianceReport rep;
  rep.trials = n_trials;
  rep.idx_histogram.assign(static_cast<std::size_t>(model->rank() + 1), 0);
  rep.min_margin = std::numeric_limits<double>::infinity();
  for (const auto& t : res) {
    if (t.skipped) {
      ++rep.skipped;
      continue;
    }
    ++rep.evaluated;
    rep.min_margin = std::min(rep.min_margin, t.margin);
    ++rep.idx_histogram[static_cast<std::size_t>(t.idx)];
    if (!t.invariance) ++rep.invariance_violations;
    if (!t.swap) ++rep.swap_violations;
    if (!t.parity) ++rep.parity_violations;
  }
  if (rep.evaluated == 0) rep.min_margin = 0;
  return rep;
}

nlohmann::json to_json(const TripleType& t) {
  return {{"i", t.i},
          {"idx", t.idx},
          {"i_min", t.i_min},
          {"r", t.r},
          {"margin_ab", t.margin_ab},
          {"margin_bc", t.margin_bc},
          {"margin_ac", t.margin_ac},
          {"spectral_margin", t.spectral_margin}};
}

}  // namespace causalflag
