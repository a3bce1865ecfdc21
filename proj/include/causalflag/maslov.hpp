#pragma once

// Type and Maslov index of pairwise transverse triples.

#include "causalflag/shilov.hpp"

#include <cstdint>
#include <vector>

namespace causalflag {

struct TripleType {
  /// Positive index of the classifying signature, 0 ≤ i ≤ r. For SO(n,2) the
  /// stabilizer of (p⁺, p⁻) contains a time reversal, so only idx is invariant.
  int i = 0;
  /// |r − 2i|.
  int idx = 0;
  /// min(i, r − i): the representative of the unordered type.
  int i_min = 0;
  int r = 0;
  /// Transversality margins of (a,b), (b,c), (a,c).
  double margin_ab = 0, margin_bc = 0, margin_ac = 0;
  /// Smallest |eigenvalue| of the classifying chart coordinate, relative to its largest.
  double spectral_margin = 0;
};

/// Standardizes (a, c) to (p⁺, p⁻) and classifies the chart coordinate of b.
TripleType maslov_index(const ShilovPoint& a, const ShilovPoint& b, const ShilovPoint& c);

struct MaslovInvarianceReport {
  std::size_t trials = 0;
  std::size_t evaluated = 0;
  std::size_t skipped = 0;
  std::size_t invariance_violations = 0;
  std::size_t swap_violations = 0;
  std::size_t parity_violations = 0;
  double min_margin = 0;
  /// histogram[idx] over evaluated triples.
  std::vector<std::size_t> idx_histogram;
  std::size_t violations() const { return invariance_violations + swap_violations + parity_violations; }
};

/// Random pairwise transverse triples and random g (condition number ≤ 1e4):
/// idx(g·a, g·b, g·c) = idx(a, b, c) = idx(a, c, b). Triples with a margin below
/// skip_margin are counted as skipped.
MaslovInvarianceReport maslov_invariance_report(const ModelPtr& model, std::size_t n_trials, std::uint64_t seed,
                                                double skip_margin = 1e-8);

/// Seeded random point g·p⁺.
ShilovPoint random_shilov_point(const ModelPtr& model, std::uint64_t seed, double scale = 1.0);

/// Seeded random element with condition number at most max_cond.
GroupElement random_bounded_element(const ModelPtr& model, std::uint64_t seed, double max_cond = 1e4);

nlohmann::json to_json(const TripleType& t);

}  // namespace causalflag
