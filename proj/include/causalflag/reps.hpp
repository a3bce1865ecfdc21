#pragma once

// Finitely generated subgroups given by generator lists: word enumeration,
// presets, gap reports, limit-set sampling and sampled domain certificates.

#include "causalflag/causal.hpp"
#include "causalflag/maslov.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace causalflag {

struct Generator {
  std::string name;
  std::string inverse_name;
  GroupElement g;
  GroupElement inv;
};

struct DeformationRecord {
  std::string base;
  double eps = 0;
  std::uint64_t seed = 0;
  /// ‖relator product − I‖ after deformation (surface groups), else 0.
  double relator_residual = 0;
};

/// Letters 2k and 2k+1 stand for generator k and its inverse.
using Word = std::vector<std::uint8_t>;

inline std::uint8_t inverse_letter(std::uint8_t l) { return static_cast<std::uint8_t>(l ^ 1U); }

class Representation {
public:
  Representation() = default;
  /// Checks every generator (form defect ≤ bound) and computes the inverses.
  Representation(ModelPtr model, std::vector<std::pair<std::string, Matrix>> generators, double bound = 1e-9);

  const ModelPtr& model() const { return model_; }
  const std::vector<Generator>& generators() const { return gens_; }
  int letters() const { return 2 * static_cast<int>(gens_.size()); }
  const GroupElement& letter(std::uint8_t l) const { return (l & 1U) ? gens_[l >> 1].inv : gens_[l >> 1].g; }
  const std::string& letter_name(std::uint8_t l) const {
    return (l & 1U) ? gens_[l >> 1].inverse_name : gens_[l >> 1].name;
  }

  std::string preset_id;
  std::optional<DeformationRecord> deformation;
  /// Relator word for surface groups (empty for free groups).
  Word relator;
  /// Built through τ_p (possibly deformed afterwards).
  bool tau_image = false;

  Matrix evaluate(const Word& w) const;
  std::string word_name(const Word& w) const;
  /// Max over generators of ‖g·g⁻¹ − I‖.
  double inverse_residual() const;
  /// ‖ρ(relator) − I‖, 0 when there is no relator.
  double relator_residual() const;

private:
  ModelPtr model_;
  std::vector<Generator> gens_;
};

/// Catalog: f2-fuchsian-sl2, tau0-sp4-f2, tau0-su22-f2, tau0-sostar8-f2,
/// tau0-sp8-f2, genus2-sl2, tau0-sp4-genus2.
Representation preset(const std::string& id);
std::vector<std::string> preset_ids();
/// Representation with every generator the identity.
Representation trivial_representation(const ModelPtr& model, int generators);

nlohmann::json to_json(const Representation& rep);
Representation representation_from_json(const nlohmann::json& j);

struct PingPongReport {
  bool disjoint = false;
  bool mapped = false;
  /// Smallest angular slack of the image arcs inside the target arcs.
  double min_slack = 0;
  bool pass() const { return disjoint && mapped; }
};

/// Interval check on ℝP¹ for a two-generator subgroup of SL(2,ℝ): arcs of the
/// given half-width around the attracting fixed points of a, a⁻¹, b, b⁻¹ are
/// disjoint and g maps the complement of U_{g⁻¹} into U_g.
PingPongReport ping_pong_check(const Representation& rep, double half_width = 0.35);

/// Number of reduced words of length exactly len.
std::uint64_t reduced_word_count(int letters, int len);
/// Reduced word of length len with lexicographic index k.
Word word_at(int letters, int len, std::uint64_t k);

struct WordBall {
  int max_len = 0;
  double dedup_tol = 0;
  /// Free-group count of reduced words of length 1..max_len.
  std::uint64_t free_count = 0;
  /// Count after matrix dedup (equals free_count when dedup_tol = 0).
  std::uint64_t distinct_count = 0;
  /// Kept words (empty when store = false).
  std::vector<Word> words;
};

constexpr std::uint64_t kDefaultBallCap = 10'000'000;

/// Reduced words of length 1..max_len; dedup_tol > 0 merges words whose matrices
/// agree to dedup_tol (relative) by hashing quantized entries.
WordBall enumerate_ball(const Representation& rep, int max_len, double dedup_tol = 0.0,
                        std::uint64_t cap = kDefaultBallCap, bool store = true);

/// Calls visit(word, matrix) for every reduced word of length 1..max_len. Work is
/// split by first letter; visit must be thread-safe.
void visit_ball(const Representation& rep, int max_len, const std::function<void(const Word&, const Matrix&)>& visit,
                std::uint64_t cap = kDefaultBallCap);

/// α_r(μ(g)) = 2 ε_r(μ(g)) computed without the invertibility precondition.
double alpha_r_of(const GroupModel& model, const Matrix& g);

struct GapReport {
  int max_len = 0;
  std::uint64_t words = 0;
  /// per_length_min[L−1] = min α_r over words of length L.
  std::vector<double> per_length_min;
  std::vector<double> per_length_max;
  double slope = 0;
  double intercept = 0;
  /// c' = max_L (c·L − m_L).
  double offset = 0;
  double min_margin = 0;
  std::uint64_t zero_words = 0;
  bool pass = false;
};

GapReport anosov_gap_report(const Representation& rep, int max_len, std::uint64_t cap = kDefaultBallCap);

struct LeviGapReport {
  std::uint64_t checked = 0;
  std::uint64_t violations = 0;
  double min_separation = 0;
  bool pass = false;
};

/// Singular values of the upper-left r×r block split at r/2 for every word of length ≥ 3.
LeviGapReport levi_gap_report(const Representation& rep, int max_len, std::uint64_t cap = kDefaultBallCap);

struct AttractingPoint {
  ShilovPoint point;
  double residual = 0;
  int iterations = 0;
  double gap = 0;
};

/// Attracting fixed point of g by power iteration. Throws NoGap when the
/// eigenvalue-modulus gap at the flag is at most gap_floor, NonConvergence when
/// the iteration cap is hit.
AttractingPoint attracting_point(const GroupElement& g, double tol = 1e-12, int max_iter = 10000,
                                 double gap_floor = 1e-3);

struct LimitSample {
  std::vector<ShilovPoint> points;
  std::vector<Word> words;
  std::vector<int> word_lengths;
  std::vector<double> residuals;
  std::size_t candidates = 0;
  std::size_t no_gap = 0;
  std::size_t not_converged = 0;
  std::size_t merged = 0;
  std::size_t thinned = 0;
};

struct LimitSampleOptions {
  int min_len = 3;
  std::size_t per_length_cap = 256;
  /// Points closer than this frame distance are merged.
  double dedup_tol = 1e-6;
  /// Candidates whose transversality margin to an accepted point is at most
  /// this are dropped (0 disables).
  double separation = 1e-6;
};

/// Attracting points of seeded words of lengths min_len..max_len, in order of
/// (length, index), merged and thinned greedily.
LimitSample sample_limit_set(const Representation& rep, int max_len, std::uint64_t seed,
                             const LimitSampleOptions& opt = {});

/// Attracting points of the given words (entries are empty when the word has no gap).
std::vector<std::optional<AttractingPoint>> attracting_points_of(const Representation& rep,
                                                                 const std::vector<Word>& words);

struct MaslovZeroReport {
  std::size_t triples = 0;
  std::size_t violations = 0;
  std::size_t skipped = 0;
  double min_margin = 0;
  std::vector<std::size_t> idx_histogram;
};

/// idx = 0 on triples of sample points (all triples if there are at most
/// n_triples of them, else seeded draws).
MaslovZeroReport verify_maslov_zero(const std::vector<ShilovPoint>& sample, std::size_t n_triples, std::uint64_t seed);

struct DomainCertificate {
  ShilovPoint z0;
  double min_margin = 0;
  std::size_t orbit_points = 0;
  std::size_t limit_points = 0;
  std::size_t candidates_tried = 0;
  bool pass = false;
};

constexpr double kCertificateMargin = 1e-6;

/// Sampled evidence of a proper invariant domain: a point z₀ transverse (margin
/// > 1e-6) to every sampled orbit point of the centre of D_std and to every limit point.
DomainCertificate proper_domain_certificate(const Representation& rep, const std::vector<ShilovPoint>& sample,
                                            int max_len, std::size_t probe_count, std::uint64_t seed,
                                            std::size_t per_length_cap = 256);

struct ConvexCore {
  CausalHull core;
  std::vector<Word> words;
  double ideal_residual = 0;
  std::size_t long_words = 0;
};

/// Orbit of the base points under seeded words of length ≤ max_len, its causal
/// hull in the given chart, and ideal_residual: the largest frame distance from
/// an orbit point of a word of length max_len to the nearest of the limit sample
/// and the attracting point of that word.
ConvexCore convex_core_sample(const Representation& rep, const std::vector<ShilovPoint>& sample,
                              const std::vector<ShilovPoint>& base, const ChartedChart& chart, int max_len,
                              std::uint64_t seed, std::size_t per_length_cap = 32);

/// Centre of D_std (chart coordinate I, or the unit future time vector) and of its dual.
ShilovPoint domain_centre(const ModelPtr& model);
ShilovPoint dual_centre(const ModelPtr& model);

/// Each generator g_i replaced by random_lie_perturbation(g_i, eps, seed + i).
Representation deform(const Representation& rep, double eps, std::uint64_t seed);

}  // namespace causalflag
