#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <json.hpp>

#include "hgct/compat.hpp"
#include "hgct/geom.hpp"
#include "hgct/hypergraph.hpp"
#include "hgct/params.hpp"

namespace hgct {

struct PipelineConfig {
  double ns_frac = 0.2;     ///< seeds as a fraction of N
  double ninit_frac = 0.1;  ///< initial hypotheses as a fraction of the seed count
  int knn_k = 20;           ///< feature-space subset size per seed
  int minimal_size = 6;
  int max_iters = 30;
  int step = 3;
  double theta_inlier = 0.1;  ///< meters, verification truncation
  double nms_radius = 0.1;    ///< meters, on source points
  double n1_frac = 0.1;       ///< NMS share of the seed set

  void validate() const;
  int seed_count(int n) const;
  int nms_count(int n) const;
  int initial_count(int n) const;
};

enum class HypothesisOrigin { Initial, Refined };

struct Hypothesis {
  RigidTransform transform;
  double score = 0.0;
  HypothesisOrigin origin = HypothesisOrigin::Initial;
  int seed_index = -1;
};

/// A(i,j) = 1 iff H(i,j) = H(j,i) = 1.
Matrix gf_adjacency(const Hypergraph& hg);

/// Min-max normalized Laplacian of the degree signal, (D − A)·d. All zeros when constant.
Vector gf_score(const Matrix& adjacency);

/// Greedy radius suppression on source points in descending confidence order
/// (ties: lower index). Returns at most `count` survivors.
std::vector<int> standard_nms(const CorrSet& set, const Vector& confidence, double radius, int count);

/// NMS picks up to N₁ seeds, the rest are the best graph-filter scores among the remainder.
std::vector<int> gf_nms(const Hypergraph& hg, const Vector& s_hat, const CorrSet& set, const PipelineConfig& cfg);

/// Σ_i max(0, 1 − r_i/θ).
double evaluate_hypothesis(const RigidTransform& T, const CorrSet& set, double theta_inlier);

struct GenerationStats {
  int candidates = 0;     ///< hypotheses solved from seed neighborhoods
  int refined = 0;        ///< hypotheses solved from hyperedge windows
  int degenerate = 0;     ///< skipped subsets
};

/// One candidate per seed from its knn_k feature-space neighbors; the best
/// initial_count(N) by score are kept, ordered by descending score.
std::vector<Hypothesis> initial_hypotheses(const CorrSet& set, const std::vector<int>& seeds, const Matrix& features,
                                           const PipelineConfig& cfg, GenerationStats* stats = nullptr);

/// Residual-sorted sliding windows over each seed's hyperedge. Returns initial ∪ refined.
std::vector<Hypothesis> refine_hypotheses(const CorrSet& set, const Hypergraph& hg,
                                          const std::vector<Hypothesis>& initial, const PipelineConfig& cfg,
                                          GenerationStats* stats = nullptr);

struct StageTimings {
  double compat_ms = 0, hypergraph_ms = 0, network_ms = 0, seeding_ms = 0, initial_ms = 0, refine_ms = 0,
         total_ms = 0;
};

struct Diagnostics {
  std::vector<int> seeds;
  double theta_cmp = 0.0;
  int initial_kept = 0;
  GenerationStats generation;
  int hypothesis_count = 0;  ///< candidate + refined solves, the budget matched by the baseline
  double best_score = 0.0;
  std::optional<double> precision_before;
  std::optional<double> precision_after;
  StageTimings timings;

  nlohmann::json to_json() const;
};

struct RegisterResult {
  RigidTransform transform;
  Diagnostics diag;
  std::vector<Hypothesis> hypotheses;
  Vector s_hat;
  Hypergraph final_hypergraph;
};

/// compat → hypergraph → network → GF-NMS → initial → refine → argmax of the MAE score.
/// Throws EmptyGraph, NonFinite, or NoHypothesis.
RegisterResult register_scene(const CorrSet& set, const HyperGCTParams& params, const CompatConfig& cc,
                              const PipelineConfig& pc);

struct RansacResult {
  RigidTransform transform;
  double score = 0.0;
  int solved = 0;
};

/// Random 3-subsets, SVD fit, MAE scoring; deterministic per seed. Throws NoHypothesis.
RansacResult ransac_baseline(const CorrSet& set, int budget, double theta_inlier, std::uint64_t seed);

/// Fraction of hypotheses within both thresholds of the ground truth.
double hypothesis_correctness(const std::vector<Hypothesis>& hypos, const RigidTransform& gt, double re_thresh,
                              double te_thresh);

}  // namespace hgct
