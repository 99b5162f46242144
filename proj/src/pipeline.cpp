#include "hgct/pipeline.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>

#include "hgct/error.hpp"
#include "hgct/hgnn.hpp"
#include "hgct/train.hpp"

namespace hgct {

namespace {

int round_half_up(double x) { return static_cast<int>(std::floor(x + 0.5)); }

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

// Descending by score, ties to the lower index.
std::vector<int> rank_desc(const Vector& score, const std::vector<int>& pool) {
  std::vector<int> out = pool;
  std::stable_sort(out.begin(), out.end(), [&](int a, int b) {
    return score[a] > score[b] || (score[a] == score[b] && a < b);
  });
  return out;
}

}  // namespace

void PipelineConfig::validate() const {
  auto frac_ok = [](double f) { return f > 0.0 && f <= 1.0; };
  if (!frac_ok(ns_frac) || !frac_ok(ninit_frac) || !frac_ok(n1_frac))
    throw Error(ErrorKind::InvalidArgument, "pipeline fractions must lie in (0, 1]");
  if (minimal_size < 3) throw Error(ErrorKind::InvalidArgument, "minimal_size must be at least 3");
  if (step < 1 || max_iters < 0 || knn_k < 1) throw Error(ErrorKind::InvalidArgument, "step, max_iters, knn_k out of range");
  if (!(theta_inlier > 0.0) || !(nms_radius >= 0.0))
    throw Error(ErrorKind::InvalidArgument, "theta_inlier must be positive and nms_radius nonnegative");
}

int PipelineConfig::seed_count(int n) const { return std::min(n, std::max(minimal_size, round_half_up(ns_frac * n))); }

int PipelineConfig::nms_count(int n) const { return std::max(1, round_half_up(n1_frac * seed_count(n))); }

int PipelineConfig::initial_count(int n) const { return std::max(1, round_half_up(ninit_frac * seed_count(n))); }

Matrix gf_adjacency(const Hypergraph& hg) {
  const Matrix& h = hg.h;
  return ((h.array() != 0.0) && (h.transpose().array() != 0.0)).cast<double>().matrix();
}

Vector gf_score(const Matrix& a) {
  const Vector d = a.rowwise().sum();
  const Vector raw = d.cwiseProduct(d) - a * d;
  if (raw.size() == 0) return raw;
  const double lo = raw.minCoeff(), hi = raw.maxCoeff();
  if (!(hi > lo)) return Vector::Zero(raw.size());
  return (raw.array() - lo) / (hi - lo);
}

std::vector<int> standard_nms(const CorrSet& set, const Vector& confidence, double radius, int count) {
  const int n = set.size();
  std::vector<int> all(n);
  std::iota(all.begin(), all.end(), 0);
  const std::vector<int> order = rank_desc(confidence, all);
  const double r2 = radius * radius;
  std::vector<int> kept;
  for (int i : order) {
    if (static_cast<int>(kept.size()) >= count) break;
    bool suppressed = false;
    for (int k : kept) {
      if ((set.corrs[i].src - set.corrs[k].src).squaredNorm() <= r2) {
        suppressed = true;
        break;
      }
    }
    if (!suppressed) kept.push_back(i);
  }
  return kept;
}

std::vector<int> gf_nms(const Hypergraph& hg, const Vector& s_hat, const CorrSet& set, const PipelineConfig& cfg) {
  cfg.validate();
  const int n = set.size();
  if (hg.size() != n || s_hat.size() != n) throw Error(ErrorKind::InvalidArgument, "gf_nms input size mismatch");
  const int n_seeds = cfg.seed_count(n);
  std::vector<int> seeds = standard_nms(set, s_hat, cfg.nms_radius, std::min(n_seeds, cfg.nms_count(n)));

  std::vector<bool> taken(n, false);
  for (int i : seeds) taken[i] = true;
  std::vector<int> rest;
  for (int i = 0; i < n; ++i)
    if (!taken[i]) rest.push_back(i);
  const Vector score = gf_score(gf_adjacency(hg));
  for (int i : rank_desc(score, rest)) {
    if (static_cast<int>(seeds.size()) >= n_seeds) break;
    seeds.push_back(i);
  }
  return seeds;
}

double evaluate_hypothesis(const RigidTransform& T, const CorrSet& set, double theta_inlier) {
  if (!(theta_inlier > 0.0)) throw Error(ErrorKind::InvalidArgument, "theta_inlier must be positive");
  double score = 0.0;
  for (const auto& c : set.corrs) score += std::max(0.0, 1.0 - residual(T, c) / theta_inlier);
  return score;
}

std::vector<Hypothesis> initial_hypotheses(const CorrSet& set, const std::vector<int>& seeds, const Matrix& features,
                                           const PipelineConfig& cfg, GenerationStats* stats) {
  cfg.validate();
  const int n = set.size();
  int k = std::min(cfg.knn_k, n);
  if (k < cfg.minimal_size) k = n;

  std::vector<Hypothesis> cands;
  std::vector<int> idx(n);
  for (int seed : seeds) {
    const Vector dist = (features.rowwise() - features.row(seed)).rowwise().squaredNorm();
    std::iota(idx.begin(), idx.end(), 0);
    std::partial_sort(idx.begin(), idx.begin() + k, idx.end(), [&](int a, int b) {
      return dist[a] < dist[b] || (dist[a] == dist[b] && a < b);
    });
    try {
      Hypothesis h;
      h.transform = kabsch_svd(set, std::span<const int>(idx.data(), k));
      h.score = evaluate_hypothesis(h.transform, set, cfg.theta_inlier);
      h.origin = HypothesisOrigin::Initial;
      h.seed_index = seed;
      cands.push_back(h);
      if (stats) ++stats->candidates;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::DegenerateInput) throw;
      if (stats) ++stats->degenerate;
    }
  }
  std::stable_sort(cands.begin(), cands.end(), [](const Hypothesis& a, const Hypothesis& b) {
    return a.score > b.score || (a.score == b.score && a.seed_index < b.seed_index);
  });
  const int keep = std::min<int>(cfg.initial_count(n), static_cast<int>(cands.size()));
  cands.resize(keep);
  return cands;
}

std::vector<Hypothesis> refine_hypotheses(const CorrSet& set, const Hypergraph& hg,
                                          const std::vector<Hypothesis>& initial, const PipelineConfig& cfg,
                                          GenerationStats* stats) {
  cfg.validate();
  std::vector<Hypothesis> out = initial;
  const int m = cfg.minimal_size;
  for (const auto& h0 : initial) {
    std::vector<int> members = hg.members(h0.seed_index);
    std::vector<double> res(set.size(), 0.0);
    for (int v : members) res[v] = residual(h0.transform, set.corrs[v]);
    std::stable_sort(members.begin(), members.end(),
                     [&](int a, int b) { return res[a] < res[b] || (res[a] == res[b] && a < b); });
    const int size = static_cast<int>(members.size());
    for (int k = 0; k < cfg.max_iters && k * cfg.step + m <= size; ++k) {
      try {
        Hypothesis h;
        h.transform = kabsch_svd(set, std::span<const int>(members.data() + k * cfg.step, m));
        h.score = evaluate_hypothesis(h.transform, set, cfg.theta_inlier);
        h.origin = HypothesisOrigin::Refined;
        h.seed_index = h0.seed_index;
        out.push_back(h);
        if (stats) ++stats->refined;
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::DegenerateInput) throw;
        if (stats) ++stats->degenerate;
      }
    }
  }
  return out;
}

nlohmann::json Diagnostics::to_json() const {
  nlohmann::json j;
  j["seeds"] = seeds;
  j["theta_cmp"] = theta_cmp;
  j["counts"] = {{"seeds", seeds.size()},
                 {"candidates", generation.candidates},
                 {"initial", initial_kept},
                 {"refined", generation.refined},
                 {"degenerate", generation.degenerate},
                 {"hypotheses", hypothesis_count}};
  j["best_score"] = best_score;
  j["precision_before"] = precision_before ? nlohmann::json(*precision_before) : nlohmann::json(nullptr);
  j["precision_after"] = precision_after ? nlohmann::json(*precision_after) : nlohmann::json(nullptr);
  j["timings_ms"] = {{"compat", timings.compat_ms},     {"hypergraph", timings.hypergraph_ms},
                     {"network", timings.network_ms},   {"seeding", timings.seeding_ms},
                     {"initial", timings.initial_ms},   {"refine", timings.refine_ms},
                     {"total", timings.total_ms}};
  return j;
}

RegisterResult register_scene(const CorrSet& set, const HyperGCTParams& params, const CompatConfig& cc,
                              const PipelineConfig& pc) {
  pc.validate();
  const int n = set.size();
  if (n < pc.minimal_size) throw Error(ErrorKind::InvalidArgument, "registration needs at least minimal_size correspondences");
  const auto t_start = Clock::now();
  RegisterResult out;
  Diagnostics& d = out.diag;

  auto t0 = Clock::now();
  const CompatGraph graph = build_compat_graph(set, cc);
  d.theta_cmp = graph.theta_cmp;
  d.timings.compat_ms = ms_since(t0);

  t0 = Clock::now();
  const Hypergraph hg0 = init_hypergraph(graph);
  d.timings.hypergraph_ms = ms_since(t0);

  t0 = Clock::now();
  const ForwardTrace trace = forward(set, hg0, graph.w_h0, params);
  out.s_hat = trace.s_hat;
  out.final_hypergraph = trace.final_hypergraph();
  d.timings.network_ms = ms_since(t0);

  if (set.gt || set.labels) {
    const auto labels = inlier_labels(set, pc.theta_inlier);
    try {
      d.precision_before = hyperedge_precision(hg0, labels);
      d.precision_after = hyperedge_precision(out.final_hypergraph, labels);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::NoEdges) throw;
    }
  }

  t0 = Clock::now();
  d.seeds = gf_nms(out.final_hypergraph, trace.s_hat, set, pc);
  d.timings.seeding_ms = ms_since(t0);

  t0 = Clock::now();
  const auto initial = initial_hypotheses(set, d.seeds, trace.x_final(), pc, &d.generation);
  d.initial_kept = static_cast<int>(initial.size());
  d.timings.initial_ms = ms_since(t0);

  t0 = Clock::now();
  out.hypotheses = refine_hypotheses(set, out.final_hypergraph, initial, pc, &d.generation);
  d.timings.refine_ms = ms_since(t0);
  d.hypothesis_count = d.generation.candidates + d.generation.refined;

  if (out.hypotheses.empty()) throw Error(ErrorKind::NoHypothesis, "every candidate subset was degenerate");
  std::size_t best = 0;
  for (std::size_t k = 1; k < out.hypotheses.size(); ++k)
    if (out.hypotheses[k].score > out.hypotheses[best].score) best = k;
  out.transform = out.hypotheses[best].transform;
  d.best_score = out.hypotheses[best].score;
  d.timings.total_ms = ms_since(t_start);
  return out;
}

RansacResult ransac_baseline(const CorrSet& set, int budget, double theta_inlier, std::uint64_t seed) {
  const int n = set.size();
  if (n < 3) throw Error(ErrorKind::InvalidArgument, "ransac needs at least three correspondences");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick(0, n - 1);
  RansacResult best;
  bool found = false;
  for (int it = 0; it < budget; ++it) {
    std::array<int, 3> s{};
    s[0] = pick(rng);
    do s[1] = pick(rng); while (s[1] == s[0]);
    do s[2] = pick(rng); while (s[2] == s[0] || s[2] == s[1]);
    try {
      const RigidTransform T = kabsch_svd(set, s);
      ++best.solved;
      const double score = evaluate_hypothesis(T, set, theta_inlier);
      if (!found || score > best.score) {
        best.transform = T;
        best.score = score;
        found = true;
      }
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::DegenerateInput) throw;
    }
  }
  if (!found) throw Error(ErrorKind::NoHypothesis, "every sampled subset was degenerate");
  return best;
}

double hypothesis_correctness(const std::vector<Hypothesis>& hypos, const RigidTransform& gt, double re_thresh,
                              double te_thresh) {
  if (hypos.empty()) return 0.0;
  int ok = 0;
  for (const auto& h : hypos)
    if (rotation_error_deg(h.transform.R, gt.R) <= re_thresh && translation_error(h.transform.t, gt.t) <= te_thresh) ++ok;
  return static_cast<double>(ok) / static_cast<double>(hypos.size());
}

}  // namespace hgct
