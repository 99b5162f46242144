#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <vector>

#include "hgct/compat.hpp"
#include "hgct/geom.hpp"
#include "hgct/hypergraph.hpp"
#include "hgct/losses.hpp"
#include "hgct/params.hpp"

namespace hgct {

struct TrainConfig {
  int epochs = 200;
  double lr = 1e-3;
  double lr_decay = 0.99;  ///< multiplicative, applied once per epoch
  int batch = 6;
  double theta_inlier = 0.1;
  double sigma_d = 0.1;
  std::uint64_t seed = 0;
  int threads = 0;  ///< 0 = hardware concurrency (capped by HGCT_THREADS)

  void validate() const;
};

/// A scene with its constant graph inputs precomputed.
struct TrainingSample {
  CorrSet set;
  CompatGraph graph;
  Hypergraph hg0;
  std::vector<bool> labels;
};

/// Labels follow ‖R*·p^s + t* − p^t‖ < θ_inlier when a ground truth is present,
/// otherwise the stored labels.
std::vector<bool> inlier_labels(const CorrSet& set, double theta_inlier);

/// Throws EmptyGraph if the scene has no compatible pair.
TrainingSample prepare_sample(const CorrSet& set, const CompatConfig& cc, double theta_inlier);

struct EpochStats {
  int epoch = 0;
  LossValues mean;
  double wall_seconds = 0.0;
};

/// Mean joint loss over the samples with fixed parameters (no update).
LossValues evaluate_loss(const std::vector<TrainingSample>& samples, const HyperGCTParams& params, int threads = 0);

struct Adam {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  Vector m, v;
  long step_count = 0;

  void step(Vector& params, const Vector& grad, double lr);
};

using EpochSink = std::function<void(const EpochStats&)>;

/// ADAM with per-epoch learning-rate decay; batches average gradients over scenes.
/// Throws NonFinite naming the offending scene index.
HyperGCTParams train(const std::vector<TrainingSample>& samples, const TrainConfig& tc, HyperGCTParams params,
                     const EpochSink& sink = {});

/// CSV header and row writer for EpochStats.
void write_epoch_csv_header(std::ostream& os);
void write_epoch_csv_row(std::ostream& os, const EpochStats& s);

}  // namespace hgct
