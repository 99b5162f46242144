#pragma once

#include <cstdint>
#include <vector>

#include "hgct/geom.hpp"

namespace hgct {

struct SynthConfig {
  int n_corrs = 200;
  double inlier_ratio = 0.3;
  double noise_sigma = 0.01;   ///< meters, isotropic Gaussian on inlier targets
  double scene_extent = 1.0;   ///< half-width of the source sampling cube, meters
  double rot_max_deg = 180.0;
  double trans_max = 1.0;      ///< meters
  std::uint64_t seed = 0;

  void validate() const;
};

/// Random rigid motion: uniform axis, angle uniform in [0, rot_max_deg],
/// translation uniform in a ball of radius trans_max.
RigidTransform random_transform(std::uint64_t seed, double rot_max_deg, double trans_max);

/// Inliers: tgt = R·src + t + noise. Outliers: src uniform in the source cube and
/// tgt uniform in the image of that cube under the ground-truth motion.
/// Inlier positions are shuffled; labels mark them.
CorrSet gen_scene(const SynthConfig& cfg);

/// Seed of the i-th scene derived from a base seed; stable across runs and thread counts.
std::uint64_t scene_seed(std::uint64_t base, std::uint64_t index);

/// `count` scenes whose inlier ratios are drawn uniformly from [ratio_lo, ratio_hi].
std::vector<CorrSet> gen_suite(const SynthConfig& base, int count, double ratio_lo, double ratio_hi);

}  // namespace hgct
