#pragma once

#include <cstdint>

#include "hgct/params.hpp"
#include "hgct/train.hpp"

namespace hgct {

struct GradcheckConfig {
  double step = 1e-5;
  double tol = 1e-3;
  /// Denominator floor: errors are |a − n| / max(|a|, |n|, floor).
  double floor = 1e-6;
  int stride = 1;  ///< check every stride-th parameter
};

struct GradcheckReport {
  int checked = 0;
  int failures = 0;
  double max_rel_err = 0.0;
  int worst_index = -1;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;

  bool passed() const { return failures == 0; }
};

/// Joint loss of one sample at the given parameters.
double sample_loss(const TrainingSample& sample, const HyperGCTParams& params);

/// Analytic gradient of the joint loss for one sample.
HyperGCTParams sample_gradient(const TrainingSample& sample, const HyperGCTParams& params);

/// Central finite differences against the analytic gradient.
GradcheckReport gradcheck(const TrainingSample& sample, const HyperGCTParams& params, const GradcheckConfig& cfg);

/// Small mixed inlier/outlier scene used by the gradcheck command and tests.
TrainingSample gradcheck_sample(int n, std::uint64_t seed);

}  // namespace hgct
