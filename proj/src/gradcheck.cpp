#include "hgct/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "hgct/hgnn.hpp"
#include "hgct/losses.hpp"
#include "hgct/synth.hpp"

namespace hgct {

double sample_loss(const TrainingSample& sample, const HyperGCTParams& params) {
  const ForwardTrace tr = forward(sample.set, sample.hg0, sample.graph.w_h0, params);
  return joint_loss(tr, sample.labels, params).values.total();
}

HyperGCTParams sample_gradient(const TrainingSample& sample, const HyperGCTParams& params) {
  const ForwardTrace tr = forward(sample.set, sample.hg0, sample.graph.w_h0, params);
  const JointLoss jl = joint_loss(tr, sample.labels, params);
  return backward(tr, params, jl.grads);
}

GradcheckReport gradcheck(const TrainingSample& sample, const HyperGCTParams& params, const GradcheckConfig& cfg) {
  const Vector analytic = sample_gradient(sample, params).flat();
  HyperGCTParams probe = params;
  GradcheckReport rep;
  for (Eigen::Index k = 0; k < analytic.size(); k += std::max(1, cfg.stride)) {
    const double orig = probe.flat()[k];
    probe.flat()[k] = orig + cfg.step;
    const double up = sample_loss(sample, probe);
    probe.flat()[k] = orig - cfg.step;
    const double down = sample_loss(sample, probe);
    probe.flat()[k] = orig;
    const double numeric = (up - down) / (2.0 * cfg.step);
    const double a = analytic[k];
    const double err = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), cfg.floor});
    ++rep.checked;
    if (err >= cfg.tol) ++rep.failures;
    if (err > rep.max_rel_err || rep.worst_index < 0) {
      rep.max_rel_err = err;
      rep.worst_index = static_cast<int>(k);
      rep.worst_analytic = a;
      rep.worst_numeric = numeric;
    }
  }
  return rep;
}

TrainingSample gradcheck_sample(int n, std::uint64_t seed) {
  SynthConfig sc;
  sc.n_corrs = std::max(10, n);
  sc.inlier_ratio = 0.5;
  sc.noise_sigma = 0.01;
  sc.seed = seed;
  CorrSet set = gen_scene(sc);
  if (n < sc.n_corrs) {
    set.corrs.resize(n);
    set.labels->resize(n);
  }
  CompatConfig cc;
  cc.sigma_d = 0.1;
  return prepare_sample(set, cc, 0.1);
}

}  // namespace hgct
