#include "hgct/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <ostream>
#include <random>

#include "hgct/error.hpp"
#include "hgct/hgnn.hpp"
#include "hgct/parallel.hpp"
#include "hgct/synth.hpp"

namespace hgct {

void TrainConfig::validate() const {
  if (epochs < 0) throw Error(ErrorKind::InvalidArgument, "epochs must be nonnegative");
  if (!(lr >= 0.0)) throw Error(ErrorKind::InvalidArgument, "lr must be nonnegative");
  if (!(lr_decay > 0.0 && lr_decay <= 1.0)) throw Error(ErrorKind::InvalidArgument, "lr_decay must lie in (0, 1]");
  if (batch < 1) throw Error(ErrorKind::InvalidArgument, "batch must be at least 1");
  if (!(theta_inlier > 0.0) || !(sigma_d > 0.0))
    throw Error(ErrorKind::InvalidArgument, "theta_inlier and sigma_d must be positive");
}

std::vector<bool> inlier_labels(const CorrSet& set, double theta_inlier) {
  if (set.gt) {
    std::vector<bool> out(set.corrs.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = residual(*set.gt, set.corrs[i]) < theta_inlier;
    return out;
  }
  if (set.labels) return *set.labels;
  throw Error(ErrorKind::InvalidArgument, "scene has neither ground truth nor labels");
}

TrainingSample prepare_sample(const CorrSet& set, const CompatConfig& cc, double theta_inlier) {
  TrainingSample s;
  s.set = set;
  s.graph = build_compat_graph(set, cc);
  s.hg0 = init_hypergraph(s.graph);
  s.labels = inlier_labels(set, theta_inlier);
  return s;
}

namespace {

struct SceneResult {
  LossValues loss;
  Vector grad;
};

SceneResult scene_pass(const TrainingSample& s, const HyperGCTParams& params, bool with_grad) {
  const ForwardTrace tr = forward(s.set, s.hg0, s.graph.w_h0, params);
  JointLoss jl = joint_loss(tr, s.labels, params);
  SceneResult r;
  r.loss = jl.values;
  if (!std::isfinite(r.loss.total())) throw Error(ErrorKind::NonFinite, "loss is non-finite");
  if (with_grad) r.grad = backward(tr, params, jl.grads).flat();
  return r;
}

}  // namespace

LossValues evaluate_loss(const std::vector<TrainingSample>& samples, const HyperGCTParams& params, int threads) {
  std::vector<LossValues> per(samples.size());
  parallel_for(static_cast<int>(samples.size()), worker_count(threads),
               [&](int i) { per[i] = scene_pass(samples[i], params, false).loss; });
  LossValues mean;
  for (const auto& l : per) {
    mean.cls += l.cls;
    mean.match += l.match;
    mean.graph += l.graph;
  }
  const double k = samples.empty() ? 1.0 : static_cast<double>(samples.size());
  mean.cls /= k;
  mean.match /= k;
  mean.graph /= k;
  return mean;
}

void Adam::step(Vector& params, const Vector& grad, double lr) {
  if (m.size() != params.size()) {
    m = Vector::Zero(params.size());
    v = Vector::Zero(params.size());
  }
  ++step_count;
  m = beta1 * m + (1.0 - beta1) * grad;
  v = beta2 * v + (1.0 - beta2) * grad.cwiseAbs2();
  const double c1 = 1.0 - std::pow(beta1, static_cast<double>(step_count));
  const double c2 = 1.0 - std::pow(beta2, static_cast<double>(step_count));
  params.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + eps);
}

HyperGCTParams train(const std::vector<TrainingSample>& samples, const TrainConfig& tc, HyperGCTParams params,
                     const EpochSink& sink) {
  tc.validate();
  if (samples.empty()) throw Error(ErrorKind::InvalidArgument, "training needs at least one scene");
  const int n_scenes = static_cast<int>(samples.size());
  const int workers = worker_count(tc.threads);
  Adam adam;
  std::vector<int> order(n_scenes);
  const auto start = std::chrono::steady_clock::now();

  for (int epoch = 0; epoch < tc.epochs; ++epoch) {
    const double lr = tc.lr * std::pow(tc.lr_decay, static_cast<double>(epoch));
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(scene_seed(tc.seed, static_cast<std::uint64_t>(epoch)));
    std::shuffle(order.begin(), order.end(), rng);

    LossValues sum;
    for (int first = 0; first < n_scenes; first += tc.batch) {
      const int count = std::min(tc.batch, n_scenes - first);
      std::vector<SceneResult> results(count);
      try {
        parallel_for(count, workers, [&](int k) { results[k] = scene_pass(samples[order[first + k]], params, true); });
      } catch (const Error& e) {
        // Re-run serially to name the first failing scene of the batch.
        for (int k = 0; k < count; ++k) {
          try {
            scene_pass(samples[order[first + k]], params, true);
          } catch (const Error&) {
            throw Error(ErrorKind::NonFinite, "scene " + std::to_string(order[first + k]) + ": " + e.what());
          }
        }
        throw;
      }
      Vector grad = Vector::Zero(params.flat().size());
      for (const auto& r : results) {
        grad += r.grad;
        sum.cls += r.loss.cls;
        sum.match += r.loss.match;
        sum.graph += r.loss.graph;
      }
      grad /= static_cast<double>(count);
      adam.step(params.flat(), grad, lr);
      if (!params.flat().allFinite())
        throw Error(ErrorKind::NonFinite, "parameters became non-finite after batch starting at scene " +
                                              std::to_string(order[first]));
    }
    if (sink) {
      EpochStats st;
      st.epoch = epoch;
      st.mean = {sum.cls / n_scenes, sum.match / n_scenes, sum.graph / n_scenes};
      st.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      sink(st);
    }
  }
  return params;
}

void write_epoch_csv_header(std::ostream& os) {
  os << "epoch,mean_loss_class,mean_loss_match,mean_loss_graph,mean_loss_total,wall_seconds\n";
}

void write_epoch_csv_row(std::ostream& os, const EpochStats& s) {
  os << s.epoch << ',' << s.mean.cls << ',' << s.mean.match << ',' << s.mean.graph << ',' << s.mean.total() << ','
     << s.wall_seconds << '\n';
}

}  // namespace hgct
