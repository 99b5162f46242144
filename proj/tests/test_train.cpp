#include <doctest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "hgct/compat.hpp"
#include "hgct/error.hpp"
#include "hgct/synth.hpp"
#include "hgct/train.hpp"
#include "oracle.hpp"

using namespace hgct;

namespace {

std::vector<TrainingSample> small_suite(int count, int n, std::uint64_t seed) {
  SynthConfig sc;
  sc.n_corrs = n;
  sc.seed = seed;
  std::vector<TrainingSample> out;
  for (const auto& s : gen_suite(sc, count, 0.3, 0.5)) out.push_back(prepare_sample(s, CompatConfig{}, 0.1));
  return out;
}

TrainConfig quick(int epochs) {
  TrainConfig tc;
  tc.epochs = epochs;
  tc.batch = 2;
  tc.threads = 1;
  return tc;
}

}  // namespace

TEST_SUITE("train") {

TEST_CASE("scene generator contract") {
  SynthConfig sc;
  sc.inlier_ratio = 1.0;
  sc.noise_sigma = 0.0;
  sc.seed = 3;
  const CorrSet s = gen_scene(sc);
  REQUIRE(s.gt);
  for (const auto& c : s.corrs) CHECK(residual(*s.gt, c) < 1e-12);

  SynthConfig few;
  few.n_corrs = 1000;
  few.inlier_ratio = 0.05;
  const CorrSet f = gen_scene(few);
  int count = 0;
  for (bool b : *f.labels) count += b;
  CHECK(count == 50);
  CHECK(f.gt->is_valid());
  CHECK(rotation_error_deg(f.gt->R, Eigen::Matrix3d::Identity()) <= few.rot_max_deg + 1e-9);
  CHECK(f.gt->t.norm() <= few.trans_max + 1e-12);

  SynthConfig bad;
  bad.n_corrs = 5;
  CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("generated inlier pairs are compatible at six-sigma sensitivity") {
  // With σ_d = 6·noise the score is strictly positive for nearly every inlier pair; a
  // score of exactly 1 needs zero noise.
  int good = 0;
  const int seeds = 100;
  for (int seed = 0; seed < seeds; ++seed) {
    SynthConfig sc;
    sc.n_corrs = 60;
    sc.inlier_ratio = 0.5;
    sc.noise_sigma = 0.01;
    sc.seed = static_cast<std::uint64_t>(seed);
    const CorrSet s = gen_scene(sc);
    const Matrix g = compat_matrix(s, 6 * sc.noise_sigma);
    int pos = 0, total = 0;
    for (int i = 0; i < 60; ++i)
      for (int j = 0; j < i; ++j)
        if ((*s.labels)[i] && (*s.labels)[j]) {
          ++total;
          pos += g(i, j) > 0;
        }
    good += pos >= 0.99 * total;
  }
  CHECK(good >= 99);
}

TEST_CASE("inlier labels follow the ground-truth residual") {
  CorrSet s = oracle::random_scene(10, 4, 0.0, 2);
  const auto l = inlier_labels(s, 0.1);
  for (int i = 0; i < 10; ++i) CHECK(l[i] == (residual(*s.gt, s.corrs[i]) < 0.1));
  s.gt.reset();
  CHECK(inlier_labels(s, 0.1) == *s.labels);
  s.labels.reset();
  CHECK_THROWS_AS(inlier_labels(s, 0.1), Error);
}

TEST_CASE("zero learning rate leaves parameters bit-identical") {
  const auto samples = small_suite(3, 40, 1);
  const HyperGCTParams p = HyperGCTParams::random(8, 5, 2);
  TrainConfig tc = quick(2);
  tc.lr = 0.0;
  CHECK(train(samples, tc, p) == p);
  Adam adam;
  Vector v = p.flat();
  adam.step(v, Vector::Ones(v.size()), 0.0);
  CHECK(v == p.flat());
  Vector w = p.flat();
  Adam adam2;
  adam2.step(w, Vector::Zero(w.size()), 1e-3);
  CHECK(w == p.flat());
}

TEST_CASE("training is deterministic and lowers the loss") {
  const auto samples = small_suite(4, 40, 7);
  const HyperGCTParams p = HyperGCTParams::random(8, 5, 3);
  std::vector<double> curve;
  const HyperGCTParams a = train(samples, quick(15), p, [&](const EpochStats& s) { curve.push_back(s.mean.total()); });
  const HyperGCTParams b = train(samples, quick(15), p);
  CHECK(a == b);
  REQUIRE(curve.size() == 15);
  CHECK(curve.back() < curve.front());
  CHECK(evaluate_loss(samples, a, 1).total() < evaluate_loss(samples, p, 1).total());
}

TEST_CASE("thread count does not change results") {
  const auto samples = small_suite(4, 30, 9);
  const HyperGCTParams p = HyperGCTParams::random(8, 5, 4);
  TrainConfig one = quick(3), many = quick(3);
  one.threads = 1;
  many.threads = 3;
  CHECK(train(samples, one, p) == train(samples, many, p));
}

TEST_CASE("non-finite parameters abort training") {
  const auto samples = small_suite(2, 30, 11);
  HyperGCTParams p = HyperGCTParams::random(8, 5, 4);
  p.flat()[0] = std::numeric_limits<double>::infinity();
  try {
    train(samples, quick(1), p);
    FAIL("expected NonFinite");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NonFinite);
    CHECK(std::string(e.what()).find("scene") != std::string::npos);
  }
}

TEST_CASE("epoch csv layout") {
  std::ostringstream os;
  write_epoch_csv_header(os);
  EpochStats s;
  s.epoch = 3;
  s.mean = {0.5, 0.25, 1.0};
  s.wall_seconds = 2.5;
  write_epoch_csv_row(os, s);
  CHECK(os.str() == "epoch,mean_loss_class,mean_loss_match,mean_loss_graph,mean_loss_total,wall_seconds\n"
                    "3,0.5,0.25,1,1.75,2.5\n");
}

}  // TEST_SUITE
