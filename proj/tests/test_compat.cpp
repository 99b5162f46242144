#include <doctest.h>

#include <random>

#include "hgct/compat.hpp"
#include "hgct/error.hpp"
#include "oracle.hpp"

using namespace hgct;

namespace {

CorrSet clique_scene(int n, double spacing = 0.05) {
  // Noise-free identity motion on a small cluster: every pair has d = 0.
  CorrSet s;
  for (int i = 0; i < n; ++i) {
    Correspondence c;
    c.src = Point3(spacing * i, spacing * (i % 2), spacing * (i % 3));
    c.tgt = c.src + Point3(1, 0, 0);
    s.corrs.push_back(c);
  }
  return s;
}

}  // namespace

TEST_SUITE("compat") {

TEST_CASE("rigid distance examples") {
  Correspondence a, b;
  a.src = {0, 0, 0};
  a.tgt = {1, 1, 1};
  b.src = {1, 2, 3};
  b.tgt = {2, 3, 4};
  CHECK(rigid_distance(a, b) == 0.0);
  b.src = {3, 0, 0};
  b.tgt = Point3(1, 1, 1) + Point3(0, 4, 0);
  CHECK(rigid_distance(a, b) == doctest::Approx(1.0));
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-2, 2);
  for (int k = 0; k < 50; ++k) {
    Correspondence p, q;
    p.src = {u(rng), u(rng), u(rng)};
    p.tgt = {u(rng), u(rng), u(rng)};
    q.src = {u(rng), u(rng), u(rng)};
    q.tgt = {u(rng), u(rng), u(rng)};
    CHECK(rigid_distance(p, q) == doctest::Approx(oracle::rigid_distance(p, q)).epsilon(1e-12));
    CHECK(rigid_distance(p, q) == rigid_distance(q, p));
  }
}

TEST_CASE("compat score examples") {
  CHECK(compat_score(0.0, 0.1) == 1.0);
  CHECK(compat_score(0.1, 0.1) == 0.0);
  CHECK(compat_score(0.05, 0.1) == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(compat_score(0.5, 0.1) == 0.0);
}

TEST_CASE("dynamic threshold examples") {
  Matrix ones = Matrix::Ones(6, 6);
  ones.diagonal().setZero();
  CHECK(dynamic_threshold(ones, 0.1) == doctest::Approx(1.0));
  CHECK(dynamic_threshold(Matrix::Zero(6, 6), 0.1) == 0.0);
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0, 1);
  for (int k = 0; k < 30; ++k) {
    Matrix g(10, 10);
    for (int i = 0; i < 10; ++i)
      for (int j = 0; j <= i; ++j) g(i, j) = g(j, i) = (i == j ? 0.0 : u(rng));
    oracle::Mat og = oracle::to_mat(g);
    // K₁ = round(0.1·10) = 1: mean of row maxima.
    double mean_max = 0.0;
    for (int i = 0; i < 10; ++i) mean_max += g.row(i).maxCoeff();
    CHECK(dynamic_threshold(g, 0.1) == doctest::Approx(mean_max / 10).epsilon(1e-12));
    CHECK(dynamic_threshold(g, 0.1) == doctest::Approx(oracle::dynamic_threshold(og, 0.1)).epsilon(1e-12));
    CHECK(dynamic_threshold(g, 0.35) == doctest::Approx(oracle::dynamic_threshold(og, 0.35)).epsilon(1e-12));
  }
}

TEST_CASE("SOG on a mutually compatible triple") {
  CompatConfig cc;
  const CorrSet s = clique_scene(3);
  const CompatGraph g = build_compat_graph(s, cc);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) CHECK(g.w_h0(i, j) == (i == j ? 0.0 : 1.0));
}

TEST_CASE("isolated vertex has an empty row and column") {
  CorrSet s = clique_scene(5);
  s.corrs[4].tgt += Point3(3, -2, 7);
  const CompatGraph g = build_compat_graph(s, CompatConfig{});
  CHECK(g.w_h0.row(4).isZero());
  CHECK(g.w_h0.col(4).isZero());
  CHECK(g.w_gamma.row(4).isZero());
}

TEST_CASE("FOG and SOG share support on a dense clique") {
  // Exhaustive 5-node check: all pairs compatible, so the SOG product is positive wherever W_γ is.
  const CorrSet s = clique_scene(5);
  CompatConfig fog;
  fog.order = GraphOrder::FOG;
  const CompatGraph a = build_compat_graph(s, fog);
  const CompatGraph b = build_compat_graph(s, CompatConfig{});
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) CHECK((a.w_h0(i, j) > 0) == (b.w_h0(i, j) > 0));
  CHECK(a.w_h0 == a.w_gamma);
}

TEST_CASE("SOG can drop a FOG edge without a common neighbor") {
  // Path 0-1-2 embedded so that only (0,1) and (1,2) are compatible: (0,2) has no edge, and
  // the (0,1) edge has no common neighbor, so SOG removes it.
  CompatConfig cc;
  cc.theta_override = 0.0;
  CorrSet s;
  auto add = [&](Point3 p, Point3 q) { s.corrs.push_back({p, q, {}}); };
  add({0, 0, 0}, {0, 0, 0});
  add({1, 0, 0}, {1, 0, 0});
  add({2, 0, 0}, {1, 1, 0});
  add({5, 5, 5}, {9, 9, 9});
  const CompatGraph g = build_compat_graph(s, cc);
  CHECK(g.w_gamma(0, 1) > 0);
  CHECK(g.w_h0(0, 1) == 0.0);
}

TEST_CASE("build matches the loop oracle") {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const CorrSet s = oracle::random_scene(12, 7, 0.02, seed, 0.5);
    for (auto order : {GraphOrder::SOG, GraphOrder::FOG}) {
      CompatConfig cc;
      cc.order = order;
      CompatGraph g;
      try {
        g = build_compat_graph(s, cc);
      } catch (const Error&) {
        continue;
      }
      const auto o = oracle::compat(s, cc);
      CHECK(g.theta_cmp == doctest::Approx(o.theta).epsilon(1e-12));
      CHECK(oracle::max_abs_diff(o.w_gamma, g.w_gamma) < 1e-12);
      CHECK(oracle::max_abs_diff(o.w_h0, g.w_h0) < 1e-12);
    }
  }
}

TEST_CASE("theta override wins and empty graphs are rejected") {
  const CorrSet s = clique_scene(4);
  CompatConfig cc;
  cc.theta_override = 0.3;
  CHECK(build_compat_graph(s, cc).theta_cmp == 0.3);
  cc.theta_override = 1.0;
  CHECK(build_compat_graph(s, cc).w_gamma(0, 1) == 1.0);
  cc.theta_override = 1.5;
  try {
    build_compat_graph(s, cc);
    FAIL("expected EmptyGraph");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::EmptyGraph);
  }
  CompatConfig bad;
  bad.sigma_d = 0;
  CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("noise-free inlier pairs have unit compatibility") {
  const CorrSet s = oracle::random_scene(30, 15, 0.0, 77);
  const Matrix g = compat_matrix(s, 0.1);
  for (int i = 0; i < 15; ++i)
    for (int j = 0; j < 15; ++j)
      if (i != j) CHECK(g(i, j) == doctest::Approx(1.0).epsilon(1e-12));
}

}  // TEST_SUITE
