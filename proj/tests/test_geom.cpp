#include <doctest.h>

#include <random>
#include <vector>

#include "hgct/error.hpp"
#include "hgct/geom.hpp"
#include "oracle.hpp"

using namespace hgct;

namespace {

std::vector<PointPair> pairs_under(const RigidTransform& T, const std::vector<Point3>& pts) {
  std::vector<PointPair> out;
  for (const auto& p : pts) out.push_back({p, T.apply(p)});
  return out;
}

std::vector<Point3> random_points(int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Point3> pts;
  for (int i = 0; i < n; ++i) pts.emplace_back(u(rng), u(rng), u(rng));
  return pts;
}

RigidTransform random_motion(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> ang(0.0, 180.0);
  RigidTransform T;
  T.R = axis_angle(Eigen::Vector3d(g(rng), g(rng), g(rng)), ang(rng));
  T.t = Eigen::Vector3d(g(rng), g(rng), g(rng));
  return T;
}

}  // namespace

TEST_SUITE("geom") {

TEST_CASE("kabsch: identity on three non-collinear points") {
  const std::vector<PointPair> p = {{{0, 0, 0}, {0, 0, 0}}, {{1, 0, 0}, {1, 0, 0}}, {{0, 1, 0}, {0, 1, 0}}};
  const RigidTransform T = kabsch_svd(p);
  CHECK((T.R - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(T.t.norm() < 1e-12);
}

TEST_CASE("kabsch: pure translation") {
  std::vector<PointPair> p;
  const std::vector<Point3> src = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  for (const auto& s : src) p.push_back({s, s + Eigen::Vector3d(1, 2, 3)});
  const RigidTransform T = kabsch_svd(p);
  CHECK((T.R - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((T.t - Eigen::Vector3d(1, 2, 3)).norm() < 1e-12);
}

TEST_CASE("kabsch: recovers a random motion from six noise-free points") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const RigidTransform gt = random_motion(rng);
    const RigidTransform T = kabsch_svd(pairs_under(gt, random_points(6, rng)));
    CHECK((T.R - gt.R).cwiseAbs().maxCoeff() < 1e-9);
    CHECK((T.t - gt.t).norm() < 1e-9);
    CHECK(T.is_valid());
  }
}

TEST_CASE("kabsch: reflection is never returned") {
  // Planar points mirrored through z = 0 form a reflection; the fit must stay a rotation.
  std::vector<PointPair> p = {{{0, 0, 0}, {0, 0, 0}}, {{1, 0, 0}, {1, 0, 0}}, {{0, 1, 0}, {0, 1, 0}},
                              {{1, 1, 1}, {1, 1, -1}}};
  const RigidTransform T = kabsch_svd(p);
  CHECK(T.R.determinant() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("kabsch: weights select the subset they cover") {
  std::mt19937_64 rng(5);
  const RigidTransform gt = random_motion(rng);
  auto p = pairs_under(gt, random_points(8, rng));
  p[6].tgt += Eigen::Vector3d(5, 5, 5);
  p[7].tgt -= Eigen::Vector3d(3, 0, 1);
  const std::vector<double> w = {1, 2, 1, 0.5, 1, 1, 0, 0};
  const RigidTransform T = kabsch_svd(p, w);
  CHECK((T.R - gt.R).cwiseAbs().maxCoeff() < 1e-9);
  CHECK((T.t - gt.t).norm() < 1e-9);
}

TEST_CASE("kabsch: degenerate inputs") {
  const std::vector<PointPair> two = {{{0, 0, 0}, {0, 0, 0}}, {{1, 0, 0}, {1, 0, 0}}};
  CHECK_THROWS_AS(kabsch_svd(two), Error);
  const std::vector<PointPair> collinear = {
      {{0, 0, 0}, {0, 0, 0}}, {{1, 0, 0}, {1, 0, 0}}, {{2, 0, 0}, {2, 0, 0}}, {{3, 0, 0}, {3, 0, 0}}};
  try {
    kabsch_svd(collinear);
    FAIL("collinear points accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DegenerateInput);
  }
  const std::vector<PointPair> coincident(4, PointPair{{1, 1, 1}, {2, 2, 2}});
  CHECK_THROWS_AS(kabsch_svd(coincident), Error);
  const std::vector<PointPair> ok = {{{0, 0, 0}, {0, 0, 0}}, {{1, 0, 0}, {1, 0, 0}}, {{0, 1, 0}, {0, 1, 0}}};
  const std::vector<double> w = {1, 1, 0};
  CHECK_THROWS_AS(kabsch_svd(ok, w), Error);
}

TEST_CASE("residual examples") {
  Correspondence c;
  CHECK(residual(RigidTransform::identity(), c) == 0.0);
  c.tgt = {0, 3, 4};
  CHECK(residual(RigidTransform::identity(), c) == doctest::Approx(5.0));
  std::mt19937_64 rng(3);
  for (int k = 0; k < 20; ++k) {
    const RigidTransform T = random_motion(rng);
    const auto pts = random_points(2, rng);
    // Hand-expanded ‖R·p + t − q‖.
    double s = 0.0;
    for (int r = 0; r < 3; ++r) {
      double v = T.t[r] - pts[1][r];
      for (int cidx = 0; cidx < 3; ++cidx) v += T.R(r, cidx) * pts[0][cidx];
      s += v * v;
    }
    CHECK(residual(T, pts[0], pts[1]) == doctest::Approx(std::sqrt(s)).epsilon(1e-12));
  }
}

TEST_CASE("rotation and translation errors") {
  const Eigen::Matrix3d I = Eigen::Matrix3d::Identity();
  CHECK(rotation_error_deg(I, I) == 0.0);
  CHECK(rotation_error_deg(axis_angle({0, 0, 1}, 180.0), I) == doctest::Approx(180.0).epsilon(1e-12));
  std::mt19937_64 rng(9);
  std::normal_distribution<double> g;
  for (int k = 0; k < 20; ++k) {
    const Eigen::Matrix3d R = axis_angle(Eigen::Vector3d(g(rng), g(rng), g(rng)), 10.0);
    CHECK(std::fabs(rotation_error_deg(R, I) - 10.0) < 1e-6);
  }
  CHECK(translation_error({1, 2, 3}, {1, 2, 3}) == 0.0);
  CHECK(translation_error({0, 0, 0}, {0, 3, 4}) == doctest::Approx(5.0));
}

TEST_CASE("rotation error resolves tiny angles") {
  const Eigen::Matrix3d I = Eigen::Matrix3d::Identity();
  CHECK(rotation_error_deg(axis_angle({1, 2, 3}, 1e-7), I) == doctest::Approx(1e-7).epsilon(1e-6));
}

TEST_CASE("transform algebra") {
  std::mt19937_64 rng(21);
  const RigidTransform A = random_motion(rng), B = random_motion(rng);
  const Point3 p(0.3, -0.2, 0.9);
  CHECK((A.compose(B).apply(p) - A.apply(B.apply(p))).norm() < 1e-12);
  CHECK((A.inverse().apply(A.apply(p)) - p).norm() < 1e-12);
  CHECK(A.is_valid());
  RigidTransform bad = A;
  bad.R(0, 0) += 1e-6;
  CHECK_FALSE(bad.is_valid());
}

TEST_CASE("CorrSet validation") {
  CorrSet s = oracle::random_scene(5, 3, 0.0, 1);
  CHECK_NOTHROW(s.validate());
  s.labels->pop_back();
  CHECK_THROWS_AS(s.validate(), Error);
  s = oracle::random_scene(5, 3, 0.0, 1);
  s.corrs[0].feat = Eigen::VectorXd::Ones(3);
  CHECK_THROWS_AS(s.validate(), Error);
}

}  // TEST_SUITE
