#include "hgct/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "hgct/error.hpp"

namespace hgct {

namespace {

Eigen::Vector3d uniform_cube(std::mt19937_64& rng, double half) {
  std::uniform_real_distribution<double> u(-half, half);
  const double x = u(rng), y = u(rng), z = u(rng);
  return {x, y, z};
}

Eigen::Vector3d unit_vector(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::Vector3d v;
  do {
    const double x = n(rng), y = n(rng), z = n(rng);
    v = {x, y, z};
  } while (v.norm() < 1e-9);
  return v.normalized();
}

}  // namespace

void SynthConfig::validate() const {
  if (n_corrs < 10) throw Error(ErrorKind::InvalidArgument, "n_corrs must be at least 10");
  if (!(inlier_ratio > 0.0 && inlier_ratio <= 1.0)) throw Error(ErrorKind::InvalidArgument, "inlier_ratio must lie in (0, 1]");
  if (!(noise_sigma >= 0.0)) throw Error(ErrorKind::InvalidArgument, "noise_sigma must be nonnegative");
  if (!(scene_extent > 0.0)) throw Error(ErrorKind::InvalidArgument, "scene_extent must be positive");
  if (!(rot_max_deg >= 0.0) || !(trans_max >= 0.0))
    throw Error(ErrorKind::InvalidArgument, "rot_max_deg and trans_max must be nonnegative");
}

std::uint64_t scene_seed(std::uint64_t base, std::uint64_t index) {
  // splitmix64 finalizer over the combined value
  std::uint64_t z = base * 0x9E3779B97F4A7C15ULL + index + 0x632BE59BD9B4E019ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

RigidTransform random_transform(std::uint64_t seed, double rot_max_deg, double trans_max) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  RigidTransform T;
  const Eigen::Vector3d axis = unit_vector(rng);
  T.R = axis_angle(axis, u01(rng) * rot_max_deg);
  const Eigen::Vector3d dir = unit_vector(rng);
  T.t = dir * trans_max * std::cbrt(u01(rng));
  return T;
}

CorrSet gen_scene(const SynthConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(cfg.seed);
  const RigidTransform gt = random_transform(rng(), cfg.rot_max_deg, cfg.trans_max);
  const int n = cfg.n_corrs;
  const int n_in = static_cast<int>(std::floor(cfg.inlier_ratio * n + 0.5));

  std::vector<bool> is_inlier(n, false);
  std::fill(is_inlier.begin(), is_inlier.begin() + n_in, true);
  std::shuffle(is_inlier.begin(), is_inlier.end(), rng);

  std::normal_distribution<double> noise(0.0, 1.0);
  CorrSet set;
  set.corrs.resize(n);
  for (int i = 0; i < n; ++i) {
    auto& c = set.corrs[i];
    c.src = uniform_cube(rng, cfg.scene_extent);
    if (is_inlier[i]) {
      const double nx = noise(rng), ny = noise(rng), nz = noise(rng);
      c.tgt = gt.apply(c.src) + cfg.noise_sigma * Eigen::Vector3d(nx, ny, nz);
    } else {
      c.tgt = gt.apply(uniform_cube(rng, cfg.scene_extent));
    }
  }
  set.gt = gt;
  set.labels = std::move(is_inlier);
  return set;
}

std::vector<CorrSet> gen_suite(const SynthConfig& base, int count, double ratio_lo, double ratio_hi) {
  std::vector<CorrSet> out;
  out.reserve(count);
  for (int k = 0; k < count; ++k) {
    SynthConfig cfg = base;
    cfg.seed = scene_seed(base.seed, static_cast<std::uint64_t>(k));
    std::mt19937_64 rng(cfg.seed ^ 0xA5A5A5A5ULL);
    cfg.inlier_ratio = std::uniform_real_distribution<double>(ratio_lo, ratio_hi)(rng);
    out.push_back(gen_scene(cfg));
  }
  return out;
}

}  // namespace hgct
