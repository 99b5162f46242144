#pragma once

#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace hgct {

using Point3 = Eigen::Vector3d;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct Correspondence {
  Point3 src = Point3::Zero();
  Point3 tgt = Point3::Zero();
  Vector feat;  // empty when the set carries no descriptors
};

struct RigidTransform {
  Eigen::Matrix3d R = Eigen::Matrix3d::Identity();
  Eigen::Vector3d t = Eigen::Vector3d::Zero();

  static RigidTransform identity() { return {}; }

  Point3 apply(const Point3& p) const { return R * p + t; }
  Eigen::Matrix4d matrix() const;
  RigidTransform inverse() const;
  /// (*this) ∘ other, i.e. apply `other` first.
  RigidTransform compose(const RigidTransform& other) const;
  bool is_valid(double tol = 1e-9) const;
};

struct CorrSet {
  std::vector<Correspondence> corrs;
  std::optional<RigidTransform> gt;
  std::optional<std::vector<bool>> labels;

  int size() const { return static_cast<int>(corrs.size()); }
  int feat_dim() const { return corrs.empty() ? 0 : static_cast<int>(corrs.front().feat.size()); }
  /// Throws InvalidArgument when labels/features are inconsistent or a coordinate is not finite.
  void validate() const;
};

struct PointPair {
  Point3 src;
  Point3 tgt;
};

/// Weighted least-squares rigid fit (Kabsch with reflection correction).
/// Throws DegenerateInput for fewer than three usable pairs or collinear/coincident points.
RigidTransform kabsch_svd(std::span<const PointPair> pairs, std::span<const double> weights = {});

/// Convenience overload: fit on a subset of a correspondence set.
RigidTransform kabsch_svd(const CorrSet& set, std::span<const int> indices);

double residual(const RigidTransform& T, const Correspondence& c);
double residual(const RigidTransform& T, const Point3& src, const Point3& tgt);

double rotation_error_deg(const Eigen::Matrix3d& R_est, const Eigen::Matrix3d& R_gt);
double translation_error(const Eigen::Vector3d& t_est, const Eigen::Vector3d& t_gt);

/// Rotation of `angle_deg` degrees about `axis` (normalized internally).
Eigen::Matrix3d axis_angle(const Eigen::Vector3d& axis, double angle_deg);

}  // namespace hgct
