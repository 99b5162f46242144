#include "hgct/geom.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Geometry>
#include <Eigen/SVD>

#include "hgct/error.hpp"

namespace hgct {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::DegenerateInput: return "DegenerateInput";
    case ErrorKind::EmptyGraph: return "EmptyGraph";
    case ErrorKind::NoEdges: return "NoEdges";
    case ErrorKind::NonFinite: return "NonFinite";
    case ErrorKind::NoHypothesis: return "NoHypothesis";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::Config: return "Config";
    case ErrorKind::Io: return "Io";
    case ErrorKind::Parse: return "Parse";
  }
  return "Unknown";
}

Eigen::Matrix4d RigidTransform::matrix() const {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.topLeftCorner<3, 3>() = R;
  m.topRightCorner<3, 1>() = t;
  return m;
}

RigidTransform RigidTransform::inverse() const {
  RigidTransform inv;
  inv.R = R.transpose();
  inv.t = -(inv.R * t);
  return inv;
}

RigidTransform RigidTransform::compose(const RigidTransform& other) const {
  RigidTransform out;
  out.R = R * other.R;
  out.t = R * other.t + t;
  return out;
}

bool RigidTransform::is_valid(double tol) const {
  if (!R.allFinite() || !t.allFinite()) return false;
  const double ortho = (R.transpose() * R - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
  return ortho <= tol && std::abs(R.determinant() - 1.0) <= tol;
}

void CorrSet::validate() const {
  const int dim = feat_dim();
  for (std::size_t i = 0; i < corrs.size(); ++i) {
    const auto& c = corrs[i];
    if (!c.src.allFinite() || !c.tgt.allFinite())
      throw Error(ErrorKind::InvalidArgument, "non-finite coordinate in correspondence " + std::to_string(i));
    if (c.feat.size() != dim)
      throw Error(ErrorKind::InvalidArgument, "feature dimension mismatch at correspondence " + std::to_string(i));
  }
  if (labels && labels->size() != corrs.size())
    throw Error(ErrorKind::InvalidArgument, "label count does not match correspondence count");
}

RigidTransform kabsch_svd(std::span<const PointPair> pairs, std::span<const double> weights) {
  if (!weights.empty() && weights.size() != pairs.size())
    throw Error(ErrorKind::InvalidArgument, "weight count does not match pair count");

  int positive = 0;
  double wsum = 0.0;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const double w = weights.empty() ? 1.0 : weights[i];
    if (w < 0.0 || !std::isfinite(w)) throw Error(ErrorKind::InvalidArgument, "weights must be finite and nonnegative");
    if (w > 0.0) {
      ++positive;
      wsum += w;
    }
  }
  if (positive < 3) throw Error(ErrorKind::DegenerateInput, "need at least three weighted pairs");

  Eigen::Vector3d cs = Eigen::Vector3d::Zero();
  Eigen::Vector3d ct = Eigen::Vector3d::Zero();
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const double w = weights.empty() ? 1.0 : weights[i];
    cs += w * pairs[i].src;
    ct += w * pairs[i].tgt;
  }
  cs /= wsum;
  ct /= wsum;

  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  Eigen::Matrix3d src_scatter = Eigen::Matrix3d::Zero();
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const double w = weights.empty() ? 1.0 : weights[i];
    const Eigen::Vector3d a = pairs[i].src - cs;
    const Eigen::Vector3d b = pairs[i].tgt - ct;
    cov += w * a * b.transpose();
    src_scatter += w * a * a.transpose();
  }

  // Rank of the centered source scatter detects collinear or coincident input;
  // the cross-covariance alone can lose rank when only the target side degenerates.
  Eigen::JacobiSVD<Eigen::Matrix3d> scatter_svd(src_scatter);
  const auto& sv = scatter_svd.singularValues();
  if (!(sv(0) > 0.0) || sv(1) < 1e-12 * sv(0))
    throw Error(ErrorKind::DegenerateInput, "collinear or coincident points");

  Eigen::JacobiSVD<Eigen::Matrix3d> svd(cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& csv = svd.singularValues();
  if (!(csv(0) > 0.0) || csv(1) < 1e-12 * csv(0))
    throw Error(ErrorKind::DegenerateInput, "rank-deficient cross-covariance");

  Eigen::Matrix3d V = svd.matrixV();
  const Eigen::Matrix3d U = svd.matrixU();
  if ((V * U.transpose()).determinant() < 0.0) V.col(2) *= -1.0;

  RigidTransform T;
  T.R = V * U.transpose();
  T.t = ct - T.R * cs;
  if (!T.R.allFinite() || !T.t.allFinite()) throw Error(ErrorKind::NonFinite, "kabsch produced non-finite output");
  return T;
}

RigidTransform kabsch_svd(const CorrSet& set, std::span<const int> indices) {
  std::vector<PointPair> pairs;
  pairs.reserve(indices.size());
  for (int i : indices) pairs.push_back({set.corrs[i].src, set.corrs[i].tgt});
  return kabsch_svd(pairs);
}

double residual(const RigidTransform& T, const Point3& src, const Point3& tgt) {
  return (T.R * src + T.t - tgt).norm();
}

double residual(const RigidTransform& T, const Correspondence& c) { return residual(T, c.src, c.tgt); }

double rotation_error_deg(const Eigen::Matrix3d& R_est, const Eigen::Matrix3d& R_gt) {
  // Same angle as acos(clamp((tr(M) - 1) / 2)), but the sine term keeps precision
  // for nearly identical rotations where acos loses about half the digits.
  const Eigen::Matrix3d M = R_gt.transpose() * R_est;
  const double c = std::clamp((M.trace() - 1.0) / 2.0, -1.0, 1.0);
  const Eigen::Vector3d w(M(2, 1) - M(1, 2), M(0, 2) - M(2, 0), M(1, 0) - M(0, 1));
  const double s = std::min(1.0, 0.5 * w.norm());
  return std::atan2(s, c) * 180.0 / std::numbers::pi;
}

double translation_error(const Eigen::Vector3d& t_est, const Eigen::Vector3d& t_gt) { return (t_est - t_gt).norm(); }

Eigen::Matrix3d axis_angle(const Eigen::Vector3d& axis, double angle_deg) {
  return Eigen::AngleAxisd(angle_deg * std::numbers::pi / 180.0, axis.normalized()).toRotationMatrix();
}

}  // namespace hgct
