#include "hgct/compat.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "hgct/error.hpp"

namespace hgct {

void CompatConfig::validate() const {
  if (!(sigma_d > 0.0)) throw Error(ErrorKind::InvalidArgument, "sigma_d must be positive");
  if (!(k1_frac > 0.0 && k1_frac <= 1.0)) throw Error(ErrorKind::InvalidArgument, "k1_frac must lie in (0, 1]");
}

double rigid_distance(const Correspondence& a, const Correspondence& b) {
  return std::abs((a.src - b.src).norm() - (a.tgt - b.tgt).norm());
}

double compat_score(double d, double sigma_d) {
  return std::max(0.0, 1.0 - (d * d) / (sigma_d * sigma_d));
}

Matrix compat_matrix(const CorrSet& set, double sigma_d) {
  const int n = set.size();
  Matrix gamma = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double g = compat_score(rigid_distance(set.corrs[i], set.corrs[j]), sigma_d);
      gamma(i, j) = g;
      gamma(j, i) = g;
    }
  }
  return gamma;
}

double dynamic_threshold(const Matrix& gamma, double k1_frac) {
  const int n = static_cast<int>(gamma.rows());
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "dynamic_threshold needs a non-empty matrix");
  const int off_diag = std::max(1, n - 1);
  const int k1 = std::min(off_diag, std::max(1, static_cast<int>(std::floor(k1_frac * n + 0.5))));
  if (n == 1) return 0.0;

  double total = 0.0;
  std::vector<double> row;
  row.reserve(n);
  for (int i = 0; i < n; ++i) {
    row.clear();
    for (int j = 0; j < n; ++j)
      if (j != i) row.push_back(gamma(i, j));
    std::nth_element(row.begin(), row.begin() + (k1 - 1), row.end(), std::greater<>());
    for (int k = 0; k < k1; ++k) total += row[k];
  }
  return total / (static_cast<double>(k1) * n);
}

CompatGraph build_compat_graph(const CorrSet& set, const CompatConfig& cfg) {
  cfg.validate();
  const int n = set.size();
  if (n < 3) throw Error(ErrorKind::InvalidArgument, "compatibility graph needs at least three correspondences");

  const Matrix gamma = compat_matrix(set, cfg.sigma_d);
  CompatGraph g;
  g.order = cfg.order;
  g.theta_cmp = cfg.theta_override ? *cfg.theta_override : dynamic_threshold(gamma, cfg.k1_frac);
  g.w_gamma = (gamma.array() >= g.theta_cmp).select(gamma, 0.0);
  g.w_gamma.diagonal().setZero();

  if ((g.w_gamma.array() > 0.0).count() == 0)
    throw Error(ErrorKind::EmptyGraph, "no correspondence pair reaches the compatibility threshold");

  if (cfg.order == GraphOrder::SOG) {
    const Matrix second = g.w_gamma * g.w_gamma;
    g.w_h0 = g.w_gamma.cwiseProduct(second);
    // The product of a symmetric matrix with itself is symmetric up to summation order.
    g.w_h0 = 0.5 * (g.w_h0 + g.w_h0.transpose()).eval();
  } else {
    g.w_h0 = g.w_gamma;
  }
  return g;
}

}  // namespace hgct
