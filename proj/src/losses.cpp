#include "hgct/losses.hpp"

#include <algorithm>
#include <cmath>

#include "hgct/error.hpp"
#include "hgct/hypergraph.hpp"

namespace hgct {

namespace {

// BCE on a clamped probability; `dp` receives d/dp, zero when the clamp is active.
double bce(double p, double target, double* dp) {
  const double q = std::clamp(p, kProbClamp, 1.0 - kProbClamp);
  if (dp) *dp = (p == q) ? (-target / q + (1.0 - target) / (1.0 - q)) : 0.0;
  return -(target * std::log(q) + (1.0 - target) * std::log(1.0 - q));
}

void check_labels(std::size_t n, const std::vector<bool>& labels) {
  if (labels.size() != n) throw Error(ErrorKind::InvalidArgument, "label count does not match loss input");
}

}  // namespace

double loss_class(const Vector& s_hat, const std::vector<bool>& labels, Vector* grad) {
  const auto n = static_cast<std::size_t>(s_hat.size());
  check_labels(n, labels);
  if (grad) grad->setZero(s_hat.size());
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double dp = 0.0;
    total += bce(s_hat[i], labels[i] ? 1.0 : 0.0, grad ? &dp : nullptr);
    if (grad) (*grad)[i] = dp / static_cast<double>(n);
  }
  return total / static_cast<double>(n);
}

double loss_match(const Matrix& x, const std::vector<bool>& labels, double sigma_f, Matrix* grad_x,
                  double* grad_sigma_f) {
  const int n = static_cast<int>(x.rows());
  check_labels(n, labels);
  if (!(sigma_f > 0.0)) throw Error(ErrorKind::InvalidArgument, "sigma_f must be positive");
  const double inv_s2 = 1.0 / (sigma_f * sigma_f);
  const double norm = 1.0 / (static_cast<double>(n) * n);

  const Vector sq = x.rowwise().squaredNorm();
  Matrix dist = (-2.0 * x * x.transpose()).eval();
  dist.colwise() += sq;
  dist.rowwise() += sq.transpose();
  dist = dist.cwiseMax(0.0);
  dist.diagonal().setZero();

  Matrix g_dist = Matrix::Zero(n, n);
  double total = 0.0;
  double g_sigma = 0.0;
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const double raw = 1.0 - dist(i, j) * inv_s2;
      const double eta = std::max(0.0, raw);
      const double target = (labels[i] && labels[j]) ? 1.0 : 0.0;
      const double diff = eta - target;
      total += diff * diff;
      if (raw > 0.0 && i != j) {
        const double g_eta = 2.0 * diff * norm;
        g_dist(i, j) = -g_eta * inv_s2;
        g_sigma += g_eta * 2.0 * dist(i, j) * inv_s2 / sigma_f;
      }
    }
  }
  if (grad_x) {
    // D_ij = ‖x_i − x_j‖² → dL/dx = 2 (diag(rowsum(G + Gᵀ)) X − (G + Gᵀ) X)
    const Matrix gs = g_dist + g_dist.transpose();
    *grad_x = 2.0 * (gs.rowwise().sum().asDiagonal() * x - gs * x);
  }
  if (grad_sigma_f) *grad_sigma_f = g_sigma;
  return total * norm;
}

double loss_graph(const Matrix& w, const Matrix& h_star, Matrix* grad) {
  const int n = static_cast<int>(w.rows());
  if (h_star.rows() != n || h_star.cols() != w.cols())
    throw Error(ErrorKind::InvalidArgument, "graph loss shape mismatch");
  const double norm = 1.0 / (static_cast<double>(n) * static_cast<double>(w.cols()));
  if (grad) grad->setZero(n, w.cols());
  double total = 0.0;
  for (Eigen::Index j = 0; j < w.cols(); ++j) {
    for (int i = 0; i < n; ++i) {
      double dp = 0.0;
      total += bce(w(i, j), h_star(i, j), grad ? &dp : nullptr);
      if (grad) (*grad)(i, j) = dp * norm;
    }
  }
  return total * norm;
}

JointLoss joint_loss(const ForwardTrace& trace, const std::vector<bool>& labels, const HyperGCTParams& params) {
  JointLoss out;
  out.grads = OutputGrads::zeros(trace.n, trace.channels);
  out.values.cls = loss_class(trace.s_hat, labels, &out.grads.d_s_hat);
  double g_sigma = 0.0;
  out.values.match = loss_match(trace.x_final(), labels, params.sigma_f(), &out.grads.d_x_final, &g_sigma);
  out.grads.d_log_sigma_f = g_sigma * params.sigma_f();
  out.values.graph = loss_graph(trace.w_final, gt_hypergraph(labels).h, &out.grads.d_w_final);
  return out;
}

}  // namespace hgct
