#pragma once

#include <vector>

#include "hgct/geom.hpp"
#include "hgct/hgnn.hpp"

namespace hgct {

constexpr double kProbClamp = 1e-7;

struct LossValues {
  double cls = 0.0;
  double match = 0.0;
  double graph = 0.0;

  double total() const { return cls + match + graph; }
};

/// Mean binary cross-entropy of confidences against inlier labels.
double loss_class(const Vector& s_hat, const std::vector<bool>& labels, Vector* grad = nullptr);

/// Spectral matching loss (1/N²)·Σ(η_ij − η*_ij)², η = [1 − ‖X_i − X_j‖²/σ_f²]₊.
double loss_match(const Matrix& x, const std::vector<bool>& labels, double sigma_f, Matrix* grad_x = nullptr,
                  double* grad_sigma_f = nullptr);

/// Row-averaged BCE between the final weights and the ground-truth incidence.
double loss_graph(const Matrix& w, const Matrix& h_star, Matrix* grad = nullptr);

struct JointLoss {
  LossValues values;
  OutputGrads grads;
};

JointLoss joint_loss(const ForwardTrace& trace, const std::vector<bool>& labels, const HyperGCTParams& params);

}  // namespace hgct
