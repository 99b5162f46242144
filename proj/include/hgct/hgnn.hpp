#pragma once

#include <vector>

#include "hgct/geom.hpp"
#include "hgct/hypergraph.hpp"
#include "hgct/params.hpp"

namespace hgct {

/// Intermediates of one convolution layer t (and of the update block that follows it).
struct LayerCache {
  Matrix x_in;   ///< X^t
  Matrix h;      ///< H^t
  Matrix w_h;    ///< W_H^t
  Vector inv_de, inv_dv, we;
  Matrix y_prev;  ///< Y^{t-1}
  Matrix y_hat;   ///< Ŷ^t
  Matrix z;       ///< [Y^{t-1} | Ŷ^t]
  Matrix mlp1_pre, y_raw;
  Vector y_norm;
  Matrix y;  ///< Y^t
  Matrix x_hat;
  Matrix mlp2_pre, mlp2_out;
  Matrix u_pre, u;
  Matrix theta, phi, g, attn, attn_g, v;
  Vector v_norm;
  Matrix x_out;  ///< X^{t+1}
  // update block (absent after the last layer)
  bool has_update = false;
  int k2 = 0;
  Matrix query, key, sim;  ///< sim = sigmoid(Q Kᵀ / √C), full N×N
};

struct ForwardTrace {
  int n = 0;
  int channels = 0;
  Matrix input;  ///< centered N×6 coordinates
  Matrix lift_pre;
  Vector lift_norm;
  Matrix nl_bias;  ///< log(W_H⁰ + ε)
  std::vector<LayerCache> layers;
  Matrix h_final;    ///< H after the last update
  Matrix w_final;    ///< W_H after the last update
  Vector logits;
  Vector s_hat;

  const Matrix& x(int t) const { return t < static_cast<int>(layers.size()) ? layers[t].x_in : layers.back().x_out; }
  const Matrix& x_final() const { return layers.back().x_out; }
  Hypergraph final_hypergraph() const { return {h_final, w_final}; }
};

/// Upstream gradients of a scalar loss with respect to the network outputs.
struct OutputGrads {
  Vector d_s_hat;    ///< N
  Matrix d_x_final;  ///< N×C
  Matrix d_w_final;  ///< N×N
  double d_log_sigma_f = 0.0;

  static OutputGrads zeros(int n, int channels);
};

constexpr double kNonLocalEps = 1e-12;
/// Update-block similarities are compared after rounding to multiples of 1/kTieGrid.
constexpr double kTieGrid = 1e12;

/// Retained hyperedges per vertex after update block `t` (0-based, between conv t and t+1).
int update_keep_count(int t, int layers, int n);

/// X⁰ = row-normalized lift of the centered (src ⊕ tgt) coordinates.
Matrix centered_input(const CorrSet& set);

/// Throws NonFinite if any intermediate stops being finite.
ForwardTrace forward(const CorrSet& set, const Hypergraph& hg0, const Matrix& w_h0, const HyperGCTParams& params);

/// Reverse-mode gradient of the scalar loss whose output gradients are `grads`.
/// Top-K selection is treated as fixed support.
HyperGCTParams backward(const ForwardTrace& trace, const HyperGCTParams& params, const OutputGrads& grads);

/// Softmax-attention block biased by log(W + ε); exposed for testing.
Matrix nonlocal_block(const Matrix& x, const Matrix& w, const HyperGCTParams& params, int layer);

// Row-wise L2 normalization; zero rows stay zero. `norms` receives the input norms.
Matrix normalize_rows(const Matrix& m, Vector* norms = nullptr);

}  // namespace hgct
