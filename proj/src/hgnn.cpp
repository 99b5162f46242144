#include "hgct/hgnn.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "hgct/error.hpp"

namespace hgct {

namespace {

template <typename View>
Matrix affine(const Matrix& x, const View& a) {
  Matrix out = x * a.W;
  out.rowwise() += a.b.transpose();
  return out;
}

Matrix relu(const Matrix& m) { return m.cwiseMax(0.0); }

Matrix relu_mask(const Matrix& pre, const Matrix& grad) {
  return (pre.array() > 0.0).select(grad, 0.0);
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

Vector inverse_or_zero(const Vector& v) {
  return v.unaryExpr([](double d) { return d > 0.0 ? 1.0 / d : 0.0; });
}

// Backward of y = x / ‖x‖ per row, given the forward output y and norms ‖x‖.
Matrix normalize_rows_backward(const Matrix& y, const Vector& norms, const Matrix& grad) {
  Matrix out = Matrix::Zero(y.rows(), y.cols());
  for (Eigen::Index i = 0; i < y.rows(); ++i) {
    if (norms[i] <= 0.0) continue;
    const double proj = y.row(i).dot(grad.row(i));
    out.row(i) = (grad.row(i) - proj * y.row(i)) / norms[i];
  }
  return out;
}

// Accumulates gradients of y = x·W + b into `grad_params`, returns dL/dx.
Matrix affine_backward(const Matrix& x, const Matrix& grad_out, const AffineSlot& slot, const HyperGCTParams& params,
                       HyperGCTParams& grad_params) {
  auto g = grad_params.view(slot);
  g.W.noalias() += x.transpose() * grad_out;
  g.b += grad_out.colwise().sum().transpose();
  return grad_out * params.view(slot).W.transpose();
}

void row_softmax_inplace(Matrix& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    const double mx = m.row(i).maxCoeff();
    m.row(i) = (m.row(i).array() - mx).exp();
    m.row(i) /= m.row(i).sum();
  }
}

void require_finite(const Matrix& m, const char* what, int layer) {
  if (!m.allFinite())
    throw Error(ErrorKind::NonFinite, std::string(what) + " became non-finite at layer " + std::to_string(layer));
}

}  // namespace

OutputGrads OutputGrads::zeros(int n, int channels) {
  return {Vector::Zero(n), Matrix::Zero(n, channels), Matrix::Zero(n, n), 0.0};
}

int update_keep_count(int t, int layers, int n) {
  const int remaining = layers - (t + 1);
  return std::max(1, (remaining * n + 5) / 10);
}

Matrix normalize_rows(const Matrix& m, Vector* norms) {
  Matrix out = m;
  Vector nrm = m.rowwise().norm();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    if (nrm[i] > 0.0)
      out.row(i) /= nrm[i];
    else
      out.row(i).setZero();
  }
  if (norms) *norms = std::move(nrm);
  return out;
}

Matrix centered_input(const CorrSet& set) {
  const int n = set.size();
  Matrix p(n, HyperGCTParams::kInputDim);
  for (int i = 0; i < n; ++i) {
    p.block<1, 3>(i, 0) = set.corrs[i].src.transpose();
    p.block<1, 3>(i, 3) = set.corrs[i].tgt.transpose();
  }
  if (n > 0) p.rowwise() -= p.colwise().mean();
  return p;
}

Matrix nonlocal_block(const Matrix& x, const Matrix& w, const HyperGCTParams& params, int layer) {
  const auto& s = params.layout().conv.at(layer);
  const double scale = 1.0 / std::sqrt(static_cast<double>(params.channels()));
  const Matrix theta = affine(x, params.view(s.nl_theta));
  const Matrix phi = affine(x, params.view(s.nl_phi));
  const Matrix g = affine(x, params.view(s.nl_g));
  Matrix attn = scale * theta * phi.transpose();
  attn.array() += (w.array() + kNonLocalEps).log();
  row_softmax_inplace(attn);
  return x + affine(Matrix(attn * g), params.view(s.nl_out));
}

ForwardTrace forward(const CorrSet& set, const Hypergraph& hg0, const Matrix& w_h0, const HyperGCTParams& params) {
  const int n = set.size();
  const int c = params.channels();
  const int layers = params.layers();
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "forward needs at least one correspondence");
  if (hg0.size() != n || w_h0.rows() != n || w_h0.cols() != n)
    throw Error(ErrorKind::InvalidArgument, "hypergraph size does not match correspondence count");
  if (!params.flat().allFinite()) throw Error(ErrorKind::NonFinite, "parameters contain non-finite values");
  const auto& layout = params.layout();
  const double scale = 1.0 / std::sqrt(static_cast<double>(c));

  ForwardTrace tr;
  tr.n = n;
  tr.channels = c;
  tr.input = centered_input(set);
  tr.lift_pre = affine(tr.input, params.view(layout.input_lift));
  Matrix x = normalize_rows(tr.lift_pre, &tr.lift_norm);
  tr.nl_bias = (w_h0.array() + kNonLocalEps).log().matrix();
  require_finite(x, "input lift", 0);

  Matrix h = hg0.h;
  Matrix w_h = hg0.w_h;
  Matrix y_prev = Matrix::Zero(n, c);
  tr.layers.reserve(layers);

  for (int t = 0; t < layers; ++t) {
    const auto& s = layout.conv[t];
    LayerCache L;
    L.x_in = x;
    L.h = h;
    L.w_h = w_h;
    L.y_prev = y_prev;

    // Stage 1: vertices → hyperedges.
    L.inv_de = inverse_or_zero(h.colwise().sum().transpose());
    L.y_hat = L.inv_de.asDiagonal() * (h.transpose() * x);
    L.z.resize(n, 2 * c);
    L.z << y_prev, L.y_hat;
    L.mlp1_pre = affine(L.z, params.view(s.mlp1_hidden));
    L.y_raw = affine(relu(L.mlp1_pre), params.view(s.mlp1_out));
    L.y = normalize_rows(L.y_raw, &L.y_norm);

    // Stage 2: hyperedges → vertices, weighted by hyperedge weights.
    L.we = w_h.colwise().sum().transpose();
    L.inv_dv = inverse_or_zero(h.rowwise().sum());
    L.x_hat = L.inv_dv.asDiagonal() * (h * (L.we.asDiagonal() * L.y));
    L.mlp2_pre = affine(L.x_hat, params.view(s.mlp2_hidden));
    L.mlp2_out = affine(relu(L.mlp2_pre), params.view(s.mlp2_out));
    L.u_pre = x + L.mlp2_out;
    L.u = relu(L.u_pre);

    // NonLocal enhancement biased by the initial second-order weights.
    L.theta = affine(L.u, params.view(s.nl_theta));
    L.phi = affine(L.u, params.view(s.nl_phi));
    L.g = affine(L.u, params.view(s.nl_g));
    L.attn = scale * L.theta * L.phi.transpose() + tr.nl_bias;
    row_softmax_inplace(L.attn);
    L.attn_g = L.attn * L.g;
    L.v = L.u + affine(L.attn_g, params.view(s.nl_out));
    L.x_out = normalize_rows(L.v, &L.v_norm);
    require_finite(L.x_out, "vertex features", t);

    // Update block: each vertex keeps its K₂ most similar incident hyperedges.
    if (t + 1 < layers) {
      const auto& u = layout.update[t];
      L.has_update = true;
      L.k2 = update_keep_count(t, layers, n);
      L.query = affine(L.x_out, params.view(u.query));
      L.key = affine(L.y, params.view(u.key));
      L.sim = (scale * L.query * L.key.transpose()).unaryExpr([](double v) { return sigmoid(v); });
      require_finite(L.sim, "similarity", t);

      Matrix h_next = Matrix::Zero(n, n);
      Matrix w_next = Matrix::Zero(n, n);
      std::vector<int> cand;
      for (int i = 0; i < n; ++i) {
        cand.clear();
        for (int j = 0; j < n; ++j)
          if (h(i, j) != 0.0) cand.push_back(j);
        const int keep = std::min<int>(L.k2, static_cast<int>(cand.size()));
        // Ranked on a 1e-12 grid so rounding noise between identical hyperedges resolves by index.
        std::partial_sort(cand.begin(), cand.begin() + keep, cand.end(), [&](int a, int b) {
          const double sa = std::round(L.sim(i, a) * kTieGrid), sb = std::round(L.sim(i, b) * kTieGrid);
          return sa > sb || (sa == sb && a < b);
        });
        for (int k = 0; k < keep; ++k) {
          h_next(i, cand[k]) = 1.0;
          w_next(i, cand[k]) = L.sim(i, cand[k]);
        }
      }
      h = std::move(h_next);
      w_h = std::move(w_next);
    }

    x = L.x_out;
    y_prev = L.y;
    tr.layers.push_back(std::move(L));
  }

  tr.h_final = h;
  tr.w_final = w_h;
  const auto head = params.view(layout.conf_head);
  tr.logits = (x * head.W).col(0).array() + head.b[0];
  tr.s_hat = tr.logits.unaryExpr([](double v) { return sigmoid(v); });
  if (!tr.s_hat.allFinite()) throw Error(ErrorKind::NonFinite, "confidence scores became non-finite");
  return tr;
}

HyperGCTParams backward(const ForwardTrace& tr, const HyperGCTParams& params, const OutputGrads& grads) {
  const int n = tr.n;
  const int c = tr.channels;
  const int layers = params.layers();
  const auto& layout = params.layout();
  const double scale = 1.0 / std::sqrt(static_cast<double>(c));
  HyperGCTParams gp = HyperGCTParams::zeros_like(params);

  // Confidence head.
  const Vector d_logits = grads.d_s_hat.array() * tr.s_hat.array() * (1.0 - tr.s_hat.array());
  {
    auto g = gp.view(layout.conf_head);
    g.W.col(0) += tr.x_final().transpose() * d_logits;
    g.b[0] += d_logits.sum();
  }
  Matrix gx = grads.d_x_final + d_logits * params.view(layout.conf_head).W.col(0).transpose();
  Matrix gw = Matrix::Zero(n, n);  // dL/dW_H^{t+1}, consumed by update block t
  Matrix gy = Matrix::Zero(n, c);  // dL/dY^t

  for (int t = layers - 1; t >= 0; --t) {
    const LayerCache& L = tr.layers[t];
    const auto& s = layout.conv[t];

    if (L.has_update) {
      // W_H^{t+1}(i,j) = sim(i,j) on retained entries only.
      const Matrix& h_next = tr.layers[t + 1].h;
      Matrix g_pre = (h_next.array() != 0.0).select(gw.array() * L.sim.array() * (1.0 - L.sim.array()), 0.0);
      g_pre *= scale;
      const Matrix g_query = g_pre * L.key;
      const Matrix g_key = g_pre.transpose() * L.query;
      gx += affine_backward(L.x_out, g_query, layout.update[t].query, params, gp);
      gy += affine_backward(L.y, g_key, layout.update[t].key, params, gp);
    }

    // X^{t+1} = normalize(V)
    const Matrix g_v = normalize_rows_backward(L.x_out, L.v_norm, gx);

    // V = U + (A G) W_out + b_out
    Matrix g_u = g_v;
    const Matrix g_ag = affine_backward(L.attn_g, g_v, s.nl_out, params, gp);
    const Matrix g_attn = g_ag * L.g.transpose();
    const Matrix g_g = L.attn.transpose() * g_ag;
    const Vector row_dot = (g_attn.array() * L.attn.array()).rowwise().sum();
    Matrix g_logits = L.attn.array() * (g_attn.colwise() - row_dot).array();
    g_logits *= scale;
    const Matrix g_theta = g_logits * L.phi;
    const Matrix g_phi = g_logits.transpose() * L.theta;
    g_u += affine_backward(L.u, g_theta, s.nl_theta, params, gp);
    g_u += affine_backward(L.u, g_phi, s.nl_phi, params, gp);
    g_u += affine_backward(L.u, g_g, s.nl_g, params, gp);

    // U = relu(X^t + MLP₂(X̂))
    const Matrix g_upre = relu_mask(L.u_pre, g_u);
    Matrix gx_in = g_upre;
    const Matrix g_hidden2 = relu_mask(L.mlp2_pre, affine_backward(relu(L.mlp2_pre), g_upre, s.mlp2_out, params, gp));
    const Matrix g_xhat = affine_backward(L.x_hat, g_hidden2, s.mlp2_hidden, params, gp);

    // X̂ = Dv⁻¹ H diag(we) Y
    const Matrix back = L.h.transpose() * (L.inv_dv.asDiagonal() * g_xhat);
    gy += L.we.asDiagonal() * back;
    const Vector g_we = (back.array() * L.y.array()).rowwise().sum();
    Matrix gw_cur = Matrix::Zero(n, n);
    gw_cur.rowwise() += g_we.transpose();  // we_j = Σ_i W_H(i,j)
    if (t == layers - 1) gw_cur += grads.d_w_final;

    // Y^t = normalize(MLP₁([Y^{t-1} | Ŷ]))
    const Matrix g_yraw = normalize_rows_backward(L.y, L.y_norm, gy);
    const Matrix g_hidden1 = relu_mask(L.mlp1_pre, affine_backward(relu(L.mlp1_pre), g_yraw, s.mlp1_out, params, gp));
    const Matrix g_z = affine_backward(L.z, g_hidden1, s.mlp1_hidden, params, gp);
    const Matrix g_yhat = g_z.rightCols(c);

    // Ŷ = De⁻¹ Hᵀ X^t
    gx_in += L.h * (L.inv_de.asDiagonal() * g_yhat);

    gx = std::move(gx_in);
    gy = g_z.leftCols(c);
    gw = std::move(gw_cur);
  }

  // X⁰ = normalize(P W_in + b_in)
  const Matrix g_lift = normalize_rows_backward(tr.layers.front().x_in, tr.lift_norm, gx);
  affine_backward(tr.input, g_lift, layout.input_lift, params, gp);

  gp.log_sigma_f() += grads.d_log_sigma_f;
  if (!gp.flat().allFinite()) throw Error(ErrorKind::NonFinite, "gradient became non-finite");
  return gp;
}

}  // namespace hgct
