#pragma once

#include <optional>

#include "hgct/geom.hpp"

namespace hgct {

enum class GraphOrder { FOG, SOG };

struct CompatConfig {
  double sigma_d = 0.1;     ///< distance sensitivity in meters
  double k1_frac = 0.1;     ///< top-K fraction used by the dynamic threshold
  GraphOrder order = GraphOrder::SOG;
  std::optional<double> theta_override;  ///< fixed threshold for robustness sweeps

  void validate() const;
};

struct CompatGraph {
  Matrix w_gamma;  ///< thresholded pairwise scores, zero diagonal
  Matrix w_h0;     ///< initial hypergraph weights (FOG: w_gamma, SOG: w_gamma ⊙ w_gamma²)
  double theta_cmp = 0.0;
  GraphOrder order = GraphOrder::SOG;

  int size() const { return static_cast<int>(w_gamma.rows()); }
};

double rigid_distance(const Correspondence& a, const Correspondence& b);
double compat_score(double d, double sigma_d);

/// Unthresholded γ matrix, diagonal set to zero.
Matrix compat_matrix(const CorrSet& set, double sigma_d);

/// Mean of the K₁ largest off-diagonal entries per row, K₁ = max(1, round(k1_frac·N)).
double dynamic_threshold(const Matrix& gamma, double k1_frac);

/// Throws EmptyGraph when no pair survives the threshold.
CompatGraph build_compat_graph(const CorrSet& set, const CompatConfig& cfg);

}  // namespace hgct
