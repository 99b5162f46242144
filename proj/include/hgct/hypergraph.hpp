#pragma once

#include <string>
#include <vector>

#include "hgct/compat.hpp"
#include "hgct/geom.hpp"

namespace hgct {

/// Square hypergraph: row i is vertex v_i, column j is hyperedge e_j (seeded by v_j).
struct Hypergraph {
  Matrix h;    ///< binary incidence, stored as 0.0 / 1.0
  Matrix w_h;  ///< nonnegative weights, zero wherever h is zero

  int size() const { return static_cast<int>(h.rows()); }
  /// Sorted vertex indices of hyperedge j.
  std::vector<int> members(int j) const;
};

/// Incidence from the initial weights plus self-membership of every non-isolated vertex.
/// Weights are rescaled so that the largest off-diagonal entry is 1.
Hypergraph init_hypergraph(const CompatGraph& g);

Vector hyperedge_degrees(const Hypergraph& hg);
Vector vertex_degrees(const Hypergraph& hg);
Vector hyperedge_weights(const Hypergraph& hg);

Hypergraph gt_hypergraph(const std::vector<bool>& labels);

struct PrecisionResult {
  double precision = 0.0;
  int empty_edges = 0;
};

/// Mean inlier fraction over non-empty hyperedges. Throws NoEdges if all are empty.
PrecisionResult hyperedge_precision_detail(const Hypergraph& hg, const std::vector<bool>& labels);
double hyperedge_precision(const Hypergraph& hg, const std::vector<bool>& labels);

/// One line per hyperedge: `edge <j>: v=<members> w=<weights>`.
std::string debug_dump(const Hypergraph& hg);

}  // namespace hgct
