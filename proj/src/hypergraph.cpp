#include "hgct/hypergraph.hpp"

#include <sstream>

#include "hgct/error.hpp"

namespace hgct {

std::vector<int> Hypergraph::members(int j) const {
  std::vector<int> out;
  for (int i = 0; i < size(); ++i)
    if (h(i, j) != 0.0) out.push_back(i);
  return out;
}

Hypergraph init_hypergraph(const CompatGraph& g) {
  const int n = g.size();
  Hypergraph hg;
  hg.h = (g.w_h0.array() > 0.0).cast<double>().matrix();
  const double scale = g.w_h0.maxCoeff();
  hg.w_h = scale > 0.0 ? Matrix(g.w_h0 / scale) : Matrix(g.w_h0);
  for (int i = 0; i < n; ++i) {
    if (hg.h.row(i).sum() > 0.0) {
      hg.h(i, i) = 1.0;
      hg.w_h(i, i) = 1.0;
    }
  }
  return hg;
}

Vector hyperedge_degrees(const Hypergraph& hg) { return hg.h.colwise().sum().transpose(); }

Vector vertex_degrees(const Hypergraph& hg) { return hg.h.rowwise().sum(); }

Vector hyperedge_weights(const Hypergraph& hg) { return hg.w_h.colwise().sum().transpose(); }

Hypergraph gt_hypergraph(const std::vector<bool>& labels) {
  const int n = static_cast<int>(labels.size());
  Hypergraph hg;
  hg.h = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (labels[i] && labels[j]) hg.h(i, j) = 1.0;
  hg.w_h = hg.h;
  return hg;
}

PrecisionResult hyperedge_precision_detail(const Hypergraph& hg, const std::vector<bool>& labels) {
  const int n = hg.size();
  if (static_cast<int>(labels.size()) != n)
    throw Error(ErrorKind::InvalidArgument, "label count does not match hypergraph size");
  PrecisionResult r;
  double sum = 0.0;
  int used = 0;
  for (int j = 0; j < n; ++j) {
    int members = 0;
    int correct = 0;
    for (int i = 0; i < n; ++i) {
      if (hg.h(i, j) == 0.0) continue;
      ++members;
      if (labels[i]) ++correct;
    }
    if (members == 0) {
      ++r.empty_edges;
      continue;
    }
    sum += static_cast<double>(correct) / members;
    ++used;
  }
  if (used == 0) throw Error(ErrorKind::NoEdges, "every hyperedge is empty");
  r.precision = sum / used;
  return r;
}

double hyperedge_precision(const Hypergraph& hg, const std::vector<bool>& labels) {
  return hyperedge_precision_detail(hg, labels).precision;
}

std::string debug_dump(const Hypergraph& hg) {
  std::ostringstream os;
  os.precision(6);
  for (int j = 0; j < hg.size(); ++j) {
    const auto m = hg.members(j);
    os << "edge " << j << ": v=";
    for (std::size_t k = 0; k < m.size(); ++k) os << (k ? "," : "") << m[k];
    os << " w=";
    for (std::size_t k = 0; k < m.size(); ++k) os << (k ? "," : "") << hg.w_h(m[k], j);
    os << '\n';
  }
  return os.str();
}

}  // namespace hgct
