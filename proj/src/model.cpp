#include "gmod/model.hpp"

#include <cmath>

namespace gmod {

const char* fusion_name(Fusion f) {
  switch (f) {
    case Fusion::Concat: return "concat";
    case Fusion::Gating: return "gating";
    case Fusion::Cross: return "cross";
  }
  return "?";
}

Fusion fusion_from_name(const std::string& name) {
  if (name == "concat") return Fusion::Concat;
  if (name == "gating") return Fusion::Gating;
  if (name == "cross") return Fusion::Cross;
  throw ConfigError("unknown fusion: " + name);
}

const char* edge_decoder_name(EdgeDecoderKind k) {
  return k == EdgeDecoderKind::Adjacency ? "adjacency" : "flat";
}

EdgeDecoderKind edge_decoder_from_name(const std::string& name) {
  if (name == "adjacency") return EdgeDecoderKind::Adjacency;
  if (name == "flat") return EdgeDecoderKind::Flat;
  throw ConfigError("unknown edge decoder: " + name);
}

Mask attention_mask(const SceneGraph& g, int query_len, Fusion fusion) {
  const int n = g.node_count();
  const int rows = fusion == Fusion::Gating ? n + 2 + query_len : n + query_len;
  Mask m(rows, rows);

  // Graph nodes: self plus first-order neighbors, both edge directions.
  for (int i = 0; i < n; ++i) {
    m.at(i, i) = 1;
    for (int j : g.neighbors(i)) {
      m.at(i, j) = 1;
      m.at(j, i) = 1;
    }
  }

  if (fusion == Fusion::Gating) {
    const int cls_g = n, cls_q = n + 1, q0 = n + 2;
    // CLS-graph row/column reaches every graph node; CLS-query joins the
    // query block, which is fully connected.
    m.at(cls_g, cls_g) = 1;
    for (int i = 0; i < n; ++i) {
      m.at(cls_g, i) = 1;
      m.at(i, cls_g) = 1;
    }
    for (int a = cls_q; a < q0 + query_len; ++a)
      for (int b = cls_q; b < q0 + query_len; ++b) m.at(a, b) = 1;
    return m;
  }

  const int q0 = n;
  for (int a = q0; a < q0 + query_len; ++a)
    for (int b = q0; b < q0 + query_len; ++b) m.at(a, b) = 1;

  if (fusion == Fusion::Cross) {
    // Graph rows additionally see every query column; query rows see all.
    for (int i = 0; i < n; ++i)
      for (int b = q0; b < q0 + query_len; ++b) m.at(i, b) = 1;
    for (int a = q0; a < q0 + query_len; ++a)
      for (int i = 0; i < n; ++i) m.at(a, i) = 1;
  }
  return m;
}

std::vector<double> sinusoidal_positions(int length, int dim) {
  std::vector<double> out(static_cast<size_t>(length) * dim);
  for (int t = 0; t < length; ++t)
    for (int i = 0; i < dim; ++i) {
      const double rate = std::pow(10000.0, double(2 * (i / 2)) / dim);
      out[static_cast<size_t>(t) * dim + i] =
          i % 2 == 0 ? std::sin(t / rate) : std::cos(t / rate);
    }
  return out;
}

std::vector<std::pair<int, int>> lower_triangle_cells(int n) {
  std::vector<std::pair<int, int>> cells;
  for (int i = 1; i < n; ++i)
    for (int j = 0; j < i; ++j) cells.push_back({i, j});
  return cells;
}

}  // namespace gmod
