#include "gmod/graph.hpp"

#include <algorithm>
#include <numeric>

namespace gmod {

SceneGraph::SceneGraph(std::vector<std::string> nodes, std::vector<Edge> edges)
    : nodes_(std::move(nodes)), edges_(std::move(edges)) {
  const int n = node_count();
  for (const Edge& e : edges_) {
    if (e.src < 0 || e.src >= n || e.dst < 0 || e.dst >= n)
      throw GraphError("edge endpoint out of range");
    if (e.src == e.dst) throw GraphError("self-loop not allowed");
  }
  std::sort(edges_.begin(), edges_.end());
  for (size_t i = 1; i < edges_.size(); ++i) {
    if (edges_[i].src == edges_[i - 1].src && edges_[i].dst == edges_[i - 1].dst)
      throw DuplicateEdgeError("duplicate edge between node pair");
  }
}

bool SceneGraph::has_edge(int src, int dst) const {
  for (const Edge& e : edges_) {
    if (e.src == src && e.dst == dst) return true;
  }
  return false;
}

std::vector<int> SceneGraph::neighbors(int id) const {
  std::vector<int> out;
  for (const Edge& e : edges_) {
    if (e.src == id) out.push_back(e.dst);
    if (e.dst == id) out.push_back(e.src);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<std::string> SceneGraph::incident_edge_labels(int id) const {
  std::vector<std::string> out;
  for (const Edge& e : edges_) {
    if (e.src == id || e.dst == id) out.push_back(e.label);
  }
  return out;
}

const char* edit_kind_name(EditKind k) {
  switch (k) {
    case EditKind::Insert: return "insert";
    case EditKind::Delete: return "delete";
    case EditKind::Substitute: return "substitute";
  }
  return "?";
}

EditKind edit_kind_from_name(const std::string& name) {
  if (name == "insert") return EditKind::Insert;
  if (name == "delete") return EditKind::Delete;
  if (name == "substitute") return EditKind::Substitute;
  throw ConfigError("unknown edit kind: " + name);
}

std::vector<int> topological_order(const SceneGraph& g) {
  const int n = g.node_count();
  std::vector<int> indegree(n, 0);
  for (const Edge& e : g.edges()) indegree[e.dst]++;

  std::vector<int> order;
  order.reserve(n);
  std::vector<bool> placed(n, false);
  for (int step = 0; step < n; ++step) {
    int next = -1;
    for (int i = 0; i < n; ++i) {
      if (!placed[i] && indegree[i] == 0) {
        next = i;
        break;
      }
    }
    if (next < 0) throw CycleError("graph has a directed cycle");
    placed[next] = true;
    order.push_back(next);
    for (const Edge& e : g.edges())
      if (e.src == next) indegree[e.dst]--;
  }
  return order;
}

bool weakly_connected(const SceneGraph& g) {
  const int n = g.node_count();
  if (n == 0) throw EmptyGraphError("connectivity undefined for empty graph");
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  int components = n;
  for (const Edge& e : g.edges()) {
    int a = find(e.src), b = find(e.dst);
    if (a != b) {
      parent[a] = b;
      components--;
    }
  }
  return components == 1;
}

namespace {

bool extend_mapping(const SceneGraph& g1, const SceneGraph& g2,
                    std::vector<int>& map, std::vector<bool>& used, int next) {
  const int n = g1.node_count();
  if (next == n) return true;
  for (int cand = 0; cand < n; ++cand) {
    if (used[cand] || g1.label(next) != g2.label(cand)) continue;
    bool ok = true;
    // Check all edges between already-mapped nodes and `next`.
    for (int prev = 0; prev < next && ok; ++prev) {
      if (g1.has_edge(prev, next) != g2.has_edge(map[prev], cand)) ok = false;
      if (g1.has_edge(next, prev) != g2.has_edge(cand, map[prev])) ok = false;
      if (ok) {
        for (const Edge& e : g1.edges()) {
          if (e.src == prev && e.dst == next) {
            for (const Edge& f : g2.edges())
              if (f.src == map[prev] && f.dst == cand && f.label != e.label) ok = false;
          }
          if (e.src == next && e.dst == prev) {
            for (const Edge& f : g2.edges())
              if (f.src == cand && f.dst == map[prev] && f.label != e.label) ok = false;
          }
        }
      }
    }
    if (!ok) continue;
    map[next] = cand;
    used[cand] = true;
    if (extend_mapping(g1, g2, map, used, next + 1)) return true;
    used[cand] = false;
  }
  return false;
}

}  // namespace

bool isomorphic(const SceneGraph& g1, const SceneGraph& g2, int node_cap) {
  if (g1.node_count() > node_cap || g2.node_count() > node_cap)
    throw SizeLimitError("graph too large for isomorphism check");
  if (g1.node_count() != g2.node_count()) return false;
  if (g1.edges().size() != g2.edges().size()) return false;

  auto label_multiset = [](const SceneGraph& g) {
    std::vector<std::string> l = g.nodes();
    std::sort(l.begin(), l.end());
    return l;
  };
  if (label_multiset(g1) != label_multiset(g2)) return false;

  std::vector<int> map(g1.node_count(), -1);
  std::vector<bool> used(g1.node_count(), false);
  return extend_mapping(g1, g2, map, used, 0);
}

namespace {

SceneGraph delete_node(const SceneGraph& g, int id) {
  std::vector<std::string> nodes;
  nodes.reserve(g.node_count() - 1);
  for (int i = 0; i < g.node_count(); ++i)
    if (i != id) nodes.push_back(g.label(i));
  std::vector<Edge> edges;
  for (const Edge& e : g.edges()) {
    if (e.src == id || e.dst == id) continue;
    Edge m = e;
    if (m.src > id) m.src--;
    if (m.dst > id) m.dst--;
    edges.push_back(m);
  }
  return SceneGraph(std::move(nodes), std::move(edges));
}

int first_node_with_label(const SceneGraph& g, const std::string& label) {
  for (int i = 0; i < g.node_count(); ++i)
    if (g.label(i) == label) return i;
  throw NodeNotFoundError("no node labeled '" + label + "'");
}

}  // namespace

SceneGraph apply_edit(const SceneGraph& g, const EditOp& op, int chosen) {
  switch (op.kind) {
    case EditKind::Delete: {
      if (chosen < 0 || chosen >= g.node_count())
        throw NodeNotFoundError("delete: node id out of range");
      return delete_node(g, chosen);
    }
    case EditKind::Substitute: {
      if (chosen < 0 || chosen >= g.node_count())
        throw NodeNotFoundError("substitute: node id out of range");
      if (!op.replacement_label)
        throw GraphError("substitute requires a replacement label");
      std::vector<std::string> nodes = g.nodes();
      nodes[chosen] = *op.replacement_label;
      return SceneGraph(std::move(nodes), g.edges());
    }
    case EditKind::Insert: {
      std::vector<std::string> nodes = g.nodes();
      nodes.push_back(op.node_label);
      const int new_id = static_cast<int>(nodes.size()) - 1;
      std::vector<Edge> edges = g.edges();
      for (const AttachEdge& a : op.attach_edges) {
        int nb = first_node_with_label(g, a.neighbor_label);
        Edge e = a.outgoing ? Edge{new_id, nb, a.edge_label}
                            : Edge{nb, new_id, a.edge_label};
        edges.push_back(e);
      }
      return SceneGraph(std::move(nodes), std::move(edges));
    }
  }
  throw GraphError("unreachable");
}

}  // namespace gmod
