#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gmod/errors.hpp"

namespace gmod {

struct Edge {
  int src = 0;
  int dst = 0;
  std::string label;

  friend bool operator==(const Edge& a, const Edge& b) = default;
  friend auto operator<=>(const Edge& a, const Edge& b) = default;
};

// Directed labeled scene graph. Node ids are dense 0-based positions in the
// node list; deletion reindexes. Value type, immutable in practice: edits
// return new graphs.
class SceneGraph {
 public:
  SceneGraph() = default;
  SceneGraph(std::vector<std::string> nodes, std::vector<Edge> edges);

  const std::vector<std::string>& nodes() const { return nodes_; }
  const std::vector<Edge>& edges() const { return edges_; }
  int node_count() const { return static_cast<int>(nodes_.size()); }
  const std::string& label(int id) const { return nodes_[id]; }

  bool has_edge(int src, int dst) const;

  // Incident neighbor ids, both directions, without duplicates.
  std::vector<int> neighbors(int id) const;
  // Labels of all edges incident to `id` (inbound and outbound), with
  // multiplicity.
  std::vector<std::string> incident_edge_labels(int id) const;

  friend bool operator==(const SceneGraph& a, const SceneGraph& b) = default;

 private:
  std::vector<std::string> nodes_;
  std::vector<Edge> edges_;  // sorted by (src, dst)
};

enum class EditKind { Insert, Delete, Substitute };

const char* edit_kind_name(EditKind k);
EditKind edit_kind_from_name(const std::string& name);

struct AttachEdge {
  std::string neighbor_label;
  std::string edge_label;
  bool outgoing = true;  // true: new node -> neighbor
};

struct EditOp {
  EditKind kind = EditKind::Delete;
  std::string node_label;
  std::optional<std::string> replacement_label;  // Substitute only
  std::vector<AttachEdge> attach_edges;          // Insert only
};

// Kahn's algorithm; ties broken by ascending node id. Throws CycleError.
std::vector<int> topological_order(const SceneGraph& g);

// One component in the undirected projection. Throws EmptyGraphError.
bool weakly_connected(const SceneGraph& g);

// Label-preserving isomorphism by backtracking. Graphs above `node_cap`
// nodes are rejected with SizeLimitError.
bool isomorphic(const SceneGraph& g1, const SceneGraph& g2, int node_cap = 12);

// Applies one edit. `chosen` names the edited node id for Delete and
// Substitute; Insert appends a node and ignores it.
SceneGraph apply_edit(const SceneGraph& g, const EditOp& op, int chosen);

}  // namespace gmod
