#include "gmod/training.hpp"

#include <algorithm>
#include <limits>
#include <map>

namespace gmod {

// Kahn's algorithm. Among ready nodes, prefer the label that appears
// earliest in the source graph's node list (new labels last), then the
// lexicographically smaller label, then the smaller id. This pins one
// decoding order per (target, source) pair so teacher forcing and the
// gold edge cells are reproducible.
std::vector<int> target_node_order(const SceneGraph& target,
                                   const SceneGraph& source) {
  const int n = target.node_count();
  std::map<std::string, int> first_seen;
  for (int i = 0; i < source.node_count(); ++i)
    first_seen.emplace(source.label(i), i);

  std::vector<int> indegree(n, 0);
  for (const Edge& e : target.edges()) indegree[e.dst]++;

  auto rank = [&](int id) {
    const std::string& label = target.label(id);
    auto it = first_seen.find(label);
    const int seen =
        it == first_seen.end() ? std::numeric_limits<int>::max() : it->second;
    return std::make_tuple(seen, label, id);
  };

  std::vector<int> order;
  std::vector<bool> emitted(n, false);
  for (int step = 0; step < n; ++step) {
    int best = -1;
    for (int id = 0; id < n; ++id) {
      if (emitted[id] || indegree[id] != 0) continue;
      if (best < 0 || rank(id) < rank(best)) best = id;
    }
    if (best < 0) throw CycleError("target graph is not a DAG");
    emitted[best] = true;
    order.push_back(best);
    for (const Edge& e : target.edges())
      if (e.src == best) indegree[e.dst]--;
  }
  return order;
}

PreparedInstance prepare_instance(const ModificationInstance& inst,
                                  const Vocabulary& tokens,
                                  const Vocabulary& edges) {
  PreparedInstance out;
  out.source = inst.source;
  out.target = inst.target;
  out.query_ids = tokens.encode(inst.query);
  out.op_count = std::max<int>(1, static_cast<int>(inst.ops.size()));

  const std::vector<int> order = target_node_order(inst.target, inst.source);
  for (int id : order) out.gold_node_ids.push_back(tokens.id(inst.target.label(id)));

  // position of each original node in the decoding order
  std::vector<int> pos(order.size());
  for (size_t k = 0; k < order.size(); ++k) pos[order[k]] = static_cast<int>(k);

  const auto cells = lower_triangle_cells(static_cast<int>(order.size()));
  out.gold_cell_ids.assign(cells.size(), kNullEdgeId);
  std::map<std::pair<int, int>, size_t> cell_index;
  for (size_t c = 0; c < cells.size(); ++c) cell_index[cells[c]] = c;
  for (const Edge& e : inst.target.edges()) {
    const int i = pos[e.dst], j = pos[e.src];  // cell (i, j) holds edge j -> i
    auto it = cell_index.find({i, j});
    if (it == cell_index.end())
      throw CycleError("edge against the topological decoding order");
    out.gold_cell_ids[it->second] = edges.id(e.label);
  }
  return out;
}

std::pair<Vocabulary, Vocabulary> build_vocabs(
    const std::vector<ModificationInstance>& data) {
  std::vector<std::string> token_corpus, edge_corpus;
  for (const ModificationInstance& inst : data) {
    for (const SceneGraph* g : {&inst.source, &inst.target}) {
      for (const std::string& label : g->nodes()) token_corpus.push_back(label);
      for (const Edge& e : g->edges()) edge_corpus.push_back(e.label);
    }
    for (const std::string& word : Vocabulary::tokenize(inst.query))
      token_corpus.push_back(word);
  }
  return {Vocabulary::build(token_corpus, 1, false),
          Vocabulary::build(edge_corpus, 1, true)};
}

}  // namespace gmod
