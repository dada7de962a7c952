#include "gmod/dataset_io.hpp"

#include <fstream>

#include "gmod/errors.hpp"
#include "json.hpp"

namespace gmod {

namespace {

using nlohmann::json;

json graph_node(const SceneGraph& g) {
  json j;
  j["nodes"] = g.nodes();
  json edges = json::array();
  for (const Edge& e : g.edges()) edges.push_back(json{e.src, e.dst, e.label});
  j["edges"] = std::move(edges);
  return j;
}

SceneGraph graph_from(const json& j) {
  if (!j.is_object() || !j.contains("nodes") || !j.contains("edges"))
    throw IoError("graph record must have nodes and edges");
  std::vector<std::string> nodes = j["nodes"].get<std::vector<std::string>>();
  std::vector<Edge> edges;
  for (const json& t : j["edges"]) {
    if (!t.is_array() || t.size() != 3)
      throw IoError("edge must be [src, dst, label]");
    edges.push_back({t[0].get<int>(), t[1].get<int>(), t[2].get<std::string>()});
  }
  return SceneGraph(std::move(nodes), std::move(edges));
}

json parse_line(const std::string& line, size_t lineno) {
  json j = json::parse(line, nullptr, false);
  if (j.is_discarded())
    throw IoError("bad JSON on line " + std::to_string(lineno));
  return j;
}

template <class Fn>
void for_each_line(const std::string& path, Fn&& fn) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    lineno++;
    if (line.empty()) continue;
    fn(line, lineno);
  }
}

}  // namespace

std::string graph_to_json(const SceneGraph& g) { return graph_node(g).dump(); }

SceneGraph graph_from_json(const std::string& line) {
  return graph_from(parse_line(line, 1));
}

std::string instance_to_json(const ModificationInstance& inst) {
  json j;
  j["source"] = graph_node(inst.source);
  j["target"] = graph_node(inst.target);
  j["query"] = inst.query;
  json ops = json::array();
  for (const EditOp& op : inst.ops) ops.push_back(edit_kind_name(op.kind));
  j["ops"] = std::move(ops);
  return j.dump();
}

ModificationInstance instance_from_json(const std::string& line) {
  const json j = parse_line(line, 1);
  if (!j.is_object() || !j.contains("source") || !j.contains("target") ||
      !j.contains("query") || !j.contains("ops"))
    throw IoError("instance record must have source, target, query, ops");
  ModificationInstance inst;
  inst.source = graph_from(j["source"]);
  inst.target = graph_from(j["target"]);
  inst.query = j["query"].get<std::string>();
  for (const json& k : j["ops"])
    inst.ops.push_back(
        EditOp{edit_kind_from_name(k.get<std::string>()), "", std::nullopt, {}});
  return inst;
}

void save_instances(const std::vector<ModificationInstance>& insts,
                    const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  for (const ModificationInstance& inst : insts)
    out << instance_to_json(inst) << '\n';
  if (!out) throw IoError("write failed for " + path);
}

std::vector<ModificationInstance> load_instances(const std::string& path) {
  std::vector<ModificationInstance> out;
  for_each_line(path, [&](const std::string& line, size_t lineno) {
    try {
      out.push_back(instance_from_json(line));
    } catch (const Error& e) {
      throw IoError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  });
  return out;
}

void save_graphs(const std::vector<SceneGraph>& graphs, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  for (const SceneGraph& g : graphs) out << graph_to_json(g) << '\n';
  if (!out) throw IoError("write failed for " + path);
}

std::vector<SceneGraph> load_graphs(const std::string& path) {
  std::vector<SceneGraph> out;
  for_each_line(path, [&](const std::string& line, size_t lineno) {
    try {
      out.push_back(graph_from_json(line));
    } catch (const Error& e) {
      throw IoError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  });
  return out;
}

}  // namespace gmod
