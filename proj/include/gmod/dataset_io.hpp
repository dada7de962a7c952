#pragma once

#include <string>
#include <vector>

#include "gmod/datagen.hpp"
#include "gmod/graph.hpp"

namespace gmod {

// JSON Lines serialization. One record per line, keys in sorted order so a
// fixed seed always produces byte-identical files.
std::string graph_to_json(const SceneGraph& g);
SceneGraph graph_from_json(const std::string& line);

std::string instance_to_json(const ModificationInstance& inst);
// Records carry op kinds only, so loaded ops have empty label fields.
ModificationInstance instance_from_json(const std::string& line);

void save_instances(const std::vector<ModificationInstance>& insts,
                    const std::string& path);
std::vector<ModificationInstance> load_instances(const std::string& path);

void save_graphs(const std::vector<SceneGraph>& graphs, const std::string& path);
std::vector<SceneGraph> load_graphs(const std::string& path);

}  // namespace gmod
