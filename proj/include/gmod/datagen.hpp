#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "gmod/graph.hpp"
#include "gmod/rng.hpp"

namespace gmod {

// Query pattern with `xx` (edited node) and, for substitutions, `yy`
// (replacement) placeholders.
struct Template {
  EditKind kind = EditKind::Delete;
  std::string pattern;
};

class TemplateSet {
 public:
  TemplateSet() = default;
  explicit TemplateSet(std::vector<Template> templates);

  // Ten templates per operation.
  static TemplateSet builtin();
  // One per line, "del:remove xx" / "ins:I want xx" / "sub:change xx to yy".
  static TemplateSet load(const std::string& path);
  void save(const std::string& path) const;

  const std::vector<Template>& of(EditKind kind) const;
  std::string render(const Template& t, const std::string& xx,
                     const std::string& yy = "") const;

 private:
  std::vector<Template> insert_, delete_, substitute_;
};

// label -> ranked similar labels; a label never lists itself.
class SimilarityTable {
 public:
  SimilarityTable() = default;
  explicit SimilarityTable(std::map<std::string, std::vector<std::string>> table);

  // "label: alt1, alt2, ..." per line; '#' comments.
  static SimilarityTable load(const std::string& path);
  void save(const std::string& path) const;

  bool has(const std::string& label) const;
  const std::vector<std::string>& candidates(const std::string& label) const;
  size_t size() const { return table_.size(); }

 private:
  std::map<std::string, std::vector<std::string>> table_;
};

// One dataset record: modify `source` per `query` to obtain `target`.
struct ModificationInstance {
  SceneGraph source;
  std::string query;
  SceneGraph target;
  std::vector<EditOp> ops;
};

struct GenConfig {
  double terminate_weight = 1.0;  // P of the multi-op sampler
  double tau = 1.0;               // sampler temperature
  int max_nodes = 5;
  uint64_t seed = 0;
};

// Single-operation instance builders. All require >= 2 source nodes.
ModificationInstance gen_delete(const SceneGraph& g, const TemplateSet& templates,
                                Rng& rng);
ModificationInstance gen_insert(const SceneGraph& g, const TemplateSet& templates,
                                Rng& rng);
ModificationInstance gen_substitute(const SceneGraph& g, const SimilarityTable& sim,
                                    const TemplateSet& templates, Rng& rng);

// Multi-operation instance: first op uniform over {ins, del, sub}, then a
// terminate/ins/del/sub loop whose weights {P,1,1,1} are annealed by the
// fraction of already-modified nodes. Modified nodes are never re-edited;
// per-op queries are joined with " ; ".
ModificationInstance gen_multi(const SceneGraph& g, const GenConfig& cfg,
                               const TemplateSet& templates,
                               const SimilarityTable& sim, Rng& rng);

// Admission rule applied to every emitted instance.
bool filter(const ModificationInstance& inst, int max_nodes = 5);

struct DatasetSplits {
  std::vector<ModificationInstance> train, dev, test;
};

struct SplitSizes {
  int train = 0, dev = 0, test = 0;
};

// Builds accepted instances from a pool of base graphs. Splits are disjoint
// by source graph; rejected instances are resampled. One instance per base
// graph, processed in a seed-shuffled order; per-graph randomness comes from
// Rng::substream(seed, graph index) so --jobs settings cannot change output.
DatasetSplits generate_dataset(const std::vector<SceneGraph>& graphs,
                               const GenConfig& cfg, const TemplateSet& templates,
                               const SimilarityTable& sim, const SplitSizes& sizes,
                               bool multi_op, int jobs = 1);

// Finds P such that gen_multi's mean op count over `samples` draws hits
// `target_mean`. Bisection; mean ops is monotone nonincreasing in P.
double calibrate_terminate_weight(double target_mean,
                                  const std::vector<SceneGraph>& graphs,
                                  const TemplateSet& templates,
                                  const SimilarityTable& sim, double tau,
                                  uint64_t seed, int samples = 10000);

double mean_ops(const std::vector<SceneGraph>& graphs, const GenConfig& cfg,
                const TemplateSet& templates, const SimilarityTable& sim,
                int samples);

// ceil(b/2) synthetic + floor(b/2) user instances per batch; the user set is
// up-sampled with replacement. One epoch walks the shuffled synthetic set
// once. Batches are index pairs (is_user, index).
struct MixedBatch {
  std::vector<std::pair<bool, size_t>> items;  // (from_user_set, index)
};
std::vector<MixedBatch> mixed_batches(size_t synthetic_size, size_t user_size,
                                      int batch_size, Rng& rng);

// Label inventory and sampler for desk-scale base corpora. Graphs are small
// connected DAGs over object/attribute/relation labels with edges directed
// from earlier to later node id; node-count mix targets a mean of ~2.9 nodes
// once single-op editing is applied.
std::vector<SceneGraph> sample_base_graphs(int count, uint64_t seed);

// Built-in curated similarity resource (~200 object/attribute labels grouped
// into semantic clusters).
SimilarityTable builtin_similarity();

}  // namespace gmod
