#include "gmod/datagen.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <set>
#include <thread>

#include "gmod/errors.hpp"

namespace gmod {

namespace {

std::vector<AttachEdge> incident_attachments(const SceneGraph& g, int id) {
  std::vector<AttachEdge> out;
  for (const Edge& e : g.edges()) {
    if (e.src == id) out.push_back({g.label(e.dst), e.label, true});
    else if (e.dst == id) out.push_back({g.label(e.src), e.label, false});
  }
  return out;
}

}  // namespace

ModificationInstance gen_delete(const SceneGraph& g, const TemplateSet& templates,
                                Rng& rng) {
  if (g.node_count() < 2) throw TooSmallError("delete needs >= 2 nodes");
  const int chosen = static_cast<int>(rng.below(g.node_count()));
  const Template& t = rng.pick(templates.of(EditKind::Delete));

  ModificationInstance inst;
  inst.source = g;
  EditOp op{EditKind::Delete, g.label(chosen), std::nullopt, {}};
  inst.target = apply_edit(g, op, chosen);
  inst.query = templates.render(t, g.label(chosen));
  inst.ops.push_back(std::move(op));
  return inst;
}

ModificationInstance gen_insert(const SceneGraph& g, const TemplateSet& templates,
                                Rng& rng) {
  if (g.node_count() < 2) throw TooSmallError("insert needs >= 2 nodes");
  const int chosen = static_cast<int>(rng.below(g.node_count()));
  const Template& t = rng.pick(templates.of(EditKind::Insert));

  ModificationInstance inst;
  inst.target = g;
  EditOp del{EditKind::Delete, g.label(chosen), std::nullopt, {}};
  inst.source = apply_edit(g, del, chosen);
  inst.query = templates.render(t, g.label(chosen));
  inst.ops.push_back(
      EditOp{EditKind::Insert, g.label(chosen), std::nullopt,
             incident_attachments(g, chosen)});
  return inst;
}

ModificationInstance gen_substitute(const SceneGraph& g, const SimilarityTable& sim,
                                    const TemplateSet& templates, Rng& rng) {
  if (g.node_count() < 1) throw TooSmallError("substitute needs >= 1 node");
  std::vector<int> order(g.node_count());
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order);

  for (int chosen : order) {
    if (!sim.has(g.label(chosen))) continue;
    const std::vector<std::string>& cands = sim.candidates(g.label(chosen));
    const std::string& replacement = rng.pick(cands);
    const Template& t = rng.pick(templates.of(EditKind::Substitute));

    ModificationInstance inst;
    inst.source = g;
    EditOp op{EditKind::Substitute, g.label(chosen), replacement, {}};
    inst.target = apply_edit(g, op, chosen);
    inst.query = templates.render(t, g.label(chosen), replacement);
    inst.ops.push_back(std::move(op));
    return inst;
  }
  throw NoSimilarLabelError("no node has similarity candidates");
}

namespace {

// Multi-op generation state: both graphs carry a persistent uid per node so
// already-modified content is never edited twice. Unmodified uids are always
// present in both the evolving source and target.
struct TrackedGraph {
  SceneGraph g;
  std::vector<int> uids;  // position -> uid

  int position_of(int uid) const {
    for (size_t i = 0; i < uids.size(); ++i)
      if (uids[i] == uid) return static_cast<int>(i);
    return -1;
  }

  void remove(int uid) {
    const int pos = position_of(uid);
    g = apply_edit(g, EditOp{EditKind::Delete, g.label(pos), std::nullopt, {}}, pos);
    uids.erase(uids.begin() + pos);
  }

  void relabel(int uid, const std::string& label) {
    const int pos = position_of(uid);
    g = apply_edit(g, EditOp{EditKind::Substitute, g.label(pos), label, {}}, pos);
  }
};

}  // namespace

ModificationInstance gen_multi(const SceneGraph& g, const GenConfig& cfg,
                               const TemplateSet& templates,
                               const SimilarityTable& sim, Rng& rng) {
  if (g.node_count() < 2) throw TooSmallError("multi-op needs >= 2 nodes");
  if (cfg.terminate_weight <= 0 || cfg.tau <= 0)
    throw ConfigError("terminate weight and tau must be positive");

  TrackedGraph source{g, {}}, target{g, {}};
  source.uids.resize(g.node_count());
  std::iota(source.uids.begin(), source.uids.end(), 0);
  target.uids = source.uids;

  std::set<int> modified;
  std::vector<std::string> queries;
  std::vector<EditOp> ops;

  auto unmodified = [&]() {
    std::vector<int> out;
    for (int uid : target.uids)
      if (!modified.count(uid)) out.push_back(uid);
    return out;
  };

  auto do_insert = [&](int uid) {
    // Insertion is inverse deletion: the node disappears from the source
    // and survives in the target.
    const int pos = source.position_of(uid);
    const std::string label = source.g.label(pos);
    ops.push_back(EditOp{EditKind::Insert, label, std::nullopt,
                         incident_attachments(source.g, pos)});
    source.remove(uid);
    modified.insert(uid);
    queries.push_back(
        templates.render(rng.pick(templates.of(EditKind::Insert)), label));
  };
  auto do_delete = [&](int uid) {
    const std::string label = target.g.label(target.position_of(uid));
    ops.push_back(EditOp{EditKind::Delete, label, std::nullopt, {}});
    target.remove(uid);
    modified.insert(uid);
    queries.push_back(
        templates.render(rng.pick(templates.of(EditKind::Delete)), label));
  };
  auto do_substitute = [&](int uid) {
    const std::string old_label = target.g.label(target.position_of(uid));
    const std::string replacement = rng.pick(sim.candidates(old_label));
    ops.push_back(EditOp{EditKind::Substitute, old_label, replacement, {}});
    target.relabel(uid, replacement);
    modified.insert(uid);
    queries.push_back(templates.render(
        rng.pick(templates.of(EditKind::Substitute)), old_label, replacement));
  };

  // First operation: uniform over {ins, del, sub}.
  for (int attempt = 0;; ++attempt) {
    const uint64_t a = rng.below(3);
    std::vector<int> avail = unmodified();
    if (a == 0 && source.g.node_count() >= 2) {
      do_insert(avail[rng.below(avail.size())]);
      break;
    }
    if (a == 1 && target.g.node_count() >= 2) {
      do_delete(avail[rng.below(avail.size())]);
      break;
    }
    if (a == 2) {
      std::vector<int> eligible;
      for (int uid : avail)
        if (sim.has(target.g.label(target.position_of(uid)))) eligible.push_back(uid);
      if (!eligible.empty()) {
        do_substitute(eligible[rng.below(eligible.size())]);
        break;
      }
    }
    if (attempt >= 16) throw NoSimilarLabelError("no feasible first operation");
  }

  // Follow-up operations. Weights {P,1,1,1} for {terminate, ins, del, sub}
  // are raised to (total - avail) / (total * tau), then softmaxed, so the
  // terminate mass grows as modified nodes accumulate in the target.
  for (int spin = 0; spin < 256; ++spin) {
    const int total = target.g.node_count();
    std::vector<int> avail = unmodified();
    if (avail.empty()) break;

    const double exponent =
        static_cast<double>(total - static_cast<int>(avail.size())) /
        (static_cast<double>(total) * cfg.tau);
    const double wt = std::pow(cfg.terminate_weight, exponent);
    const double we = std::exp(wt), wo = std::exp(1.0);
    const double z = we + 3.0 * wo;
    const double r = rng.real01() * z;

    int action;  // 0 terminate, 1 ins, 2 del, 3 sub
    if (r < we) action = 0;
    else if (r < we + wo) action = 1;
    else if (r < we + 2 * wo) action = 2;
    else action = 3;

    if (action == 0) break;
    if (action == 1 && source.g.node_count() >= 2) {
      do_insert(avail[rng.below(avail.size())]);
    } else if (action == 2 && target.g.node_count() >= 2) {
      do_delete(avail[rng.below(avail.size())]);
    } else if (action == 3) {
      std::vector<int> eligible;
      for (int uid : avail)
        if (sim.has(target.g.label(target.position_of(uid)))) eligible.push_back(uid);
      if (eligible.empty()) continue;  // resample the action
      do_substitute(eligible[rng.below(eligible.size())]);
    }
  }

  ModificationInstance inst;
  inst.source = std::move(source.g);
  inst.target = std::move(target.g);
  inst.ops = std::move(ops);
  std::string q;
  for (size_t i = 0; i < queries.size(); ++i) {
    if (i) q += " ; ";
    q += queries[i];
  }
  inst.query = std::move(q);
  return inst;
}

bool filter(const ModificationInstance& inst, int max_nodes) {
  if (inst.query.empty()) return false;
  for (const SceneGraph* g : {&inst.source, &inst.target}) {
    if (g->node_count() < 1 || g->node_count() > max_nodes) return false;
    if (!weakly_connected(*g)) return false;
  }
  return true;
}

namespace {

// Accepted instance for one base graph, or nullopt after bounded retries.
// Pure function of (seed, index, graph): parallel runs reproduce serial ones.
std::optional<ModificationInstance> instance_for_graph(
    const SceneGraph& g, uint64_t seed, uint64_t index, const GenConfig& cfg,
    const TemplateSet& templates, const SimilarityTable& sim, bool multi_op) {
  Rng rng = Rng::substream(seed, index);
  for (int attempt = 0; attempt < 24; ++attempt) {
    try {
      ModificationInstance inst;
      if (multi_op) {
        inst = gen_multi(g, cfg, templates, sim, rng);
      } else {
        const uint64_t a = rng.below(3);
        if (a == 0) inst = gen_insert(g, templates, rng);
        else if (a == 1) inst = gen_delete(g, templates, rng);
        else inst = gen_substitute(g, sim, templates, rng);
      }
      if (filter(inst, cfg.max_nodes)) return inst;
    } catch (const TooSmallError&) {
      return std::nullopt;
    } catch (const NoSimilarLabelError&) {
      // fall through to retry with another op draw
    }
  }
  return std::nullopt;
}

}  // namespace

DatasetSplits generate_dataset(const std::vector<SceneGraph>& graphs,
                               const GenConfig& cfg, const TemplateSet& templates,
                               const SimilarityTable& sim, const SplitSizes& sizes,
                               bool multi_op, int jobs) {
  const size_t needed =
      static_cast<size_t>(sizes.train) + sizes.dev + sizes.test;
  if (graphs.empty()) throw InsufficientGraphsError("no base graphs");

  std::vector<size_t> order(graphs.size());
  std::iota(order.begin(), order.end(), 0);
  Rng shuffle_rng = Rng::substream(cfg.seed, 0x59117ca7eull);
  shuffle_rng.shuffle(order);

  std::vector<std::optional<ModificationInstance>> results(graphs.size());
  if (jobs <= 1) {
    size_t accepted = 0;
    for (size_t pos = 0; pos < order.size() && accepted < needed; ++pos) {
      const size_t idx = order[pos];
      results[idx] = instance_for_graph(graphs[idx], cfg.seed, idx, cfg,
                                        templates, sim, multi_op);
      if (results[idx]) accepted++;
    }
  } else {
    std::vector<std::thread> workers;
    std::atomic<size_t> next{0};
    for (int w = 0; w < jobs; ++w) {
      workers.emplace_back([&]() {
        for (;;) {
          const size_t idx = next.fetch_add(1);
          if (idx >= graphs.size()) return;
          results[idx] = instance_for_graph(graphs[idx], cfg.seed, idx, cfg,
                                            templates, sim, multi_op);
        }
      });
    }
    for (auto& t : workers) t.join();
  }

  DatasetSplits splits;
  for (size_t pos = 0; pos < order.size(); ++pos) {
    auto& slot = results[order[pos]];
    if (!slot) continue;
    if (splits.train.size() < static_cast<size_t>(sizes.train))
      splits.train.push_back(std::move(*slot));
    else if (splits.dev.size() < static_cast<size_t>(sizes.dev))
      splits.dev.push_back(std::move(*slot));
    else if (splits.test.size() < static_cast<size_t>(sizes.test))
      splits.test.push_back(std::move(*slot));
    else
      break;
  }
  if (splits.train.size() < static_cast<size_t>(sizes.train) ||
      splits.dev.size() < static_cast<size_t>(sizes.dev) ||
      splits.test.size() < static_cast<size_t>(sizes.test))
    throw InsufficientGraphsError("base graph pool exhausted before splits filled");
  return splits;
}

double mean_ops(const std::vector<SceneGraph>& graphs, const GenConfig& cfg,
                const TemplateSet& templates, const SimilarityTable& sim,
                int samples) {
  if (graphs.empty()) throw InsufficientGraphsError("no base graphs");
  size_t total_ops = 0, produced = 0;
  for (int i = 0; produced < static_cast<size_t>(samples); ++i) {
    const SceneGraph& g = graphs[i % graphs.size()];
    Rng rng = Rng::substream(cfg.seed, 0xca11b000 + i);
    try {
      ModificationInstance inst = gen_multi(g, cfg, templates, sim, rng);
      total_ops += inst.ops.size();
      produced++;
    } catch (const TooSmallError&) {
    } catch (const NoSimilarLabelError&) {
    }
    if (i > samples * 4) break;
  }
  if (produced == 0) throw InsufficientGraphsError("no multi-op samples produced");
  return static_cast<double>(total_ops) / static_cast<double>(produced);
}

double calibrate_terminate_weight(double target_mean,
                                  const std::vector<SceneGraph>& graphs,
                                  const TemplateSet& templates,
                                  const SimilarityTable& sim, double tau,
                                  uint64_t seed, int samples) {
  GenConfig cfg;
  cfg.tau = tau;
  cfg.seed = seed;
  auto mean_at = [&](double p) {
    cfg.terminate_weight = p;
    return mean_ops(graphs, cfg, templates, sim, samples);
  };

  double lo = 1e-3, hi = 1.0;  // mean ops decreases in P
  while (mean_at(hi) > target_mean && hi < 1e4) hi *= 2;
  if (mean_at(lo) < target_mean)
    throw ConfigError("target mean ops out of reach even at minimal P");
  for (int iter = 0; iter < 40; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (mean_at(mid) > target_mean) lo = mid;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}

std::vector<MixedBatch> mixed_batches(size_t synthetic_size, size_t user_size,
                                      int batch_size, Rng& rng) {
  if (synthetic_size == 0 || user_size == 0)
    throw EmptySetError("mixed batches need nonempty synthetic and user sets");
  const size_t syn_per_batch = (batch_size + 1) / 2;
  const size_t usr_per_batch = batch_size / 2;

  std::vector<size_t> syn(synthetic_size);
  std::iota(syn.begin(), syn.end(), 0);
  rng.shuffle(syn);

  std::vector<MixedBatch> out;
  for (size_t at = 0; at < syn.size(); at += syn_per_batch) {
    MixedBatch b;
    for (size_t i = at; i < std::min(at + syn_per_batch, syn.size()); ++i)
      b.items.push_back({false, syn[i]});
    for (size_t i = 0; i < usr_per_batch; ++i)
      b.items.push_back({true, rng.below(user_size)});
    out.push_back(std::move(b));
  }
  return out;
}

}  // namespace gmod
