#pragma once

#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "gmod/datagen.hpp"
#include "gmod/errors.hpp"
#include "gmod/graph.hpp"
#include "gmod/training.hpp"

namespace gmod {

// Micro-averaged counts; precision/recall use the 0/0 -> 0 convention.
struct PrfParts {
  size_t tp = 0, fp = 0, fn = 0;

  PrfParts& operator+=(const PrfParts& o) {
    tp += o.tp;
    fp += o.fp;
    fn += o.fn;
    return *this;
  }
};

struct Prf {
  double precision = 0, recall = 0, f1 = 0;
};

Prf prf_from(const PrfParts& parts);

// Node score: multiset overlap of node labels.
PrfParts node_parts(const SceneGraph& pred, const SceneGraph& gold);
// Edge score: multiset overlap of (source label, edge label, target label)
// triplets, so node identity is by label, and direction matters.
PrfParts edge_parts(const SceneGraph& pred, const SceneGraph& gold);

// Op-count bucket used in per-difficulty breakdowns.
std::string bin_name(int op_count);  // "1-2", "3-4", "5+"

struct SplitMetrics {
  size_t count = 0;
  Prf node, edge;
  // Fraction of predictions isomorphic to the gold target. Absent for the
  // copy-source baseline.
  std::optional<double> graph_accuracy;
};

struct MetricsReport {
  SplitMetrics overall;
  std::vector<std::pair<std::string, SplitMetrics>> bins;  // fixed order
};

std::string report_to_json(const MetricsReport& report);

// Scores aligned (prediction, gold) pairs; a disengaged prediction counts
// every gold node and edge as missed. Empty input yields an all-zero report.
MetricsReport score_predictions(
    const std::vector<std::optional<SceneGraph>>& preds,
    const std::vector<ModificationInstance>& gold, bool with_graph_accuracy,
    bool with_bins);

// Baseline that predicts the unmodified source graph.
MetricsReport copy_source(const std::vector<ModificationInstance>& data,
                          bool with_bins = true);

inline void require_vocab_match(const Vocabulary& expected,
                                const Vocabulary& got, const std::string& what) {
  if (expected.hash() != got.hash())
    throw VocabMismatchError(what + " does not match the checkpoint vocabulary");
}

// Greedy predictions for every instance; decode failures turn into
// disengaged predictions rather than aborting the run.
template <class Scalar>
std::vector<std::optional<SceneGraph>> predict_all(
    const std::vector<ModificationInstance>& data,
    const ModelParams<Scalar>& params, const Vocabulary& tokens,
    const Vocabulary& edges, int jobs = 1) {
  std::vector<std::optional<SceneGraph>> preds(data.size());
  auto run = [&](size_t begin, size_t step) {
    for (size_t i = begin; i < data.size(); i += step) {
      try {
        preds[i] = generate(data[i].source, tokens.encode(data[i].query),
                            params, tokens, edges);
      } catch (const DecodeOverflowError&) {
        preds[i] = std::nullopt;
      }
    }
  };
  if (jobs <= 1) {
    run(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < jobs; ++w)
      pool.emplace_back(run, static_cast<size_t>(w), static_cast<size_t>(jobs));
    for (auto& t : pool) t.join();
  }
  return preds;
}

template <class Scalar>
MetricsReport evaluate(const Checkpoint<Scalar>& ckpt,
                       const std::vector<ModificationInstance>& data,
                       bool with_bins = true, int jobs = 1) {
  const auto preds =
      predict_all(data, ckpt.params, ckpt.tokens, ckpt.edges, jobs);
  return score_predictions(preds, data, /*with_graph_accuracy=*/true, with_bins);
}

}  // namespace gmod
