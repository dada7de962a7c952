#include "gmod/eval.hpp"

#include <json.hpp>
#include <map>
#include <tuple>

namespace gmod {

Prf prf_from(const PrfParts& parts) {
  Prf out;
  const double p_den = static_cast<double>(parts.tp + parts.fp);
  const double r_den = static_cast<double>(parts.tp + parts.fn);
  out.precision = p_den == 0 ? 0 : parts.tp / p_den;
  out.recall = r_den == 0 ? 0 : parts.tp / r_den;
  out.f1 = (out.precision + out.recall) == 0
               ? 0
               : 2 * out.precision * out.recall / (out.precision + out.recall);
  return out;
}

namespace {

template <class Item>
PrfParts multiset_overlap(const std::vector<Item>& pred,
                          const std::vector<Item>& gold) {
  std::map<Item, long> balance;
  for (const Item& x : gold) balance[x]++;
  PrfParts parts;
  for (const Item& x : pred) {
    auto it = balance.find(x);
    if (it != balance.end() && it->second > 0) {
      parts.tp++;
      it->second--;
    } else {
      parts.fp++;
    }
  }
  parts.fn = gold.size() - parts.tp;
  return parts;
}

using Triplet = std::tuple<std::string, std::string, std::string>;

std::vector<Triplet> edge_triplets(const SceneGraph& g) {
  std::vector<Triplet> out;
  for (const Edge& e : g.edges())
    out.emplace_back(g.label(e.src), e.label, g.label(e.dst));
  return out;
}

}  // namespace

PrfParts node_parts(const SceneGraph& pred, const SceneGraph& gold) {
  return multiset_overlap(pred.nodes(), gold.nodes());
}

PrfParts edge_parts(const SceneGraph& pred, const SceneGraph& gold) {
  return multiset_overlap(edge_triplets(pred), edge_triplets(gold));
}

std::string bin_name(int op_count) {
  if (op_count <= 2) return "1-2";
  if (op_count <= 4) return "3-4";
  return "5+";
}

namespace {

struct Accumulator {
  size_t count = 0;
  PrfParts node, edge;
  size_t graph_hits = 0;

  SplitMetrics finish(bool with_graph_accuracy) const {
    SplitMetrics m;
    m.count = count;
    m.node = prf_from(node);
    m.edge = prf_from(edge);
    if (with_graph_accuracy)
      m.graph_accuracy =
          count == 0 ? 0.0 : static_cast<double>(graph_hits) / count;
    return m;
  }
};

nlohmann::json prf_json(const Prf& p) {
  return {{"precision", p.precision}, {"recall", p.recall}, {"f1", p.f1}};
}

nlohmann::json split_json(const SplitMetrics& m) {
  nlohmann::json j;
  j["count"] = m.count;
  j["node"] = prf_json(m.node);
  j["edge"] = prf_json(m.edge);
  if (m.graph_accuracy)
    j["graph_accuracy"] = *m.graph_accuracy;
  else
    j["graph_accuracy"] = nullptr;
  return j;
}

}  // namespace

std::string report_to_json(const MetricsReport& report) {
  nlohmann::json j = split_json(report.overall);
  if (!report.bins.empty()) {
    nlohmann::json bins;
    for (const auto& [name, m] : report.bins) bins[name] = split_json(m);
    j["bins"] = bins;
  }
  return j.dump(2);
}

MetricsReport score_predictions(
    const std::vector<std::optional<SceneGraph>>& preds,
    const std::vector<ModificationInstance>& gold, bool with_graph_accuracy,
    bool with_bins) {
  if (preds.size() != gold.size())
    throw LengthMismatchError("predictions and references differ in length");

  const std::vector<std::string> bin_order = {"1-2", "3-4", "5+"};
  Accumulator overall;
  std::map<std::string, Accumulator> bins;

  for (size_t i = 0; i < preds.size(); ++i) {
    PrfParts n, e;
    bool hit = false;
    if (preds[i]) {
      n = node_parts(*preds[i], gold[i].target);
      e = edge_parts(*preds[i], gold[i].target);
      hit = isomorphic(*preds[i], gold[i].target, 16);
    } else {
      n.fn = gold[i].target.nodes().size();
      e.fn = gold[i].target.edges().size();
    }
    const int ops = std::max<int>(1, static_cast<int>(gold[i].ops.size()));
    for (Accumulator* acc : {&overall, &bins[bin_name(ops)]}) {
      acc->count++;
      acc->node += n;
      acc->edge += e;
      if (hit) acc->graph_hits++;
    }
  }

  MetricsReport report;
  report.overall = overall.finish(with_graph_accuracy);
  if (with_bins)
    for (const std::string& name : bin_order)
      report.bins.emplace_back(name, bins[name].finish(with_graph_accuracy));
  return report;
}

MetricsReport copy_source(const std::vector<ModificationInstance>& data,
                          bool with_bins) {
  std::vector<std::optional<SceneGraph>> preds;
  preds.reserve(data.size());
  for (const ModificationInstance& inst : data) preds.emplace_back(inst.source);
  return score_predictions(preds, data, /*with_graph_accuracy=*/false, with_bins);
}

}  // namespace gmod
