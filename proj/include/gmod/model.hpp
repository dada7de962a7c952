#pragma once

#include <cmath>
#include <string>
#include <unordered_map>
#include <vector>

#include "gmod/errors.hpp"
#include "gmod/graph.hpp"
#include "gmod/rng.hpp"
#include "gmod/tensor.hpp"
#include "gmod/vocab.hpp"

namespace gmod {

enum class Fusion { Concat, Gating, Cross };
enum class EdgeDecoderKind { Adjacency, Flat };

const char* fusion_name(Fusion f);
Fusion fusion_from_name(const std::string& name);
const char* edge_decoder_name(EdgeDecoderKind k);
EdgeDecoderKind edge_decoder_from_name(const std::string& name);

struct ModelConfig {
  int layers = 3;
  int heads = 4;
  int d_model = 256;
  int d_ff = 512;
  int gru_hidden = 256;
  Fusion fusion = Fusion::Cross;
  EdgeDecoderKind edge_decoder = EdgeDecoderKind::Flat;
  int max_decode_nodes = 8;

  void validate() const {
    if (layers <= 0 || heads <= 0 || d_model <= 0 || d_ff <= 0 ||
        gru_hidden <= 0 || max_decode_nodes <= 0)
      throw ConfigError("model dims must be positive");
    if (d_model % heads != 0)
      throw ConfigError("d_model must be divisible by heads");
  }
};

// Named parameter registry. Insertion order is fixed by init() so that
// checkpoints and optimizer state line up across runs.
template <class Scalar>
struct ModelParams {
  ModelConfig config;
  int token_vocab = 0;  // rows of the shared node/query table
  int edge_vocab = 0;   // rows of the edge-label table, NULL class included

  std::vector<std::string> names;
  std::unordered_map<std::string, Tensor<Scalar>> by_name;

  Tensor<Scalar> add(const std::string& name, int rows, int cols) {
    auto t = make_tensor<Scalar>(rows, cols);
    names.push_back(name);
    by_name.emplace(name, t);
    return t;
  }

  const Tensor<Scalar>& at(const std::string& name) const {
    auto it = by_name.find(name);
    if (it == by_name.end()) throw ConfigError("unknown parameter " + name);
    return it->second;
  }

  std::vector<Tensor<Scalar>> all() const {
    std::vector<Tensor<Scalar>> out;
    for (const std::string& n : names) out.push_back(by_name.at(n));
    return out;
  }

  size_t count() const {
    size_t n = 0;
    for (const auto& name : names) n += by_name.at(name)->size();
    return n;
  }

  static ModelParams init(const ModelConfig& cfg, int token_vocab,
                          int edge_vocab, Rng& rng);
};

namespace detail {

// Xavier-uniform fill; biases stay zero, layer-norm gains start at one.
template <class Scalar>
void fill_xavier(const Tensor<Scalar>& t, Rng& rng) {
  const double s = std::sqrt(6.0 / (t->rows + t->cols));
  for (auto& x : t->v) x = Scalar(rng.uniform(-s, s));
}

template <class Scalar>
void fill_ones(const Tensor<Scalar>& t) {
  std::fill(t->v.begin(), t->v.end(), Scalar(1));
}

inline void gru_param_names(std::vector<std::pair<std::string, bool>>& out,
                            const std::string& prefix) {
  for (const char* g : {"z", "r", "n"}) {
    out.push_back({prefix + ".w" + g, false});
    out.push_back({prefix + ".u" + g, false});
    out.push_back({prefix + ".b" + g, true});
  }
}

}  // namespace detail

template <class Scalar>
ModelParams<Scalar> ModelParams<Scalar>::init(const ModelConfig& cfg,
                                              int token_vocab, int edge_vocab,
                                              Rng& rng) {
  cfg.validate();
  if (token_vocab <= 0 || edge_vocab <= 0)
    throw ConfigError("vocabulary sizes must be positive");
  ModelParams P;
  P.config = cfg;
  P.token_vocab = token_vocab;
  P.edge_vocab = edge_vocab;
  const int d = cfg.d_model, dk = cfg.d_model / cfg.heads, H = cfg.gru_hidden;

  auto mat = [&](const std::string& name, int r, int c) {
    detail::fill_xavier(P.add(name, r, c), rng);
  };
  auto bias = [&](const std::string& name, int c) { P.add(name, 1, c); };
  auto gain = [&](const std::string& name, int c) {
    detail::fill_ones(P.add(name, 1, c));
  };
  auto gru = [&](const std::string& prefix, int d_in) {
    std::vector<std::pair<std::string, bool>> names;
    detail::gru_param_names(names, prefix);
    for (const auto& [name, is_bias] : names) {
      if (is_bias) bias(name, H);
      else if (name.find(".u") != std::string::npos) mat(name, H, H);
      else mat(name, d_in, H);
    }
  };

  // Embedding tables shared by encoder and decoders (variance ~ 1/d).
  {
    auto t = P.add("embed.token", token_vocab, d);
    const double s = std::sqrt(3.0 / d);
    for (auto& x : t->v) x = Scalar(rng.uniform(-s, s));
    auto e = P.add("embed.edge", edge_vocab, d);
    for (auto& x : e->v) x = Scalar(rng.uniform(-s, s));
  }

  for (int l = 0; l < cfg.layers; ++l) {
    const std::string lp = "enc.l" + std::to_string(l);
    for (int h = 0; h < cfg.heads; ++h) {
      const std::string hp = lp + ".attn.h" + std::to_string(h);
      mat(hp + ".wq", d, dk);
      mat(hp + ".wk", d, dk);
      mat(hp + ".wv", d, dk);
    }
    mat(lp + ".attn.wo", d, d);
    gain(lp + ".ln1.gain", d);
    bias(lp + ".ln1.bias", d);
    mat(lp + ".ffn.w1", d, cfg.d_ff);
    bias(lp + ".ffn.b1", cfg.d_ff);
    mat(lp + ".ffn.w2", cfg.d_ff, d);
    bias(lp + ".ffn.b2", d);
    gain(lp + ".ln2.gain", d);
    bias(lp + ".ln2.bias", d);
  }

  if (cfg.fusion == Fusion::Gating) {
    for (const char* side : {"graph", "query"}) {
      const std::string gp = std::string("gate.") + side;
      mat(gp + ".w1", 2 * d, d);
      bias(gp + ".b1", d);
      mat(gp + ".w2", d, d);
      bias(gp + ".b2", d);
    }
  }

  gru("dec.node.gru", d);
  bias("dec.node.h0", H);
  mat("dec.node.attn.w", H, d);
  mat("dec.node.out.w", H + d, d);
  bias("dec.node.out.b", d);

  gru("dec.edge.gru", d + 2 * H);
  if (cfg.edge_decoder == EdgeDecoderKind::Adjacency) {
    mat("dec.edge.rowinit.w", H, H);
    bias("dec.edge.rowinit.b", H);
  }
  mat("dec.edge.attn.w", H, d);
  mat("dec.edge.out.w", H + d, d);
  bias("dec.edge.out.b", d);
  return P;
}

// ---- encoder ----

// Row layout of the encoder input/output:
//   concat/cross: [graph nodes][query tokens]
//   gating:       [graph nodes][CLS-graph][CLS-query][query tokens]
Mask attention_mask(const SceneGraph& g, int query_len, Fusion fusion);

std::vector<double> sinusoidal_positions(int length, int dim);

template <class Scalar>
Tensor<Scalar> edge_aware_embeddings(const SceneGraph& g,
                                     const ModelParams<Scalar>& P,
                                     const Vocabulary& tokens,
                                     const Vocabulary& edges) {
  if (g.node_count() == 0) throw EmptyGraphError("cannot embed empty graph");
  std::vector<int> label_ids;
  for (const std::string& label : g.nodes()) label_ids.push_back(tokens.id(label));
  Tensor<Scalar> x = embedding_rows(P.at("embed.token"), label_ids);

  // x_i += sum of incident edge-label embeddings, both directions, with
  // multiplicity. Row-sum realized as ones-vector matmul.
  std::vector<Tensor<Scalar>> rows;
  bool any_edges = false;
  for (int i = 0; i < g.node_count(); ++i) {
    const std::vector<std::string> incident = g.incident_edge_labels(i);
    if (incident.empty()) {
      rows.push_back(make_tensor<Scalar>(1, P.config.d_model));
      continue;
    }
    any_edges = true;
    std::vector<int> ids;
    for (const std::string& label : incident) ids.push_back(edges.id(label));
    auto ones = make_tensor<Scalar>(1, static_cast<int>(ids.size()));
    std::fill(ones->v.begin(), ones->v.end(), Scalar(1));
    rows.push_back(matmul(ones, embedding_rows(P.at("embed.edge"), ids)));
  }
  if (!any_edges) return x;
  return add(x, concat_rows(rows));
}

template <class Scalar>
struct EncodeResult {
  Tensor<Scalar> memory;  // graph rows then query rows (+CLS rows, gating)
  Tensor<Scalar> cls_graph, cls_query;  // gating only
  int n_nodes = 0, n_query = 0;
};

namespace detail {

template <class Scalar>
Tensor<Scalar> affine(const Tensor<Scalar>& x, const Tensor<Scalar>& w,
                      const Tensor<Scalar>& b) {
  return add_rowvec(matmul(x, w), b);
}

template <class Scalar>
Tensor<Scalar> transformer_block(Tensor<Scalar> x, const Mask& mask,
                                 const ModelParams<Scalar>& P, int layer,
                                 std::vector<Tensor<Scalar>>* attn_trace) {
  const std::string lp = "enc.l" + std::to_string(layer);
  const int dk = P.config.d_model / P.config.heads;
  std::vector<Tensor<Scalar>> heads;
  for (int h = 0; h < P.config.heads; ++h) {
    const std::string hp = lp + ".attn.h" + std::to_string(h);
    auto q = matmul(x, P.at(hp + ".wq"));
    auto k = matmul(x, P.at(hp + ".wk"));
    auto v = matmul(x, P.at(hp + ".wv"));
    auto alpha =
        masked_softmax(scale(matmul_nt(q, k), 1.0 / std::sqrt(double(dk))), mask);
    if (attn_trace) attn_trace->push_back(alpha);
    heads.push_back(matmul(alpha, v));
  }
  auto attn = matmul(concat_cols(heads), P.at(lp + ".attn.wo"));
  x = layer_norm(add(x, attn), P.at(lp + ".ln1.gain"), P.at(lp + ".ln1.bias"));
  auto ffn = affine(relu(affine(x, P.at(lp + ".ffn.w1"), P.at(lp + ".ffn.b1"))),
                    P.at(lp + ".ffn.w2"), P.at(lp + ".ffn.b2"));
  return layer_norm(add(x, ffn), P.at(lp + ".ln2.gain"), P.at(lp + ".ln2.bias"));
}

template <class Scalar>
Tensor<Scalar> repeat_row(const Tensor<Scalar>& row, int n) {
  auto ones = make_tensor<Scalar>(n, 1);
  std::fill(ones->v.begin(), ones->v.end(), Scalar(1));
  return matmul(ones, row);
}

// sigma(MLP(a_i, b)) with b broadcast over rows of a.
template <class Scalar>
Tensor<Scalar> gate_rows(const Tensor<Scalar>& a, const Tensor<Scalar>& b,
                         const ModelParams<Scalar>& P, const std::string& gp) {
  auto in = concat_cols<Scalar>({a, repeat_row(b, a->rows)});
  auto hidden = tanh_t(affine(in, P.at(gp + ".w1"), P.at(gp + ".b1")));
  return sigmoid(affine(hidden, P.at(gp + ".w2"), P.at(gp + ".b2")));
}

}  // namespace detail

// Element-wise gates conditioned on the other input's CLS summary:
// m'_x = sigma(MLP(m_x, cls_query)) * m_x and symmetrically for query rows.
template <class Scalar>
std::pair<Tensor<Scalar>, Tensor<Scalar>> fuse_gating(
    const Tensor<Scalar>& node_rows, const Tensor<Scalar>& query_rows,
    const Tensor<Scalar>& cls_graph, const Tensor<Scalar>& cls_query,
    const ModelParams<Scalar>& P) {
  auto gx = detail::gate_rows(node_rows, cls_query, P, "gate.graph");
  auto gy = detail::gate_rows(query_rows, cls_graph, P, "gate.query");
  return {mul(gx, node_rows), mul(gy, query_rows)};
}

template <class Scalar>
EncodeResult<Scalar> encode(const SceneGraph& g,
                            const std::vector<int>& query_ids,
                            const ModelParams<Scalar>& P,
                            const Vocabulary& tokens, const Vocabulary& edges,
                            std::vector<Tensor<Scalar>>* attn_trace = nullptr) {
  if (query_ids.empty()) throw ShapeError("encode: query must be nonempty");
  const int n = g.node_count();
  const int T = static_cast<int>(query_ids.size());
  const int d = P.config.d_model;

  Tensor<Scalar> node_x = edge_aware_embeddings(g, P, tokens, edges);

  // Query tokens get sinusoidal positions; graph nodes get none.
  Tensor<Scalar> query_x = embedding_rows(P.at("embed.token"), query_ids);
  {
    const std::vector<double> pos = sinusoidal_positions(T, d);
    auto pe = make_tensor<Scalar>(T, d);
    for (size_t i = 0; i < pos.size(); ++i) pe->v[i] = Scalar(pos[i]);
    query_x = add(query_x, pe);
  }

  Tensor<Scalar> x;
  if (P.config.fusion == Fusion::Gating) {
    auto cls_g = embedding_rows(P.at("embed.token"), std::vector<int>{kClsId});
    auto cls_q = embedding_rows(P.at("embed.token"), std::vector<int>{kClsId});
    x = concat_rows<Scalar>({node_x, cls_g, cls_q, query_x});
  } else {
    x = concat_rows<Scalar>({node_x, query_x});
  }

  const Mask mask = attention_mask(g, T, P.config.fusion);
  for (int l = 0; l < P.config.layers; ++l)
    x = detail::transformer_block(x, mask, P, l, attn_trace);

  EncodeResult<Scalar> out;
  out.n_nodes = n;
  out.n_query = T;
  if (P.config.fusion == Fusion::Gating) {
    auto nodes = slice_rows(x, 0, n);
    auto cls_g = slice_rows(x, n, n + 1);
    auto cls_q = slice_rows(x, n + 1, n + 2);
    auto query = slice_rows(x, n + 2, n + 2 + T);
    auto [gated_nodes, gated_query] = fuse_gating(nodes, query, cls_g, cls_q, P);
    out.memory = concat_rows<Scalar>({gated_nodes, gated_query, cls_g, cls_q});
    out.cls_graph = cls_g;
    out.cls_query = cls_q;
  } else {
    out.memory = x;
  }
  return out;
}

// ---- decoders ----

namespace detail {

template <class Scalar>
Tensor<Scalar> gru_step(const ModelParams<Scalar>& P, const std::string& prefix,
                        const Tensor<Scalar>& x, const Tensor<Scalar>& h) {
  auto z = sigmoid(add(add(matmul(x, P.at(prefix + ".wz")),
                           matmul(h, P.at(prefix + ".uz"))),
                       P.at(prefix + ".bz")));
  auto r = sigmoid(add(add(matmul(x, P.at(prefix + ".wr")),
                           matmul(h, P.at(prefix + ".ur"))),
                       P.at(prefix + ".br")));
  auto n = tanh_t(add(add(matmul(x, P.at(prefix + ".wn")),
                          matmul(mul(r, h), P.at(prefix + ".un"))),
                      P.at(prefix + ".bn")));
  auto one_minus_z = add_scalar(scale(z, -1.0), 1.0);
  return add(mul(one_minus_z, n), mul(z, h));
}

// Luong general attention: softmax(h W memory^T) memory.
template <class Scalar>
Tensor<Scalar> luong_context(const ModelParams<Scalar>& P,
                             const std::string& wname, const Tensor<Scalar>& h,
                             const Tensor<Scalar>& memory) {
  auto scores = matmul_nt(matmul(h, P.at(wname)), memory);
  Mask all(1, memory->rows, true);
  return matmul(masked_softmax(scores, all), memory);
}

// softmax(W[h, c] + b) with the output projection tied to `table`.
template <class Scalar>
Tensor<Scalar> tied_logits(const ModelParams<Scalar>& P,
                           const std::string& prefix, const Tensor<Scalar>& h,
                           const Tensor<Scalar>& c, const Tensor<Scalar>& table) {
  auto proj = affine(concat_cols<Scalar>({h, c}), P.at(prefix + ".w"),
                     P.at(prefix + ".b"));
  return matmul_nt(proj, table);
}

template <class Scalar>
int argmax_restricted(const Tensor<Scalar>& logits,
                      const std::vector<int>& banned) {
  int best = -1;
  Scalar best_v = 0;
  for (int j = 0; j < logits->cols; ++j) {
    bool skip = false;
    for (int b : banned)
      if (j == b) skip = true;
    if (skip) continue;
    if (best < 0 || logits->at(0, j) > best_v) {
      best = j;
      best_v = logits->at(0, j);
    }
  }
  return best;
}

}  // namespace detail

template <class Scalar>
struct NodeDecode {
  Tensor<Scalar> logits;  // [steps, token vocab]; teacher: gold steps + EOS
  std::vector<Tensor<Scalar>> hiddens;  // one per node, EOS step excluded
  Tensor<Scalar> final_hidden;          // state after the last step taken
  std::vector<int> emitted;             // greedy only, EOS not included
  bool hit_eos = false;
};

// Teacher forcing: consumes [BOS, gold...] and scores [gold..., EOS].
template <class Scalar>
NodeDecode<Scalar> decode_nodes_teacher(const Tensor<Scalar>& memory,
                                        const ModelParams<Scalar>& P,
                                        const std::vector<int>& gold_ids) {
  NodeDecode<Scalar> out;
  Tensor<Scalar> h = P.at("dec.node.h0");
  std::vector<Tensor<Scalar>> step_logits;
  std::vector<int> inputs = {kBosId};
  inputs.insert(inputs.end(), gold_ids.begin(), gold_ids.end());
  for (size_t t = 0; t < inputs.size(); ++t) {
    auto x = embedding_rows(P.at("embed.token"), {inputs[t]});
    h = detail::gru_step(P, "dec.node.gru", x, h);
    auto c = detail::luong_context(P, "dec.node.attn.w", h, memory);
    step_logits.push_back(
        detail::tied_logits(P, "dec.node.out", h, c, P.at("embed.token")));
    if (t < gold_ids.size()) out.hiddens.push_back(h);  // step emits node t
  }
  out.logits = concat_rows(step_logits);
  out.final_hidden = h;
  return out;
}

template <class Scalar>
NodeDecode<Scalar> decode_nodes_greedy(const Tensor<Scalar>& memory,
                                       const ModelParams<Scalar>& P,
                                       int max_nodes) {
  NodeDecode<Scalar> out;
  Tensor<Scalar> h = P.at("dec.node.h0");
  std::vector<Tensor<Scalar>> step_logits;
  int prev = kBosId;
  // Tokens that can never name a node: padding, BOS itself, and CLS.
  const std::vector<int> banned = {kPadId, kBosId, kClsId};
  for (;;) {
    auto x = embedding_rows(P.at("embed.token"), {prev});
    h = detail::gru_step(P, "dec.node.gru", x, h);
    auto c = detail::luong_context(P, "dec.node.attn.w", h, memory);
    auto logits =
        detail::tied_logits(P, "dec.node.out", h, c, P.at("embed.token"));
    step_logits.push_back(logits);
    const int pick = detail::argmax_restricted(logits, banned);
    if (pick == kEosId) {
      out.hit_eos = true;
      break;
    }
    out.emitted.push_back(pick);
    out.hiddens.push_back(h);
    if (static_cast<int>(out.emitted.size()) >= max_nodes) break;
    prev = pick;
  }
  out.logits = concat_rows(step_logits);
  out.final_hidden = h;
  return out;
}

// Lower-triangle cells in row-major order: (1,0), (2,0), (2,1), (3,0), ...
// The edge for cell (i, j) runs j -> i (earlier decoded node to later).
std::vector<std::pair<int, int>> lower_triangle_cells(int n);

template <class Scalar>
struct EdgeDecode {
  Tensor<Scalar> logits;     // [cells, edge vocab], row-major lower triangle
  std::vector<int> emitted;  // greedy only: per-cell class ids
};

// Shared edge decoder. Adjacency mode restarts an independent GRU per row
// (initial hidden = linear map of the row's node hidden); flat mode threads
// one GRU through every cell, seeded with the node decoder's final hidden,
// so each cell conditions on all previously generated edges.
template <class Scalar>
EdgeDecode<Scalar> decode_edges(const std::vector<Tensor<Scalar>>& node_hiddens,
                                const Tensor<Scalar>& final_node_hidden,
                                const Tensor<Scalar>& memory,
                                const ModelParams<Scalar>& P,
                                EdgeDecoderKind kind,
                                const std::vector<int>* gold_cells) {
  if (node_hiddens.empty()) throw ShapeError("decode_edges: no node hiddens");
  const int n = static_cast<int>(node_hiddens.size());
  const auto cells = lower_triangle_cells(n);
  if (gold_cells && gold_cells->size() != cells.size())
    throw ShapeError("decode_edges: gold cell count mismatch");

  EdgeDecode<Scalar> out;
  std::vector<Tensor<Scalar>> step_logits;
  if (cells.empty()) {
    out.logits = nullptr;
    return out;
  }

  Tensor<Scalar> h = final_node_hidden;  // flat mode carries this through
  int prev = kBosId;
  int row = -1;
  for (size_t cell = 0; cell < cells.size(); ++cell) {
    const auto [i, j] = cells[cell];
    if (kind == EdgeDecoderKind::Adjacency && i != row) {
      // New row: restart the recurrence from this row's node hidden.
      row = i;
      h = detail::affine(node_hiddens[i], P.at("dec.edge.rowinit.w"),
                         P.at("dec.edge.rowinit.b"));
      prev = kBosId;
    }
    auto x = concat_cols<Scalar>(
        {embedding_rows(P.at("embed.edge"), {prev}), node_hiddens[i],
         node_hiddens[j]});
    h = detail::gru_step(P, "dec.edge.gru", x, h);
    auto c = detail::luong_context(P, "dec.edge.attn.w", h, memory);
    auto logits =
        detail::tied_logits(P, "dec.edge.out", h, c, P.at("embed.edge"));
    step_logits.push_back(logits);

    if (gold_cells) {
      prev = (*gold_cells)[cell];
    } else {
      // Real edge labels sit above the specials; NULL is the no-edge class.
      std::vector<int> banned;
      for (int b = 0; b < kNullEdgeId; ++b) banned.push_back(b);
      const int pick = detail::argmax_restricted(logits, banned);
      out.emitted.push_back(pick);
      prev = pick;
    }
  }
  out.logits = concat_rows(step_logits);
  return out;
}

// Greedy end-to-end generation: nodes, then edges over the decoded nodes.
// Edges always point from the earlier decoded node to the later one, so the
// output cannot contain a cycle.
template <class Scalar>
SceneGraph generate(const SceneGraph& g, const std::vector<int>& query_ids,
                    const ModelParams<Scalar>& P, const Vocabulary& tokens,
                    const Vocabulary& edges) {
  const EncodeResult<Scalar> enc = encode(g, query_ids, P, tokens, edges);
  NodeDecode<Scalar> nodes =
      decode_nodes_greedy(enc.memory, P, P.config.max_decode_nodes);
  if (nodes.emitted.empty())
    throw DecodeOverflowError("decoded zero nodes before EOS");

  std::vector<std::string> labels;
  for (int id : nodes.emitted) labels.push_back(tokens.token(id));

  EdgeDecode<Scalar> cells =
      decode_edges(nodes.hiddens, nodes.final_hidden, enc.memory, P,
                   P.config.edge_decoder, nullptr);
  std::vector<Edge> out_edges;
  const auto index = lower_triangle_cells(static_cast<int>(labels.size()));
  for (size_t c = 0; c < index.size(); ++c) {
    const int pick = cells.emitted[c];
    if (pick == kNullEdgeId) continue;
    out_edges.push_back({index[c].second, index[c].first, edges.token(pick)});
  }
  return SceneGraph(std::move(labels), std::move(out_edges));
}

}  // namespace gmod
