#pragma once

#include <cstring>
#include <fstream>
#include <numeric>
#include <ostream>
#include <string>
#include <vector>

#include "gmod/datagen.hpp"
#include "gmod/errors.hpp"
#include "gmod/model.hpp"
#include "gmod/tensor.hpp"
#include "gmod/vocab.hpp"

namespace gmod {

struct TrainConfig {
  int batch_size = 32;
  int epochs = 30;
  double lr = 1e-3;
  double clip_norm = 1.0;
  uint64_t seed = 0;
  bool mix = false;             // 1:1 synthetic/user batches
  double early_stop_acc = -1;   // stop once dev accuracy reaches this; <0 off

  void validate() const {
    if (batch_size <= 0 || epochs <= 0 || lr <= 0 || clip_norm <= 0)
      throw ConfigError("train config values must be positive");
  }
};

// Decoding order for target nodes: topological, ties broken by the label's
// first position in the source graph's node list, then by label.
std::vector<int> target_node_order(const SceneGraph& target,
                                   const SceneGraph& source);

// An instance with everything the loss needs resolved to vocabulary ids.
struct PreparedInstance {
  SceneGraph source;
  SceneGraph target;
  std::vector<int> query_ids;
  std::vector<int> gold_node_ids;  // target labels in decoding order
  std::vector<int> gold_cell_ids;  // lower-triangle edge classes, NULL filled
  int op_count = 1;
};

PreparedInstance prepare_instance(const ModificationInstance& inst,
                                  const Vocabulary& tokens,
                                  const Vocabulary& edges);

// Vocabularies induced by a corpus: shared token vocabulary over node labels
// and query words; edge vocabulary with the NULL class.
std::pair<Vocabulary, Vocabulary> build_vocabs(
    const std::vector<ModificationInstance>& data);

struct LossParts {
  double node = 0, edge = 0;
  double total() const { return node + edge; }
};

// Teacher-forced negative log-likelihood of one instance: node steps
// (EOS included) plus every lower-triangle edge cell.
template <class Scalar>
Tensor<Scalar> instance_loss(const PreparedInstance& inst,
                             const ModelParams<Scalar>& P,
                             const Vocabulary& tokens, const Vocabulary& edges,
                             LossParts* parts = nullptr) {
  const EncodeResult<Scalar> enc =
      encode(inst.source, inst.query_ids, P, tokens, edges);
  NodeDecode<Scalar> nodes =
      decode_nodes_teacher(enc.memory, P, inst.gold_node_ids);
  std::vector<int> node_targets = inst.gold_node_ids;
  node_targets.push_back(kEosId);
  Tensor<Scalar> node_nll =
      cross_entropy_with_logits(nodes.logits, node_targets);

  Tensor<Scalar> loss = node_nll;
  double edge_part = 0;
  if (inst.gold_node_ids.size() >= 2) {
    EdgeDecode<Scalar> cells =
        decode_edges(nodes.hiddens, nodes.final_hidden, enc.memory, P,
                     P.config.edge_decoder, &inst.gold_cell_ids);
    Tensor<Scalar> edge_nll =
        cross_entropy_with_logits(cells.logits, inst.gold_cell_ids);
    edge_part = static_cast<double>(edge_nll->v[0]);
    loss = add(loss, edge_nll);
  }
  if (parts) {
    parts->node = static_cast<double>(node_nll->v[0]);
    parts->edge = edge_part;
  }
  return loss;
}

// Mean loss over a batch, as one graph. Tests use this; fit() accumulates
// per-instance gradients instead to keep peak memory flat.
template <class Scalar>
Tensor<Scalar> batch_loss(const std::vector<PreparedInstance>& batch,
                          const ModelParams<Scalar>& P, const Vocabulary& tokens,
                          const Vocabulary& edges, LossParts* parts = nullptr) {
  if (batch.empty()) throw EmptySetError("batch_loss: empty batch");
  Tensor<Scalar> total;
  LossParts acc;
  for (const PreparedInstance& inst : batch) {
    LossParts one;
    Tensor<Scalar> l = instance_loss(inst, P, tokens, edges, &one);
    acc.node += one.node;
    acc.edge += one.edge;
    total = total ? add(total, l) : l;
  }
  if (parts) {
    parts->node = acc.node / batch.size();
    parts->edge = acc.edge / batch.size();
  }
  return scale(total, 1.0 / batch.size());
}

// ---- optimization ----

template <class Scalar>
void clip_global_norm(const std::vector<Tensor<Scalar>>& params,
                      double max_norm) {
  double sq = 0;
  for (const auto& p : params)
    for (Scalar g : p->grad) sq += static_cast<double>(g) * g;
  const double norm = std::sqrt(sq);
  if (norm <= max_norm || norm == 0) return;
  const double k = max_norm / norm;
  for (const auto& p : params)
    for (Scalar& g : p->grad) g = Scalar(g * k);
}

template <class Scalar>
class Adam {
 public:
  Adam(const std::vector<Tensor<Scalar>>& params, double lr,
       double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
      : lr_(lr), b1_(beta1), b2_(beta2), eps_(eps) {
    for (const auto& p : params) {
      m_.emplace_back(p->size(), 0.0);
      v_.emplace_back(p->size(), 0.0);
    }
  }

  void step(const std::vector<Tensor<Scalar>>& params) {
    t_++;
    const double c1 = 1.0 - std::pow(b1_, t_);
    const double c2 = 1.0 - std::pow(b2_, t_);
    for (size_t i = 0; i < params.size(); ++i) {
      auto& p = *params[i];
      for (size_t j = 0; j < p.size(); ++j) {
        const double g = static_cast<double>(p.grad[j]);
        m_[i][j] = b1_ * m_[i][j] + (1 - b1_) * g;
        v_[i][j] = b2_ * v_[i][j] + (1 - b2_) * g * g;
        p.v[j] -= Scalar(lr_ * (m_[i][j] / c1) /
                         (std::sqrt(v_[i][j] / c2) + eps_));
      }
    }
  }

 private:
  double lr_, b1_, b2_, eps_;
  int t_ = 0;
  std::vector<std::vector<double>> m_, v_;  // double state for determinism
};

// ---- checkpoints ----

template <class Scalar>
struct Checkpoint {
  ModelConfig config;
  Vocabulary tokens{false};
  Vocabulary edges{true};
  ModelParams<Scalar> params;
  int epoch = 0;
  double dev_metric = 0;
};

namespace detail {

inline void put_u32(std::ostream& o, uint32_t x) {
  o.write(reinterpret_cast<const char*>(&x), 4);
}
inline void put_u64(std::ostream& o, uint64_t x) {
  o.write(reinterpret_cast<const char*>(&x), 8);
}
inline void put_f64(std::ostream& o, double x) {
  o.write(reinterpret_cast<const char*>(&x), 8);
}
inline void put_str(std::ostream& o, const std::string& s) {
  put_u32(o, static_cast<uint32_t>(s.size()));
  o.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline uint32_t get_u32(std::istream& i) {
  uint32_t x;
  i.read(reinterpret_cast<char*>(&x), 4);
  if (!i) throw CheckpointError("truncated checkpoint");
  return x;
}
inline uint64_t get_u64(std::istream& i) {
  uint64_t x;
  i.read(reinterpret_cast<char*>(&x), 8);
  if (!i) throw CheckpointError("truncated checkpoint");
  return x;
}
inline double get_f64(std::istream& i) {
  double x;
  i.read(reinterpret_cast<char*>(&x), 8);
  if (!i) throw CheckpointError("truncated checkpoint");
  return x;
}
inline std::string get_str(std::istream& i, uint32_t cap = 1u << 20) {
  const uint32_t len = get_u32(i);
  if (len > cap) throw CheckpointError("corrupt string length");
  std::string s(len, '\0');
  i.read(s.data(), len);
  if (!i) throw CheckpointError("truncated checkpoint");
  return s;
}

inline void put_vocab(std::ostream& o, const Vocabulary& v) {
  put_u32(o, static_cast<uint32_t>(v.tokens().size()));
  for (const std::string& t : v.tokens()) put_str(o, t);
}

inline Vocabulary get_vocab(std::istream& i) {
  const uint32_t count = get_u32(i);
  if (count > (1u << 24)) throw CheckpointError("corrupt vocabulary size");
  std::vector<std::string> tokens;
  tokens.reserve(count);
  for (uint32_t k = 0; k < count; ++k) tokens.push_back(get_str(i));
  try {
    return Vocabulary::from_tokens(std::move(tokens));
  } catch (const Error& e) {
    throw CheckpointError(std::string("corrupt vocabulary: ") + e.what());
  }
}

}  // namespace detail

inline constexpr uint32_t kCheckpointVersion = 1;

// Layout (little-endian): "GMCK", version, token/edge vocab hashes, model
// config, vocabularies, epoch, dev metric, then named tensor blocks
// (name, dtype width, rows, cols, raw values).
template <class Scalar>
void save_checkpoint(const Checkpoint<Scalar>& c, const std::string& path) {
  std::ofstream o(path, std::ios::binary);
  if (!o) throw IoError("cannot write checkpoint: " + path);
  o.write("GMCK", 4);
  detail::put_u32(o, kCheckpointVersion);
  detail::put_u64(o, c.tokens.hash());
  detail::put_u64(o, c.edges.hash());

  detail::put_u32(o, static_cast<uint32_t>(c.config.layers));
  detail::put_u32(o, static_cast<uint32_t>(c.config.heads));
  detail::put_u32(o, static_cast<uint32_t>(c.config.d_model));
  detail::put_u32(o, static_cast<uint32_t>(c.config.d_ff));
  detail::put_u32(o, static_cast<uint32_t>(c.config.gru_hidden));
  detail::put_u32(o, static_cast<uint32_t>(c.config.fusion));
  detail::put_u32(o, static_cast<uint32_t>(c.config.edge_decoder));
  detail::put_u32(o, static_cast<uint32_t>(c.config.max_decode_nodes));
  detail::put_u32(o, static_cast<uint32_t>(c.params.token_vocab));
  detail::put_u32(o, static_cast<uint32_t>(c.params.edge_vocab));

  detail::put_vocab(o, c.tokens);
  detail::put_vocab(o, c.edges);
  detail::put_u32(o, static_cast<uint32_t>(c.epoch));
  detail::put_f64(o, c.dev_metric);

  detail::put_u32(o, static_cast<uint32_t>(c.params.names.size()));
  for (const std::string& name : c.params.names) {
    const auto& t = c.params.by_name.at(name);
    detail::put_str(o, name);
    detail::put_u32(o, sizeof(Scalar));
    detail::put_u32(o, static_cast<uint32_t>(t->rows));
    detail::put_u32(o, static_cast<uint32_t>(t->cols));
    o.write(reinterpret_cast<const char*>(t->v.data()),
            static_cast<std::streamsize>(t->v.size() * sizeof(Scalar)));
  }
  if (!o) throw IoError("checkpoint write failed: " + path);
}

template <class Scalar>
Checkpoint<Scalar> load_checkpoint(const std::string& path) {
  std::ifstream i(path, std::ios::binary);
  if (!i) throw IoError("cannot read checkpoint: " + path);
  char magic[4];
  i.read(magic, 4);
  if (!i || std::memcmp(magic, "GMCK", 4) != 0)
    throw CheckpointError("bad magic bytes");
  if (detail::get_u32(i) != kCheckpointVersion)
    throw CheckpointError("unsupported checkpoint version");
  const uint64_t token_hash = detail::get_u64(i);
  const uint64_t edge_hash = detail::get_u64(i);

  Checkpoint<Scalar> c;
  c.config.layers = static_cast<int>(detail::get_u32(i));
  c.config.heads = static_cast<int>(detail::get_u32(i));
  c.config.d_model = static_cast<int>(detail::get_u32(i));
  c.config.d_ff = static_cast<int>(detail::get_u32(i));
  c.config.gru_hidden = static_cast<int>(detail::get_u32(i));
  c.config.fusion = static_cast<Fusion>(detail::get_u32(i));
  c.config.edge_decoder = static_cast<EdgeDecoderKind>(detail::get_u32(i));
  c.config.max_decode_nodes = static_cast<int>(detail::get_u32(i));
  const int token_vocab = static_cast<int>(detail::get_u32(i));
  const int edge_vocab = static_cast<int>(detail::get_u32(i));

  c.tokens = detail::get_vocab(i);
  c.edges = detail::get_vocab(i);
  if (c.tokens.hash() != token_hash || c.edges.hash() != edge_hash)
    throw CheckpointError("vocabulary hash mismatch");
  if (c.tokens.size() != token_vocab || c.edges.size() != edge_vocab)
    throw CheckpointError("vocabulary size mismatch");
  c.epoch = static_cast<int>(detail::get_u32(i));
  c.dev_metric = detail::get_f64(i);

  c.params.config = c.config;
  c.params.token_vocab = token_vocab;
  c.params.edge_vocab = edge_vocab;
  const uint32_t blocks = detail::get_u32(i);
  if (blocks > (1u << 20)) throw CheckpointError("corrupt block count");
  for (uint32_t b = 0; b < blocks; ++b) {
    const std::string name = detail::get_str(i);
    const uint32_t width = detail::get_u32(i);
    if (width != sizeof(Scalar))
      throw CheckpointError("checkpoint scalar width mismatch");
    const uint32_t rows = detail::get_u32(i);
    const uint32_t cols = detail::get_u32(i);
    if (rows == 0 || cols == 0 || rows > (1u << 24) || cols > (1u << 24))
      throw CheckpointError("corrupt tensor shape");
    auto t = c.params.add(name, static_cast<int>(rows), static_cast<int>(cols));
    i.read(reinterpret_cast<char*>(t->v.data()),
           static_cast<std::streamsize>(t->v.size() * sizeof(Scalar)));
    if (!i) throw CheckpointError("truncated tensor block");
  }
  // Must be at EOF now.
  char extra;
  if (i.read(&extra, 1)) throw CheckpointError("trailing bytes in checkpoint");
  try {
    c.config.validate();
  } catch (const Error& e) {
    throw CheckpointError(std::string("corrupt config: ") + e.what());
  }
  return c;
}

// ---- fit ----

template <class Scalar>
struct FitOptions {
  std::vector<ModificationInstance> user_data;  // mixing-mode user set
  std::ostream* metrics_log = nullptr;  // one JSON object per epoch
};

template <class Scalar>
double dev_graph_accuracy(const std::vector<PreparedInstance>& dev,
                          const ModelParams<Scalar>& P, const Vocabulary& tokens,
                          const Vocabulary& edges) {
  if (dev.empty()) return 0;
  size_t hits = 0;
  for (const PreparedInstance& inst : dev) {
    try {
      const SceneGraph pred =
          generate(inst.source, inst.query_ids, P, tokens, edges);
      if (isomorphic(pred, inst.target, 16)) hits++;
    } catch (const DecodeOverflowError&) {
    }
  }
  return static_cast<double>(hits) / dev.size();
}

// Adam + gradient clipping over teacher-forced batches; returns the epoch
// checkpoint with the best dev graph accuracy. Deterministic given the seed.
template <class Scalar>
Checkpoint<Scalar> fit(const std::vector<ModificationInstance>& train_data,
                       const std::vector<ModificationInstance>& dev_data,
                       const ModelConfig& model_config,
                       const TrainConfig& train_config,
                       const FitOptions<Scalar>& options = {}) {
  train_config.validate();
  if (train_data.empty() || dev_data.empty())
    throw EmptySetError("fit: train and dev sets must be nonempty");
  if (train_config.mix && options.user_data.empty())
    throw EmptySetError("fit: mixing mode needs user data");

  // Vocabularies come from everything the model will ever be scored on here.
  std::vector<ModificationInstance> vocab_pool = train_data;
  vocab_pool.insert(vocab_pool.end(), options.user_data.begin(),
                    options.user_data.end());
  auto [tokens, edges] = build_vocabs(vocab_pool);

  std::vector<PreparedInstance> train, dev, user;
  for (const auto& m : train_data) train.push_back(prepare_instance(m, tokens, edges));
  for (const auto& m : dev_data) dev.push_back(prepare_instance(m, tokens, edges));
  for (const auto& m : options.user_data)
    user.push_back(prepare_instance(m, tokens, edges));

  Rng rng = Rng::substream(train_config.seed, 0x11117);
  ModelParams<Scalar> P =
      ModelParams<Scalar>::init(model_config, tokens.size(), edges.size(), rng);
  const std::vector<Tensor<Scalar>> leaves = P.all();
  Adam<Scalar> opt(leaves, train_config.lr);

  Checkpoint<Scalar> best;
  best.config = model_config;
  best.tokens = tokens;
  best.edges = edges;
  double best_acc = -1;  // first epoch always snapshots (accuracy >= 0)

  for (int epoch = 0; epoch < train_config.epochs; ++epoch) {
    // Assemble this epoch's batches as (from_user, index) pairs.
    std::vector<std::vector<std::pair<bool, size_t>>> batches;
    if (train_config.mix) {
      for (MixedBatch& b :
           mixed_batches(train.size(), user.size(), train_config.batch_size, rng))
        batches.push_back(std::move(b.items));
    } else {
      std::vector<size_t> order(train.size());
      std::iota(order.begin(), order.end(), 0);
      rng.shuffle(order);
      for (size_t at = 0; at < order.size();
           at += static_cast<size_t>(train_config.batch_size)) {
        std::vector<std::pair<bool, size_t>> b;
        for (size_t k = at;
             k < std::min(at + train_config.batch_size, order.size()); ++k)
          b.push_back({false, order[k]});
        batches.push_back(std::move(b));
      }
    }

    double epoch_loss = 0, epoch_node = 0, epoch_edge = 0;
    size_t seen = 0;
    for (const auto& batch : batches) {
      zero_grad(leaves);
      for (const auto& [from_user, idx] : batch) {
        const PreparedInstance& inst = from_user ? user[idx] : train[idx];
        LossParts parts;
        Tensor<Scalar> loss = instance_loss(inst, P, tokens, edges, &parts);
        Tensor<Scalar> scaled = scale(loss, 1.0 / batch.size());
        backward(scaled);
        detach_graph(scaled);
        epoch_loss += parts.total();
        epoch_node += parts.node;
        epoch_edge += parts.edge;
        seen++;
        if (!std::isfinite(parts.total()))
          throw DivergenceError("non-finite loss at epoch " +
                                std::to_string(epoch));
      }
      clip_global_norm(leaves, train_config.clip_norm);
      opt.step(leaves);
    }

    const double acc = dev_graph_accuracy(dev, P, tokens, edges);
    if (options.metrics_log) {
      *options.metrics_log << "{\"epoch\": " << epoch
                           << ", \"loss\": " << epoch_loss / seen
                           << ", \"node_loss\": " << epoch_node / seen
                           << ", \"edge_loss\": " << epoch_edge / seen
                           << ", \"dev_graph_acc\": " << acc << "}\n";
    }
    if (acc > best_acc) {
      best_acc = acc;
      best.epoch = epoch;
      best.dev_metric = acc;
      // Deep-copy the current parameter values.
      best.params = ModelParams<Scalar>();
      best.params.config = P.config;
      best.params.token_vocab = P.token_vocab;
      best.params.edge_vocab = P.edge_vocab;
      for (const std::string& name : P.names) {
        const auto& src = P.by_name.at(name);
        auto dst = best.params.add(name, src->rows, src->cols);
        dst->v = src->v;
      }
    }
    if (train_config.early_stop_acc >= 0 && acc >= train_config.early_stop_acc)
      break;
  }
  return best;
}

}  // namespace gmod
