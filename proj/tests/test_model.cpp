#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "gmod/model.hpp"
#include "gmod/rng.hpp"

using namespace gmod;

namespace {

// nodes [boy, shirt, black]; boy -in-> shirt -attribute-> black
SceneGraph boy_graph() {
  return SceneGraph({"boy", "shirt", "black"},
                    {{0, 1, "in"}, {1, 2, "attribute"}});
}

Vocabulary demo_tokens() {
  return Vocabulary::build(
      {"boy", "shirt", "black", "man", "remove", "the", "a", "b", "c"}, 1);
}

Vocabulary demo_edges() {
  return Vocabulary::build({"in", "attribute", "rel"}, 1, /*with_null=*/true);
}

template <class S>
ModelParams<S> demo_params(const ModelConfig& cfg, const Vocabulary& tokens,
                           const Vocabulary& edges, uint64_t seed = 7) {
  Rng rng(seed);
  return ModelParams<S>::init(cfg, tokens.size(), edges.size(), rng);
}

ModelConfig tiny_config() {
  ModelConfig cfg;
  cfg.layers = 1;
  cfg.heads = 2;
  cfg.d_model = 8;
  cfg.d_ff = 16;
  cfg.gru_hidden = 8;
  return cfg;
}

template <class S>
std::vector<S> row_of(const Tensor<S>& t, int r) {
  std::vector<S> out;
  for (int c = 0; c < t->cols; ++c) out.push_back(t->at(r, c));
  return out;
}

template <class S>
Tensor<S> const_hidden(int h, S base) {
  auto t = make_tensor<S>(1, h);
  for (int c = 0; c < h; ++c) t->v[c] = base + S(0.01) * c;
  return t;
}

}  // namespace

TEST_CASE("embedding of an isolated node is its label row") {
  auto tokens = demo_tokens();
  auto edges = demo_edges();
  auto P = demo_params<double>(tiny_config(), tokens, edges);
  SceneGraph g({"boy"}, {});
  auto x = edge_aware_embeddings(g, P, tokens, edges);
  REQUIRE(x->rows == 1);
  const auto& table = P.at("embed.token");
  for (int c = 0; c < x->cols; ++c)
    CHECK(x->at(0, c) == doctest::Approx(table->at(tokens.id("boy"), c)));
}

TEST_CASE("embedding adds incident edge labels from both directions") {
  auto tokens = demo_tokens();
  auto edges = demo_edges();
  auto P = demo_params<double>(tiny_config(), tokens, edges);
  auto x = edge_aware_embeddings(boy_graph(), P, tokens, edges);
  const auto& tn = P.at("embed.token");
  const auto& te = P.at("embed.edge");
  const int in_id = edges.id("in"), at_id = edges.id("attribute");
  for (int c = 0; c < x->cols; ++c) {
    // boy: outgoing "in" only
    CHECK(x->at(0, c) ==
          doctest::Approx(tn->at(tokens.id("boy"), c) + te->at(in_id, c)));
    // shirt: incoming "in" + outgoing "attribute"
    CHECK(x->at(1, c) == doctest::Approx(tn->at(tokens.id("shirt"), c) +
                                         te->at(in_id, c) + te->at(at_id, c)));
    // black: incoming "attribute" only
    CHECK(x->at(2, c) ==
          doctest::Approx(tn->at(tokens.id("black"), c) + te->at(at_id, c)));
  }
}

TEST_CASE("parallel edges with one label are summed with multiplicity") {
  auto tokens = demo_tokens();
  auto edges = demo_edges();
  auto P = demo_params<double>(tiny_config(), tokens, edges);
  SceneGraph g({"a", "b", "c"}, {{0, 1, "attribute"}, {0, 2, "attribute"}});
  auto x = edge_aware_embeddings(g, P, tokens, edges);
  const auto& tn = P.at("embed.token");
  const auto& te = P.at("embed.edge");
  for (int c = 0; c < x->cols; ++c)
    CHECK(x->at(0, c) == doctest::Approx(tn->at(tokens.id("a"), c) +
                                         2 * te->at(edges.id("attribute"), c)));
}

TEST_CASE("embedding rejects the empty graph") {
  auto tokens = demo_tokens();
  auto edges = demo_edges();
  auto P = demo_params<double>(tiny_config(), tokens, edges);
  CHECK_THROWS_AS(edge_aware_embeddings(SceneGraph(), P, tokens, edges),
                  EmptyGraphError);
}

TEST_CASE("concat mask: sparse graph block, full query block, no crossing") {
  // chain a -> b -> c; nodes 0 and 2 are not neighbors
  SceneGraph g({"a", "b", "c"}, {{0, 1, "rel"}, {1, 2, "rel"}});
  Mask m = attention_mask(g, 2, Fusion::Concat);
  REQUIRE(m.rows == 5);
  REQUIRE(m.cols == 5);
  CHECK(m.at(0, 0));
  CHECK(m.at(0, 1));
  CHECK_FALSE(m.at(0, 2));  // second-order neighbor is out of reach
  CHECK(m.at(1, 0));
  CHECK(m.at(1, 2));
  CHECK(m.at(2, 1));
  CHECK_FALSE(m.at(2, 0));
  for (int a = 3; a < 5; ++a)
    for (int b = 3; b < 5; ++b) CHECK(m.at(a, b));
  for (int i = 0; i < 3; ++i)
    for (int q = 3; q < 5; ++q) {
      CHECK_FALSE(m.at(i, q));
      CHECK_FALSE(m.at(q, i));
    }
}

TEST_CASE("cross mask adds graph->query and query->everything") {
  SceneGraph g({"a", "b", "c"}, {{0, 1, "rel"}, {1, 2, "rel"}});
  Mask m = attention_mask(g, 2, Fusion::Cross);
  // graph block still sparse
  CHECK_FALSE(m.at(0, 2));
  CHECK_FALSE(m.at(2, 0));
  // graph rows now see every query column
  for (int i = 0; i < 3; ++i)
    for (int q = 3; q < 5; ++q) CHECK(m.at(i, q));
  // query rows see all columns
  for (int q = 3; q < 5; ++q)
    for (int b = 0; b < 5; ++b) CHECK(m.at(q, b));
}

TEST_CASE("gating mask wires CLS rows and keeps blocks apart") {
  SceneGraph g({"a", "b", "c"}, {{0, 1, "rel"}, {1, 2, "rel"}});
  const int n = 3, cls_g = 3, cls_q = 4, q0 = 5;
  Mask m = attention_mask(g, 2, Fusion::Gating);
  REQUIRE(m.rows == n + 2 + 2);
  CHECK(m.at(cls_g, cls_g));
  for (int i = 0; i < n; ++i) {
    CHECK(m.at(cls_g, i));
    CHECK(m.at(i, cls_g));
    CHECK_FALSE(m.at(i, cls_q));  // graph nodes never see the query side
    for (int q = q0; q < q0 + 2; ++q) {
      CHECK_FALSE(m.at(i, q));
      CHECK_FALSE(m.at(q, i));
    }
  }
  // CLS-query belongs to the fully connected query block
  for (int a = cls_q; a < q0 + 2; ++a)
    for (int b = cls_q; b < q0 + 2; ++b) CHECK(m.at(a, b));
  CHECK_FALSE(m.at(cls_g, cls_q));
  CHECK_FALSE(m.at(cls_q, cls_g));
}

TEST_CASE("every mask row has at least one reachable column") {
  Rng rng(31);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 1 + static_cast<int>(rng.below(5));
    std::vector<std::string> labels(n, "x");
    std::vector<Edge> es;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        if (rng.real01() < 0.4) es.push_back({i, j, "rel"});
    SceneGraph g(std::move(labels), std::move(es));
    const int T = 1 + static_cast<int>(rng.below(4));
    for (Fusion f : {Fusion::Concat, Fusion::Gating, Fusion::Cross}) {
      Mask m = attention_mask(g, T, f);
      for (int r = 0; r < m.rows; ++r) {
        bool any = false;
        for (int c = 0; c < m.cols; ++c) any = any || m.at(r, c);
        CHECK(any);
      }
    }
  }
}

TEST_CASE("sinusoidal positions follow the sin/cos interleave") {
  auto pos = sinusoidal_positions(3, 4);
  CHECK(pos[0] == doctest::Approx(0.0));         // sin(0)
  CHECK(pos[1] == doctest::Approx(1.0));         // cos(0)
  CHECK(pos[4 + 0] == doctest::Approx(std::sin(1.0)));
  CHECK(pos[4 + 1] == doctest::Approx(std::cos(1.0)));
  CHECK(pos[4 + 2] == doctest::Approx(std::sin(1.0 / 100.0)));
  CHECK(pos[4 + 3] == doctest::Approx(std::cos(1.0 / 100.0)));
  CHECK(pos[2 * 4 + 0] == doctest::Approx(std::sin(2.0)));
}

TEST_CASE("encode row counts per fusion") {
  auto tokens = demo_tokens();
  auto edges = demo_edges();
  const std::vector<int> query = tokens.encode("remove the black shirt");
  for (Fusion f : {Fusion::Concat, Fusion::Cross, Fusion::Gating}) {
    ModelConfig cfg = tiny_config();
    cfg.fusion = f;
    auto P = demo_params<double>(cfg, tokens, edges);
    auto enc = encode(boy_graph(), query, P, tokens, edges);
    CHECK(enc.n_nodes == 3);
    CHECK(enc.n_query == 4);
    if (f == Fusion::Gating) {
      CHECK(enc.memory->rows == 3 + 4 + 2);
      REQUIRE(enc.cls_graph);
      REQUIRE(enc.cls_query);
      CHECK(enc.cls_graph->rows == 1);
    } else {
      CHECK(enc.memory->rows == 3 + 4);
      CHECK_FALSE(enc.cls_graph);
    }
    CHECK(enc.memory->cols == cfg.d_model);
  }
}

TEST_CASE("encode requires a nonempty query") {
  auto tokens = demo_tokens();
  auto edges = demo_edges();
  auto P = demo_params<double>(tiny_config(), tokens, edges);
  CHECK_THROWS_AS(encode(boy_graph(), {}, P, tokens, edges), ShapeError);
}

TEST_CASE("encoder is equivariant to graph node order") {
  auto tokens = demo_tokens();
  auto edges = demo_edges();
  ModelConfig cfg = tiny_config();
  cfg.fusion = Fusion::Cross;
  auto P = demo_params<double>(cfg, tokens, edges);
  const std::vector<int> query = tokens.encode("remove a");

  SceneGraph g1({"a", "b", "c"}, {{0, 1, "rel"}, {0, 2, "in"}});
  // same graph with nodes listed as [c, a, b]
  SceneGraph g2({"c", "a", "b"}, {{1, 2, "rel"}, {1, 0, "in"}});
  auto e1 = encode(g1, query, P, tokens, edges);
  auto e2 = encode(g2, query, P, tokens, edges);
  const int perm[3] = {1, 2, 0};  // row i of g1 sits at perm[i] in g2
  for (int i = 0; i < 3; ++i) {
    auto r1 = row_of(e1.memory, i);
    auto r2 = row_of(e2.memory, perm[i]);
    for (size_t c = 0; c < r1.size(); ++c)
      CHECK(r1[c] == doctest::Approx(r2[c]).epsilon(1e-9));
  }
  // query rows line up unchanged
  for (int q = 3; q < e1.memory->rows; ++q) {
    auto r1 = row_of(e1.memory, q);
    auto r2 = row_of(e2.memory, q);
    for (size_t c = 0; c < r1.size(); ++c)
      CHECK(r1[c] == doctest::Approx(r2[c]).epsilon(1e-9));
  }
}

TEST_CASE("zeroed gate parameters pass exactly half of each row") {
  auto tokens = demo_tokens();
  auto edges = demo_edges();
  ModelConfig cfg = tiny_config();
  cfg.fusion = Fusion::Gating;
  auto P = demo_params<double>(cfg, tokens, edges);
  for (const char* side : {"graph", "query"}) {
    for (const char* leaf : {".w1", ".b1", ".w2", ".b2"}) {
      auto t = P.at(std::string("gate.") + side + leaf);
      std::fill(t->v.begin(), t->v.end(), 0.0);
    }
  }
  Rng rng(5);
  auto a = make_tensor<double>(3, cfg.d_model);
  auto q = make_tensor<double>(2, cfg.d_model);
  auto cg = make_tensor<double>(1, cfg.d_model);
  auto cq = make_tensor<double>(1, cfg.d_model);
  for (auto* t : {&a, &q, &cg, &cq})
    for (auto& x : (*t)->v) x = rng.uniform(-1, 1);
  auto [ga, gq] = fuse_gating(a, q, cg, cq, P);
  for (size_t i = 0; i < ga->v.size(); ++i)
    CHECK(ga->v[i] == doctest::Approx(0.5 * a->v[i]));
  for (size_t i = 0; i < gq->v.size(); ++i)
    CHECK(gq->v[i] == doctest::Approx(0.5 * q->v[i]));
}

TEST_CASE("gating contracts rows towards zero") {
  auto tokens = demo_tokens();
  auto edges = demo_edges();
  ModelConfig cfg = tiny_config();
  cfg.fusion = Fusion::Gating;
  auto P = demo_params<double>(cfg, tokens, edges, /*seed=*/11);
  Rng rng(6);
  auto a = make_tensor<double>(4, cfg.d_model);
  auto q = make_tensor<double>(3, cfg.d_model);
  auto cg = make_tensor<double>(1, cfg.d_model);
  auto cq = make_tensor<double>(1, cfg.d_model);
  for (auto* t : {&a, &q, &cg, &cq})
    for (auto& x : (*t)->v) x = rng.uniform(-1, 1);
  auto [ga, gq] = fuse_gating(a, q, cg, cq, P);
  for (size_t i = 0; i < ga->v.size(); ++i) {
    CHECK(std::abs(ga->v[i]) <= std::abs(a->v[i]));  // gate in (0, 1)
    if (a->v[i] != 0) CHECK(std::abs(ga->v[i]) > 0);
  }
  for (size_t i = 0; i < gq->v.size(); ++i)
    CHECK(std::abs(gq->v[i]) <= std::abs(q->v[i]));
}

TEST_CASE("teacher-forced node decode scores gold steps plus EOS") {
  auto tokens = demo_tokens();
  auto edges = demo_edges();
  auto P = demo_params<double>(tiny_config(), tokens, edges);
  auto enc = encode(boy_graph(), tokens.encode("remove black"), P, tokens, edges);
  const std::vector<int> gold = {tokens.id("boy"), tokens.id("shirt")};
  auto dec = decode_nodes_teacher(enc.memory, P, gold);
  CHECK(dec.logits->rows == 3);  // two nodes, then the EOS step
  CHECK(dec.logits->cols == tokens.size());
  CHECK(dec.hiddens.size() == 2);  // EOS step keeps no node hidden
  REQUIRE(dec.final_hidden);
  CHECK(dec.final_hidden->cols == tiny_config().gru_hidden);
}

TEST_CASE("greedy node decode truncates at the node budget") {
  auto tokens = demo_tokens();
  auto edges = demo_edges();
  auto P = demo_params<double>(tiny_config(), tokens, edges, /*seed=*/3);
  auto enc = encode(boy_graph(), tokens.encode("remove black"), P, tokens, edges);
  auto dec = decode_nodes_greedy(enc.memory, P, /*max_nodes=*/2);
  CHECK(dec.emitted.size() <= 2);
  CHECK(dec.hiddens.size() == dec.emitted.size());
  for (int id : dec.emitted) {
    CHECK(id != kPadId);
    CHECK(id != kBosId);
    CHECK(id != kClsId);
    CHECK(id != kEosId);
  }
  const int steps = static_cast<int>(dec.emitted.size()) + (dec.hit_eos ? 1 : 0);
  CHECK(dec.logits->rows == steps);
}

TEST_CASE("lower-triangle cell order") {
  CHECK(lower_triangle_cells(1).empty());
  auto cells = lower_triangle_cells(4);
  REQUIRE(cells.size() == 6);
  CHECK(cells[0] == std::pair<int, int>{1, 0});
  CHECK(cells[1] == std::pair<int, int>{2, 0});
  CHECK(cells[2] == std::pair<int, int>{2, 1});
  CHECK(cells[5] == std::pair<int, int>{3, 2});
}

TEST_CASE("edge decode emits one distribution per lower-triangle cell") {
  auto tokens = demo_tokens();
  auto edges = demo_edges();
  ModelConfig cfg = tiny_config();
  for (EdgeDecoderKind kind : {EdgeDecoderKind::Adjacency, EdgeDecoderKind::Flat}) {
    cfg.edge_decoder = kind;
    auto P = demo_params<double>(cfg, tokens, edges);
    std::vector<Tensor<double>> hiddens;
    for (int i = 0; i < 4; ++i)
      hiddens.push_back(const_hidden<double>(cfg.gru_hidden, 0.1 * i));
    auto fin = const_hidden<double>(cfg.gru_hidden, -0.3);
    auto enc = encode(boy_graph(), tokens.encode("remove black"), P, tokens, edges);

    // greedy mode: no gold cells
    auto dec = decode_edges<double>(hiddens, fin, enc.memory, P, kind, nullptr);
    CHECK(dec.logits->rows == 6);
    CHECK(dec.logits->cols == edges.size());
    CHECK(dec.emitted.size() == 6);
    for (int id : dec.emitted) CHECK(id >= kNullEdgeId);

    // single node: no cells at all
    std::vector<Tensor<double>> one = {hiddens[0]};
    auto none = decode_edges<double>(one, fin, enc.memory, P, kind, nullptr);
    CHECK(none.logits == nullptr);
    CHECK(none.emitted.empty());
  }
}

TEST_CASE("adjacency rows are independent; flat threads state across rows") {
  auto tokens = demo_tokens();
  auto edges = demo_edges();
  ModelConfig cfg = tiny_config();
  cfg.edge_decoder = EdgeDecoderKind::Adjacency;
  auto P = demo_params<double>(cfg, tokens, edges, /*seed=*/9);
  std::vector<Tensor<double>> hiddens;
  for (int i = 0; i < 4; ++i)
    hiddens.push_back(const_hidden<double>(cfg.gru_hidden, 0.2 * i - 0.3));
  auto fin = const_hidden<double>(cfg.gru_hidden, 0.4);
  auto enc = encode(boy_graph(), tokens.encode("remove black"), P, tokens, edges);

  // cells: (1,0) (2,0) (2,1) (3,0) (3,1) (3,2); flip the gold class of (2,0)
  std::vector<int> gold = {kNullEdgeId, kNullEdgeId, kNullEdgeId,
                           kNullEdgeId, kNullEdgeId, kNullEdgeId};
  std::vector<int> bent = gold;
  bent[1] = edges.id("rel");

  for (EdgeDecoderKind kind : {EdgeDecoderKind::Adjacency, EdgeDecoderKind::Flat}) {
    auto a = decode_edges(hiddens, fin, enc.memory, P, kind, &gold);
    auto b = decode_edges(hiddens, fin, enc.memory, P, kind, &bent);
    // (1,0) precedes the flip and never moves
    for (int c = 0; c < a.logits->cols; ++c)
      CHECK(a.logits->at(0, c) == doctest::Approx(b.logits->at(0, c)));
    // (2,1) follows the flip within the same row and must move in both modes
    bool same_row_moved = false;
    for (int c = 0; c < a.logits->cols; ++c)
      same_row_moved |= std::abs(a.logits->at(2, c) - b.logits->at(2, c)) > 1e-12;
    CHECK(same_row_moved);
    // row 3 cells: untouched under adjacency, perturbed under flat
    bool row3_moved = false;
    for (int r = 3; r < 6; ++r)
      for (int c = 0; c < a.logits->cols; ++c)
        row3_moved |= std::abs(a.logits->at(r, c) - b.logits->at(r, c)) > 1e-12;
    if (kind == EdgeDecoderKind::Adjacency)
      CHECK_FALSE(row3_moved);
    else
      CHECK(row3_moved);
  }
}

TEST_CASE("flat and adjacency agree on a single cell given the same start") {
  auto tokens = demo_tokens();
  auto edges = demo_edges();
  ModelConfig cfg = tiny_config();
  cfg.edge_decoder = EdgeDecoderKind::Adjacency;
  auto P = demo_params<double>(cfg, tokens, edges, /*seed=*/13);
  std::vector<Tensor<double>> hiddens = {
      const_hidden<double>(cfg.gru_hidden, 0.1),
      const_hidden<double>(cfg.gru_hidden, -0.2)};
  auto enc = encode(boy_graph(), tokens.encode("remove black"), P, tokens, edges);

  auto adj = decode_edges<double>(hiddens, hiddens[0], enc.memory, P,
                                  EdgeDecoderKind::Adjacency, nullptr);
  // Hand the flat decoder the adjacency decoder's row-1 initial state.
  auto seeded = detail::affine(hiddens[1], P.at("dec.edge.rowinit.w"),
                               P.at("dec.edge.rowinit.b"));
  auto flat = decode_edges<double>(hiddens, seeded, enc.memory, P,
                                   EdgeDecoderKind::Flat, nullptr);
  REQUIRE(adj.logits->rows == 1);
  REQUIRE(flat.logits->rows == 1);
  for (int c = 0; c < adj.logits->cols; ++c)
    CHECK(adj.logits->at(0, c) == doctest::Approx(flat.logits->at(0, c)));
}

TEST_CASE("gold cell count is validated") {
  auto tokens = demo_tokens();
  auto edges = demo_edges();
  auto P = demo_params<double>(tiny_config(), tokens, edges);
  std::vector<Tensor<double>> hiddens = {const_hidden<double>(8, 0.1),
                                         const_hidden<double>(8, 0.2)};
  auto enc = encode(boy_graph(), tokens.encode("remove black"), P, tokens, edges);
  std::vector<int> too_many = {kNullEdgeId, kNullEdgeId};
  CHECK_THROWS_AS(decode_edges(hiddens, hiddens[0], enc.memory, P,
                               EdgeDecoderKind::Flat, &too_many),
                  ShapeError);
}

TEST_CASE("generated graphs are always DAGs with in-vocabulary labels") {
  auto tokens = demo_tokens();
  auto edges = demo_edges();
  for (uint64_t seed : {1ull, 2ull, 3ull, 4ull, 5ull, 6ull, 7ull, 8ull}) {
    ModelConfig cfg = tiny_config();
    cfg.fusion = seed % 2 ? Fusion::Cross : Fusion::Gating;
    cfg.edge_decoder =
        seed % 3 ? EdgeDecoderKind::Flat : EdgeDecoderKind::Adjacency;
    cfg.max_decode_nodes = 5;
    auto P = demo_params<float>(cfg, tokens, edges, seed);
    try {
      SceneGraph out = generate(boy_graph(), tokens.encode("remove black"), P,
                                tokens, edges);
      CHECK(out.node_count() >= 1);
      CHECK(out.node_count() <= 5);
      CHECK_NOTHROW(topological_order(out));  // DAG by construction
      for (const Edge& e : out.edges()) CHECK(e.src < e.dst);
    } catch (const DecodeOverflowError&) {
      // an untrained model may refuse to emit any node; that is legal
    }
  }
}

TEST_CASE("generation is deterministic") {
  auto tokens = demo_tokens();
  auto edges = demo_edges();
  ModelConfig cfg = tiny_config();
  cfg.max_decode_nodes = 5;
  auto P = demo_params<float>(cfg, tokens, edges, 21);
  const std::vector<int> q = tokens.encode("remove black");
  try {
    SceneGraph a = generate(boy_graph(), q, P, tokens, edges);
    SceneGraph b = generate(boy_graph(), q, P, tokens, edges);
    CHECK(a == b);
  } catch (const DecodeOverflowError&) {
    CHECK_THROWS_AS(generate(boy_graph(), q, P, tokens, edges),
                    DecodeOverflowError);
  }
}

TEST_CASE("parameter registry is deterministic and checkpoint-ordered") {
  auto tokens = demo_tokens();
  auto edges = demo_edges();
  ModelConfig cfg = tiny_config();
  auto a = demo_params<double>(cfg, tokens, edges, 17);
  auto b = demo_params<double>(cfg, tokens, edges, 17);
  REQUIRE(a.names == b.names);
  for (const auto& name : a.names) {
    const auto& ta = a.at(name);
    const auto& tb = b.at(name);
    REQUIRE(ta->v.size() == tb->v.size());
    for (size_t i = 0; i < ta->v.size(); ++i) CHECK(ta->v[i] == tb->v[i]);
  }
  // gating adds its fusion parameters, nothing else changes
  ModelConfig gate_cfg = cfg;
  gate_cfg.fusion = Fusion::Gating;
  auto c = demo_params<double>(gate_cfg, tokens, edges, 17);
  CHECK(c.names.size() == a.names.size() + 8);
  // adjacency trades nothing away but gains its row-init map
  ModelConfig adj_cfg = cfg;
  adj_cfg.edge_decoder = EdgeDecoderKind::Adjacency;
  auto d = demo_params<double>(adj_cfg, tokens, edges, 17);
  CHECK(d.names.size() == a.names.size() + 2);
}

TEST_CASE("fusion and edge-decoder names round-trip") {
  for (Fusion f : {Fusion::Concat, Fusion::Gating, Fusion::Cross})
    CHECK(fusion_from_name(fusion_name(f)) == f);
  for (EdgeDecoderKind k : {EdgeDecoderKind::Adjacency, EdgeDecoderKind::Flat})
    CHECK(edge_decoder_from_name(edge_decoder_name(k)) == k);
  CHECK_THROWS_AS(fusion_from_name("dual"), ConfigError);
  CHECK_THROWS_AS(edge_decoder_from_name("matrix"), ConfigError);
}
