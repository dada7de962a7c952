// Command-line front end: generate / train / eval / infer.
//
// Exit codes: 0 success, 1 runtime failure (library errors), 2 usage error.

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>

#include "gmod/datagen.hpp"
#include "gmod/dataset_io.hpp"
#include "gmod/eval.hpp"
#include "gmod/training.hpp"

namespace fs = std::filesystem;
using namespace gmod;

namespace {

struct GenerateArgs {
  std::string graphs_file;    // base graphs JSONL; empty = built-in sampler
  int synth_graphs = 0;       // 0 = sized automatically from the splits
  std::string out = "dataset";
  int train = 200, dev = 50, test = 50;
  bool multi = false;
  double mean_ops = 0;        // 0 = keep terminate_weight as given
  double terminate_weight = 1.0;
  double tau = 1.0;
  uint64_t seed = 0;
  int jobs = 1;
  std::string templates_file, similarity_file;
};

struct TrainArgs {
  std::string data;
  std::string config_file;
  std::string out = "model.ckpt";
  std::string fusion, edge_decoder;  // empty = config/default
  std::string mix_dir;
  uint64_t seed = 0;
  bool seed_set = false;
};

struct EvalArgs {
  std::string checkpoint;
  std::string data;
  bool bins = false;
  bool baseline_copy_source = false;
  int jobs = 1;
};

struct InferArgs {
  std::string checkpoint;
  std::string source;
  std::string query;
};

// Flat key=value settings mirroring the ModelConfig/TrainConfig field names.
// '#' starts a comment; unknown keys are rejected.
std::map<std::string, std::string> read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file: " + path);
  std::map<std::string, std::string> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    lineno++;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const size_t a = line.find_first_not_of(" \t\r");
    if (a == std::string::npos) continue;
    const size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path + ":" + std::to_string(lineno) +
                        ": expected key=value");
    auto trim = [](std::string s) {
      const size_t b = s.find_first_not_of(" \t\r");
      const size_t e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw ConfigError(path + ":" + std::to_string(lineno) +
                        ": expected key=value");
    out[key] = value;
  }
  return out;
}

int to_int(const std::string& key, const std::string& value) {
  try {
    size_t used = 0;
    const int x = std::stoi(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("config key " + key + ": not an integer: " + value);
  }
}

double to_double(const std::string& key, const std::string& value) {
  try {
    size_t used = 0;
    const double x = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("config key " + key + ": not a number: " + value);
  }
}

bool to_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw ConfigError("config key " + key + ": not a boolean: " + value);
}

void apply_config(const std::map<std::string, std::string>& kv,
                  ModelConfig& mc, TrainConfig& tc) {
  for (const auto& [key, value] : kv) {
    if (key == "layers") mc.layers = to_int(key, value);
    else if (key == "heads") mc.heads = to_int(key, value);
    else if (key == "d_model") mc.d_model = to_int(key, value);
    else if (key == "d_ff") mc.d_ff = to_int(key, value);
    else if (key == "gru_hidden") mc.gru_hidden = to_int(key, value);
    else if (key == "max_decode_nodes") mc.max_decode_nodes = to_int(key, value);
    else if (key == "fusion") mc.fusion = fusion_from_name(value);
    else if (key == "edge_decoder") mc.edge_decoder = edge_decoder_from_name(value);
    else if (key == "batch_size") tc.batch_size = to_int(key, value);
    else if (key == "epochs") tc.epochs = to_int(key, value);
    else if (key == "lr") tc.lr = to_double(key, value);
    else if (key == "clip_norm") tc.clip_norm = to_double(key, value);
    else if (key == "seed") tc.seed = static_cast<uint64_t>(to_int(key, value));
    else if (key == "mix") tc.mix = to_bool(key, value);
    else if (key == "early_stop_acc") tc.early_stop_acc = to_double(key, value);
    else throw ConfigError("unknown config key: " + key);
  }
}

std::vector<ModificationInstance> load_split(const std::string& dir,
                                             const char* name) {
  return load_instances((fs::path(dir) / name).string());
}

int run_generate(const GenerateArgs& args) {
  const TemplateSet templates = args.templates_file.empty()
                                    ? TemplateSet::builtin()
                                    : TemplateSet::load(args.templates_file);
  const SimilarityTable sim = args.similarity_file.empty()
                                  ? builtin_similarity()
                                  : SimilarityTable::load(args.similarity_file);

  const int total = args.train + args.dev + args.test;
  if (total <= 0) throw ConfigError("nothing to generate: all splits are 0");
  std::vector<SceneGraph> graphs;
  if (!args.graphs_file.empty()) {
    graphs = load_graphs(args.graphs_file);
  } else {
    const int count = args.synth_graphs > 0 ? args.synth_graphs : 4 * total;
    graphs = sample_base_graphs(count, args.seed);
  }

  GenConfig cfg;
  cfg.seed = args.seed;
  cfg.tau = args.tau;
  cfg.terminate_weight = args.terminate_weight;
  if (args.multi && args.mean_ops > 0)
    cfg.terminate_weight = calibrate_terminate_weight(
        args.mean_ops, graphs, templates, sim, args.tau, args.seed);

  DatasetSplits splits =
      generate_dataset(graphs, cfg, templates, sim,
                       {args.train, args.dev, args.test}, args.multi, args.jobs);

  fs::create_directories(args.out);
  save_instances(splits.train, (fs::path(args.out) / "train.jsonl").string());
  save_instances(splits.dev, (fs::path(args.out) / "dev.jsonl").string());
  save_instances(splits.test, (fs::path(args.out) / "test.jsonl").string());
  auto [tokens, edges] = build_vocabs(splits.train);
  tokens.save((fs::path(args.out) / "tokens.vocab").string());
  edges.save((fs::path(args.out) / "edges.vocab").string());

  nlohmann::json summary;
  summary["out"] = args.out;
  summary["train"] = splits.train.size();
  summary["dev"] = splits.dev.size();
  summary["test"] = splits.test.size();
  summary["multi"] = args.multi;
  summary["terminate_weight"] = cfg.terminate_weight;
  if (args.multi)
    summary["mean_ops"] = mean_ops(graphs, cfg, templates, sim, 2000);
  std::cout << summary.dump() << "\n";
  return 0;
}

int run_train(const TrainArgs& args) {
  ModelConfig mc;
  TrainConfig tc;
  if (!args.config_file.empty())
    apply_config(read_config_file(args.config_file), mc, tc);
  if (!args.fusion.empty()) mc.fusion = fusion_from_name(args.fusion);
  if (!args.edge_decoder.empty())
    mc.edge_decoder = edge_decoder_from_name(args.edge_decoder);
  if (args.seed_set) tc.seed = args.seed;
  if (!args.mix_dir.empty()) tc.mix = true;

  const auto train_data = load_split(args.data, "train.jsonl");
  const auto dev_data = load_split(args.data, "dev.jsonl");
  FitOptions<float> options;
  if (tc.mix) {
    if (args.mix_dir.empty())
      throw ConfigError("mix=true needs --mix USER_DIR");
    const fs::path p(args.mix_dir);
    options.user_data = p.extension() == ".jsonl"
                            ? load_instances(p.string())
                            : load_split(args.mix_dir, "train.jsonl");
  }

  std::ofstream metrics(args.out + ".metrics.jsonl");
  if (!metrics) throw IoError("cannot write metrics log: " + args.out +
                              ".metrics.jsonl");
  options.metrics_log = &metrics;

  Checkpoint<float> best = fit<float>(train_data, dev_data, mc, tc, options);
  save_checkpoint(best, args.out);

  nlohmann::json summary;
  summary["checkpoint"] = args.out;
  summary["best_epoch"] = best.epoch;
  summary["dev_graph_accuracy"] = best.dev_metric;
  summary["fusion"] = fusion_name(best.config.fusion);
  summary["edge_decoder"] = edge_decoder_name(best.config.edge_decoder);
  std::cout << summary.dump() << "\n";
  return 0;
}

int run_eval(const EvalArgs& args) {
  const auto data = load_instances(args.data);
  MetricsReport report;
  if (args.baseline_copy_source) {
    report = copy_source(data, args.bins);
  } else {
    if (args.checkpoint.empty())
      throw ConfigError("eval needs --checkpoint (or --copy-source)");
    auto ckpt = load_checkpoint<float>(args.checkpoint);
    // A dataset directory generated by this tool carries its vocabulary;
    // refuse to score a checkpoint built over a different one.
    const fs::path dir = fs::path(args.data).parent_path();
    const fs::path tok = dir / "tokens.vocab", edg = dir / "edges.vocab";
    if (fs::exists(tok) && fs::exists(edg)) {
      require_vocab_match(ckpt.tokens, Vocabulary::load(tok.string()),
                          "dataset token vocabulary");
      require_vocab_match(ckpt.edges, Vocabulary::load(edg.string()),
                          "dataset edge vocabulary");
    }
    report = evaluate(ckpt, data, args.bins, args.jobs);
  }
  std::cout << report_to_json(report) << "\n";
  return 0;
}

int run_infer(const InferArgs& args) {
  auto ckpt = load_checkpoint<float>(args.checkpoint);
  const auto graphs = load_graphs(args.source);
  if (graphs.empty()) throw IoError("no graph record in " + args.source);
  const SceneGraph pred =
      generate(graphs.front(), ckpt.tokens.encode(args.query), ckpt.params,
               ckpt.tokens, ckpt.edges);
  std::cout << graph_to_json(pred) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Scene-graph modification: data generation, training, "
               "evaluation and inference"};
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* g = app.add_subcommand("generate", "Generate a synthetic dataset");
  g->add_option("--graphs", gen.graphs_file, "Base graphs (JSONL)");
  g->add_option("--synth-graphs", gen.synth_graphs,
                "Sample this many base graphs from the built-in inventory");
  g->add_option("--out", gen.out, "Output directory");
  g->add_option("--train", gen.train, "Training split size");
  g->add_option("--dev", gen.dev, "Dev split size");
  g->add_option("--test", gen.test, "Test split size");
  g->add_flag("--multi", gen.multi, "Multi-operation instances");
  g->add_option("--mean-ops", gen.mean_ops,
                "Calibrate the terminate weight to this mean op count")
      ->needs("--multi");
  g->add_option("--terminate-weight", gen.terminate_weight,
                "Terminate weight P (ignored when --mean-ops is given)");
  g->add_option("--tau", gen.tau, "Sampler temperature");
  g->add_option("--seed", gen.seed, "Random seed");
  g->add_option("--jobs", gen.jobs, "Worker threads")
      ->check(CLI::Range(1, 64));
  g->add_option("--templates", gen.templates_file, "Query template file");
  g->add_option("--similarity", gen.similarity_file, "Label similarity file");

  TrainArgs tr;
  auto* t = app.add_subcommand("train", "Train a model");
  t->add_option("--data", tr.data, "Dataset directory")->required();
  t->add_option("--fusion", tr.fusion, "concat | gating | cross");
  t->add_option("--edge-decoder", tr.edge_decoder, "adjacency | flat");
  t->add_option("--config", tr.config_file, "key=value config file");
  t->add_option("--out", tr.out, "Checkpoint path");
  t->add_option("--mix", tr.mix_dir,
                "User data (directory or .jsonl) for 1:1 mixed batches");
  t->add_option("--seed", tr.seed, "Random seed")
      ->each([&tr](const std::string&) { tr.seed_set = true; });

  EvalArgs ev;
  auto* e = app.add_subcommand("eval", "Score a checkpoint on a dataset");
  e->add_option("--checkpoint", ev.checkpoint, "Checkpoint path");
  e->add_option("--data", ev.data, "Instances (JSONL)")->required();
  e->add_flag("--bins", ev.bins, "Break metrics down by op count");
  e->add_flag("--copy-source", ev.baseline_copy_source,
              "Score the copy-source baseline instead of a checkpoint");
  e->add_option("--jobs", ev.jobs, "Worker threads")->check(CLI::Range(1, 64));

  InferArgs in;
  auto* i = app.add_subcommand("infer", "Predict one modification");
  i->add_option("--checkpoint", in.checkpoint, "Checkpoint path")->required();
  i->add_option("--source", in.source, "Source graph (JSONL, first record)")
      ->required();
  i->add_option("--query", in.query, "Modification query")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& err) {
    return app.exit(err);  // prints help, exits 0
  } catch (const CLI::ParseError& err) {
    app.exit(err);
    return 2;
  }

  try {
    if (g->parsed()) return run_generate(gen);
    if (t->parsed()) return run_train(tr);
    if (e->parsed()) return run_eval(ev);
    if (i->parsed()) return run_infer(in);
  } catch (const Error& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  }
  return 0;
}
