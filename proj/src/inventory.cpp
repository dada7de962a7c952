#include <array>
#include <string>
#include <vector>

#include "gmod/datagen.hpp"

namespace gmod {

namespace {

// Semantic clusters of interchangeable labels. A label's similarity
// candidates are the rest of its cluster.
const std::vector<std::vector<std::string>> kObjectClusters = {
    {"boy", "girl", "man", "woman", "child", "person", "lady", "guy"},
    {"dog", "cat", "puppy", "kitten", "pet"},
    {"horse", "cow", "sheep", "goat", "donkey"},
    {"bird", "duck", "goose", "pigeon", "owl"},
    {"elephant", "giraffe", "zebra", "lion", "tiger", "bear"},
    {"car", "truck", "bus", "van", "taxi", "jeep"},
    {"bicycle", "bike", "motorcycle", "scooter", "skateboard"},
    {"airplane", "plane", "jet", "helicopter", "kite"},
    {"boat", "ship", "canoe", "kayak", "surfboard"},
    {"chair", "bench", "sofa", "couch", "stool", "seat"},
    {"table", "desk", "counter", "shelf", "cabinet"},
    {"bed", "crib", "mattress", "hammock"},
    {"plate", "bowl", "cup", "mug", "glass", "dish"},
    {"fork", "knife", "spoon", "spatula"},
    {"pizza", "sandwich", "burger", "hotdog", "taco"},
    {"cake", "donut", "cookie", "pie", "muffin"},
    {"apple", "banana", "orange", "pear", "grape", "peach"},
    {"broccoli", "carrot", "tomato", "lettuce", "onion"},
    {"coffee", "tea", "juice", "soda", "milk", "wine"},
    {"shirt", "jacket", "coat", "sweater", "vest", "hoodie"},
    {"pants", "jeans", "shorts", "skirt", "dress"},
    {"hat", "cap", "helmet", "beanie"},
    {"shoes", "boots", "sneakers", "sandals"},
    {"bag", "backpack", "purse", "suitcase", "handbag"},
    {"phone", "laptop", "computer", "tablet", "camera", "television"},
    {"ball", "bat", "racket", "frisbee", "glove"},
    {"tree", "bush", "plant", "flower", "fern"},
    {"mountain", "hill", "cliff", "rock", "valley"},
    {"river", "lake", "ocean", "sea", "pond", "stream"},
    {"sky", "cloud", "sun", "moon", "star"},
    {"house", "building", "cottage", "cabin", "tower", "barn"},
    {"kitchen", "bathroom", "bedroom", "hallway", "garage"},
    {"road", "street", "sidewalk", "path", "highway", "bridge"},
    {"sign", "signal", "billboard", "banner"},
    {"box", "basket", "bucket", "jar", "crate"},
    {"hammer", "wrench", "screwdriver", "drill", "saw"},
    {"guitar", "piano", "violin", "drum", "flute"},
    {"book", "magazine", "newspaper", "notebook", "journal"},
    {"toy", "doll", "puzzle", "balloon", "robot"},
    {"umbrella", "cane", "flag", "lantern", "candle"},
};

const std::vector<std::vector<std::string>> kAttributeClusters = {
    {"black", "white", "red", "blue", "green", "yellow", "brown", "gray",
     "purple", "pink"},
    {"big", "small", "large", "tiny", "huge", "little"},
    {"young", "old", "new", "ancient", "modern"},
    {"beautiful", "pretty", "ugly", "lovely", "gorgeous"},
    {"happy", "sad", "angry", "cheerful", "calm"},
    {"soft", "hard", "smooth", "rough", "fluffy"},
    {"hot", "cold", "warm", "cool", "frozen"},
    {"wet", "dry", "damp", "soggy"},
    {"bright", "dark", "shiny", "dull", "glowing"},
    {"clean", "dirty", "dusty", "muddy"},
    {"round", "square", "flat", "curved", "narrow"},
    {"tall", "short", "long", "wide", "thin", "thick"},
    {"fast", "slow", "quick", "rapid"},
    {"open", "closed", "broken", "cracked", "bent"},
    {"wooden", "metallic", "plastic", "leather", "woolen"},
    {"striped", "spotted", "plain", "checkered"},
};

const std::vector<std::string> kRelations = {
    "in",      "on",       "under",  "near",     "behind",  "beside",
    "above",   "below",    "holding", "wearing", "riding",  "eating",
    "drinking", "carrying", "watching", "touching", "facing", "chasing",
};

std::vector<std::string> flatten(const std::vector<std::vector<std::string>>& cs) {
  std::vector<std::string> out;
  for (const auto& c : cs)
    for (const auto& l : c) out.push_back(l);
  return out;
}

}  // namespace

SimilarityTable builtin_similarity() {
  std::map<std::string, std::vector<std::string>> table;
  auto add_clusters = [&table](const std::vector<std::vector<std::string>>& cs) {
    for (const auto& cluster : cs) {
      for (const std::string& label : cluster) {
        std::vector<std::string> cands;
        for (const std::string& other : cluster)
          if (other != label) cands.push_back(other);
        table[label] = std::move(cands);
      }
    }
  };
  add_clusters(kObjectClusters);
  add_clusters(kAttributeClusters);
  return SimilarityTable(std::move(table));
}

std::vector<SceneGraph> sample_base_graphs(int count, uint64_t seed) {
  static const std::vector<std::string> objects = flatten(kObjectClusters);
  static const std::vector<std::string> attributes = flatten(kAttributeClusters);

  std::vector<SceneGraph> out;
  out.reserve(count);
  for (int k = 0; k < count; ++k) {
    Rng rng = Rng::substream(seed, static_cast<uint64_t>(k));

    // Node-count mix picked so that, after single-op editing, source graphs
    // average ~2.9 nodes.
    static const std::vector<double> node_weights = {0.22, 0.42, 0.27, 0.09};
    const int n = 2 + static_cast<int>(rng.weighted(node_weights));
    const int n_obj = (n >= 3 && rng.real01() < 0.45) ? 2 : 1;

    std::vector<std::string> nodes;
    while (static_cast<int>(nodes.size()) < n_obj) {
      const std::string& cand = rng.pick(objects);
      if (std::find(nodes.begin(), nodes.end(), cand) == nodes.end())
        nodes.push_back(cand);
    }
    while (static_cast<int>(nodes.size()) < n) {
      const std::string& cand = rng.pick(attributes);
      if (std::find(nodes.begin(), nodes.end(), cand) == nodes.end())
        nodes.push_back(cand);
    }

    // Tree edges directed from earlier to later id: the node list is already
    // a topological order.
    std::vector<Edge> edges;
    if (n_obj == 2) edges.push_back({0, 1, rng.pick(kRelations)});
    for (int i = n_obj; i < n; ++i) {
      int owner = static_cast<int>(rng.below(static_cast<uint64_t>(n_obj)));
      edges.push_back({owner, i, "attribute"});
    }
    out.emplace_back(std::move(nodes), std::move(edges));
  }
  return out;
}

}  // namespace gmod
