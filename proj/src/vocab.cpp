#include "gmod/vocab.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>

#include "gmod/errors.hpp"

namespace gmod {

namespace {
const std::vector<std::string> kBaseSpecials = {"<pad>", "<unk>", "<bos>",
                                                "<eos>", "<cls>"};
const std::string kNullToken = "<null>";
}  // namespace

Vocabulary::Vocabulary(bool with_null) : with_null_(with_null) {
  tokens_ = kBaseSpecials;
  if (with_null_) tokens_.push_back(kNullToken);
  index_tokens();
}

Vocabulary Vocabulary::build(const std::vector<std::string>& corpus,
                             int min_count, bool with_null) {
  if (min_count < 1) throw ConfigError("min_count must be >= 1");
  std::map<std::string, int> freq;  // ordered: lexicographic tie-break
  for (const std::string& tok : corpus) freq[tok]++;

  std::vector<std::pair<std::string, int>> entries(freq.begin(), freq.end());
  std::stable_sort(entries.begin(), entries.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });

  Vocabulary v(with_null);
  for (const auto& [tok, count] : entries) {
    if (count < min_count) continue;
    if (v.ids_.count(tok)) continue;  // token that collides with a special
    v.tokens_.push_back(tok);
  }
  v.index_tokens();
  return v;
}

void Vocabulary::index_tokens() {
  ids_.clear();
  for (int i = 0; i < static_cast<int>(tokens_.size()); ++i) ids_[tokens_[i]] = i;
}

int Vocabulary::id(const std::string& token) const {
  auto it = ids_.find(token);
  return it == ids_.end() ? kUnkId : it->second;
}

const std::string& Vocabulary::token(int id) const {
  if (id < 0 || id >= size()) return tokens_[kUnkId];
  return tokens_[id];
}

bool Vocabulary::contains(const std::string& token) const {
  return ids_.count(token) > 0;
}

std::vector<std::string> Vocabulary::tokenize(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

std::vector<int> Vocabulary::encode(const std::string& text) const {
  std::vector<int> out;
  for (const std::string& tok : tokenize(text)) out.push_back(id(tok));
  return out;
}

std::string Vocabulary::decode(const std::vector<int>& ids) const {
  std::string out;
  for (size_t i = 0; i < ids.size(); ++i) {
    if (i) out.push_back(' ');
    out += token(ids[i]);
  }
  return out;
}

void Vocabulary::save(const std::string& path) const {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write vocabulary: " + path);
  for (const std::string& tok : tokens_) f << tok << '\n';
}

Vocabulary Vocabulary::load(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot read vocabulary: " + path);
  std::vector<std::string> tokens;
  std::string line;
  while (std::getline(f, line)) tokens.push_back(line);
  try {
    return from_tokens(std::move(tokens));
  } catch (const Error& e) {
    throw IoError(path + ": " + e.what());
  }
}

Vocabulary Vocabulary::from_tokens(std::vector<std::string> tokens) {
  if (tokens.size() < kBaseSpecials.size())
    throw IoError("vocabulary token list too short");
  for (size_t i = 0; i < kBaseSpecials.size(); ++i)
    if (tokens[i] != kBaseSpecials[i])
      throw IoError("vocabulary token list missing special tokens");

  Vocabulary v(tokens.size() > kClsId + 1 && tokens[kNullEdgeId] == kNullToken);
  v.tokens_ = std::move(tokens);
  v.index_tokens();
  return v;
}

uint64_t Vocabulary::hash() const {
  // FNV-1a over tokens with separators.
  uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](unsigned char c) {
    h ^= c;
    h *= 0x100000001b3ULL;
  };
  for (const std::string& tok : tokens_) {
    for (char c : tok) mix(static_cast<unsigned char>(c));
    mix(0xff);
  }
  mix(with_null_ ? 1 : 0);
  return h;
}

}  // namespace gmod
