#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

namespace gmod {

// Token ids shared by every vocabulary.
inline constexpr int kPadId = 0;
inline constexpr int kUnkId = 1;
inline constexpr int kBosId = 2;
inline constexpr int kEosId = 3;
inline constexpr int kClsId = 4;
// Edge vocabularies only.
inline constexpr int kNullEdgeId = 5;

// Frequency-built token <-> id map with fixed low ids for special tokens.
// Immutable after build.
class Vocabulary {
 public:
  // `with_null` adds the no-edge class used by edge vocabularies.
  explicit Vocabulary(bool with_null = false);

  // Tokens with frequency >= min_count get ids, ordered by frequency
  // descending then lexicographic. Deterministic across runs.
  static Vocabulary build(const std::vector<std::string>& corpus, int min_count,
                          bool with_null = false);

  int id(const std::string& token) const;  // kUnkId when absent
  const std::string& token(int id) const;
  bool contains(const std::string& token) const;
  int size() const { return static_cast<int>(tokens_.size()); }
  bool has_null() const { return with_null_; }

  // Lowercase whitespace tokenization; unknown words map to UNK.
  std::vector<int> encode(const std::string& text) const;
  std::string decode(const std::vector<int>& ids) const;

  // One token per line, line number - 1 = id, specials first.
  void save(const std::string& path) const;
  static Vocabulary load(const std::string& path);
  // Rebuilds from a saved token list; validates the special-token prefix.
  static Vocabulary from_tokens(std::vector<std::string> tokens);
  const std::vector<std::string>& tokens() const { return tokens_; }

  // Order-sensitive content hash; checkpoints refuse to load on mismatch.
  uint64_t hash() const;

  static std::vector<std::string> tokenize(const std::string& text);

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
    return a.tokens_ == b.tokens_ && a.with_null_ == b.with_null_;
  }

 private:
  void index_tokens();

  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> ids_;
  bool with_null_ = false;
};

}  // namespace gmod
