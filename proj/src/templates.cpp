#include <fstream>
#include <sstream>

#include "gmod/datagen.hpp"
#include "gmod/errors.hpp"

namespace gmod {

TemplateSet::TemplateSet(std::vector<Template> templates) {
  for (Template& t : templates) {
    switch (t.kind) {
      case EditKind::Insert: insert_.push_back(std::move(t)); break;
      case EditKind::Delete: delete_.push_back(std::move(t)); break;
      case EditKind::Substitute: substitute_.push_back(std::move(t)); break;
    }
  }
  if (insert_.empty() || delete_.empty() || substitute_.empty())
    throw ConfigError("template set needs at least one template per operation");
  for (const Template& t : insert_)
    if (t.pattern.find("xx") == std::string::npos)
      throw ConfigError("insertion template lacks xx: " + t.pattern);
  for (const Template& t : delete_)
    if (t.pattern.find("xx") == std::string::npos)
      throw ConfigError("deletion template lacks xx: " + t.pattern);
  for (const Template& t : substitute_)
    if (t.pattern.find("xx") == std::string::npos ||
        t.pattern.find("yy") == std::string::npos)
      throw ConfigError("substitution template lacks xx/yy: " + t.pattern);
}

TemplateSet TemplateSet::builtin() {
  std::vector<Template> all;
  auto add = [&all](EditKind k, const char* p) { all.push_back({k, p}); };
  add(EditKind::Insert, "I want xx");
  add(EditKind::Insert, "I prefer xx");
  add(EditKind::Insert, "I like xx");
  add(EditKind::Insert, "I would like to see xx");
  add(EditKind::Insert, "Show me xx");
  add(EditKind::Insert, "Give me xx");
  add(EditKind::Insert, "I'm interested in xx");
  add(EditKind::Insert, "I need xx");
  add(EditKind::Insert, "Search for xx");
  add(EditKind::Insert, "Return xx");

  add(EditKind::Delete, "remove xx");
  add(EditKind::Delete, "I do not want xx");
  add(EditKind::Delete, "delete xx");
  add(EditKind::Delete, "I do not like xx");
  add(EditKind::Delete, "omit xx");
  add(EditKind::Delete, "I do not need xx");
  add(EditKind::Delete, "erase xx");
  add(EditKind::Delete, "ignore xx");
  add(EditKind::Delete, "discard xx");
  add(EditKind::Delete, "drop xx");

  add(EditKind::Substitute, "change xx to yy");
  add(EditKind::Substitute, "update xx to yy");
  add(EditKind::Substitute, "replace xx with yy");
  add(EditKind::Substitute, "substitute yy for xx");
  add(EditKind::Substitute, "I prefer yy to xx");
  add(EditKind::Substitute, "modify xx to yy");
  add(EditKind::Substitute, "I want yy rather than xx");
  add(EditKind::Substitute, "switch xx to yy");
  add(EditKind::Substitute, "convert xx to yy");
  add(EditKind::Substitute, "give me yy instead of xx");
  return TemplateSet(std::move(all));
}

TemplateSet TemplateSet::load(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot read templates: " + path);
  std::vector<Template> all;
  std::string line;
  while (std::getline(f, line)) {
    if (line.empty() || line[0] == '#') continue;
    auto colon = line.find(':');
    if (colon == std::string::npos)
      throw IoError("template line lacks kind prefix: " + line);
    std::string kind = line.substr(0, colon);
    std::string pattern = line.substr(colon + 1);
    EditKind k;
    if (kind == "ins") k = EditKind::Insert;
    else if (kind == "del") k = EditKind::Delete;
    else if (kind == "sub") k = EditKind::Substitute;
    else throw IoError("unknown template kind: " + kind);
    all.push_back({k, pattern});
  }
  return TemplateSet(std::move(all));
}

void TemplateSet::save(const std::string& path) const {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write templates: " + path);
  for (const Template& t : insert_) f << "ins:" << t.pattern << '\n';
  for (const Template& t : delete_) f << "del:" << t.pattern << '\n';
  for (const Template& t : substitute_) f << "sub:" << t.pattern << '\n';
}

const std::vector<Template>& TemplateSet::of(EditKind kind) const {
  switch (kind) {
    case EditKind::Insert: return insert_;
    case EditKind::Delete: return delete_;
    case EditKind::Substitute: return substitute_;
  }
  return delete_;
}

std::string TemplateSet::render(const Template& t, const std::string& xx,
                                const std::string& yy) const {
  std::string out = t.pattern;
  auto replace_all = [&out](const std::string& from, const std::string& to) {
    size_t pos = 0;
    while ((pos = out.find(from, pos)) != std::string::npos) {
      out.replace(pos, from.size(), to);
      pos += to.size();
    }
  };
  replace_all("xx", xx);
  if (!yy.empty()) replace_all("yy", yy);
  return out;
}

SimilarityTable::SimilarityTable(std::map<std::string, std::vector<std::string>> table)
    : table_(std::move(table)) {
  for (auto& [label, cands] : table_)
    for (const std::string& c : cands)
      if (c == label)
        throw ConfigError("similarity table entry lists itself: " + label);
}

SimilarityTable SimilarityTable::load(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot read similarity table: " + path);
  std::map<std::string, std::vector<std::string>> table;
  std::string line;
  while (std::getline(f, line)) {
    if (line.empty() || line[0] == '#') continue;
    auto colon = line.find(':');
    if (colon == std::string::npos)
      throw IoError("similarity line lacks ':': " + line);
    std::string label = line.substr(0, colon);
    std::vector<std::string> cands;
    std::string item;
    std::istringstream rest(line.substr(colon + 1));
    while (std::getline(rest, item, ',')) {
      size_t a = item.find_first_not_of(" \t");
      size_t b = item.find_last_not_of(" \t\r");
      if (a == std::string::npos) continue;
      cands.push_back(item.substr(a, b - a + 1));
    }
    if (!cands.empty()) table[label] = std::move(cands);
  }
  return SimilarityTable(std::move(table));
}

void SimilarityTable::save(const std::string& path) const {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write similarity table: " + path);
  for (const auto& [label, cands] : table_) {
    f << label << ": ";
    for (size_t i = 0; i < cands.size(); ++i) {
      if (i) f << ", ";
      f << cands[i];
    }
    f << '\n';
  }
}

bool SimilarityTable::has(const std::string& label) const {
  return table_.count(label) > 0;
}

const std::vector<std::string>& SimilarityTable::candidates(
    const std::string& label) const {
  auto it = table_.find(label);
  if (it == table_.end())
    throw NoSimilarLabelError("no similar labels for '" + label + "'");
  return it->second;
}

}  // namespace gmod
