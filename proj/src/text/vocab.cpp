#include "text/vocab.hpp"

#include <algorithm>
#include <sstream>

#include "common/error.hpp"
#include "common/io.hpp"
#include "text/subwords.hpp"
#include "text/unicode.hpp"

namespace mg::text {

Vocab::Vocab() {
  add("<pad>");
  add(kUnkSymbol);
  add("<s>");
  add("</s>");
}

void Vocab::add(const std::string& unit) {
  if (index_.count(unit)) fail(ErrorKind::kParse, "vocab: duplicate unit '" + unit + "'");
  index_.emplace(unit, static_cast<int>(units_.size()));
  units_.push_back(unit);
}

Vocab Vocab::build(const std::map<std::string, long>& unit_counts, const std::set<std::string>& always) {
  std::vector<std::pair<std::string, long>> entries(unit_counts.begin(), unit_counts.end());
  for (const std::string& u : always) {
    if (!unit_counts.count(u)) entries.emplace_back(u, 0);
  }
  std::stable_sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  Vocab v;
  for (const auto& [u, c] : entries) {
    if (!v.index_.count(u) && u.find(kUnkSymbol) == std::string::npos) v.add(u);
  }
  return v;
}

int Vocab::id(const std::string& unit) const {
  auto it = index_.find(unit);
  return it == index_.end() ? kUnk : it->second;
}

const std::string& Vocab::unit(int id) const {
  if (id < 0 || id >= size()) fail(ErrorKind::kInvalidArgument, "vocab: id " + std::to_string(id) + " out of range");
  return units_[id];
}

std::vector<int> Vocab::encode(const std::vector<std::string>& units) const {
  std::vector<int> ids;
  ids.reserve(units.size());
  for (const std::string& u : units) ids.push_back(id(u));
  return ids;
}

std::vector<std::string> Vocab::decode(const std::vector<int>& ids) const {
  std::vector<std::string> out;
  for (int i : ids) {
    if (i == kPad || i == kBos || i == kEos) continue;
    out.push_back(unit(i));
  }
  return out;
}

std::set<std::string> Vocab::alphabet() const {
  std::set<std::string> out;
  for (size_t i = 4; i < units_.size(); ++i) {
    if (codepoint_count(units_[i]) == 1) out.insert(units_[i]);
  }
  return out;
}

std::string Vocab::serialize() const {
  std::string out;
  for (size_t i = 4; i < units_.size(); ++i) out += units_[i] + "\n";
  return out;
}

Vocab Vocab::parse(const std::string& content) {
  Vocab v;
  std::istringstream in(content);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) v.add(line);
  }
  return v;
}

void Vocab::save(const std::string& path) const {
  write_file(path, serialize());
}

Vocab Vocab::load(const std::string& path) {
  return parse(read_file(path));
}

}  // namespace mg::text
