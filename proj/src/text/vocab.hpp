#pragma once

#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

namespace mg::text {

// Unit <-> id table of the translation model. Ids 0..3 are reserved.
class Vocab {
 public:
  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;
  static constexpr int kBos = 2;
  static constexpr int kEos = 3;

  Vocab();

  // Units sorted by descending frequency, then bytewise; `always` units are
  // included even when unseen.
  static Vocab build(const std::map<std::string, long>& unit_counts, const std::set<std::string>& always);

  int id(const std::string& unit) const;
  const std::string& unit(int id) const;
  int size() const { return static_cast<int>(units_.size()); }

  std::vector<int> encode(const std::vector<std::string>& units) const;
  // Drops special ids other than UNK.
  std::vector<std::string> decode(const std::vector<int>& ids) const;

  // Single-codepoint units without joiner: the subword alphabet.
  std::set<std::string> alphabet() const;

  std::string serialize() const;
  static Vocab parse(const std::string& content);
  void save(const std::string& path) const;
  static Vocab load(const std::string& path);

 private:
  void add(const std::string& unit);

  std::vector<std::string> units_;
  std::unordered_map<std::string, int> index_;
};

}  // namespace mg::text
