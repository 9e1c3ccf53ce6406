#pragma once

#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace mg::text {

inline constexpr const char* kJoiner = "@@";
inline constexpr const char* kUnkSymbol = "<unk>";

// Byte-pair style merge model over codepoints. Non-final units of a token
// carry the joiner suffix ("ab@@ ab" for "abab").
class SubwordModel {
 public:
  // Greedy most-frequent-pair merges (ties: lexicographically smallest pair)
  // until the symbol inventory reaches `vocab_size` or no pair occurs twice.
  static SubwordModel learn(const std::vector<std::string>& tokens, size_t vocab_size);

  std::vector<std::string> apply(const std::vector<std::string>& tokens) const;
  std::vector<std::string> segment(const std::string& token) const;

  const std::vector<std::pair<std::string, std::string>>& merges() const { return merges_; }
  const std::set<std::string>& alphabet() const { return alphabet_; }
  // Characters plus merged symbols.
  const std::set<std::string>& vocab() const { return vocab_; }
  const std::string& joiner() const { return joiner_; }

  // `bpe v1 <joiner>` header, then `<left> <right>` per merge.
  std::string serialize() const;
  static SubwordModel parse(const std::string& content, const std::set<std::string>& alphabet);
  void save(const std::string& path) const;
  static SubwordModel load(const std::string& path, const std::set<std::string>& alphabet);

 private:
  void index_merges();

  std::string joiner_ = kJoiner;
  std::vector<std::pair<std::string, std::string>> merges_;
  std::set<std::string> alphabet_;
  std::set<std::string> vocab_;
  std::map<std::pair<std::string, std::string>, int> rank_;
};

std::vector<std::string> revert_subwords(const std::vector<std::string>& units, const std::string& joiner = kJoiner);

// Splits UTF-8 text into single-codepoint strings.
std::vector<std::string> codepoints(const std::string& s);

}  // namespace mg::text
