#pragma once

#include <map>
#include <string>
#include <vector>

namespace mg::text {

struct CasedForm {
  std::string surface;
  long count = 0;
};

// Maps a lowercased word to its dominant surface casing.
class TruecaseModel {
 public:
  // Each sentence is a token list. Tokens in sentence-initial position are
  // counted under their lowercased form. The most frequent surface wins; ties
  // go to the lexicographically smallest surface.
  static TruecaseModel train(const std::vector<std::vector<std::string>>& corpus);

  static TruecaseModel load(const std::string& path);
  void save(const std::string& path) const;
  // `<surface> <count>` per line, sorted by key.
  std::string serialize() const;
  static TruecaseModel parse(const std::string& content);

  const CasedForm* lookup(const std::string& word) const;
  size_t size() const { return table_.size(); }
  const std::map<std::string, CasedForm>& table() const { return table_; }

 private:
  std::map<std::string, CasedForm> table_;
};

// Index of the token that starts the sentence for casing purposes (first
// token containing a letter), or -1.
int sentence_start(const std::vector<std::string>& tokens);

std::vector<std::string> truecase(const std::vector<std::string>& tokens, const TruecaseModel& model);
std::vector<std::string> detruecase(const std::vector<std::string>& tokens);

}  // namespace mg::text
