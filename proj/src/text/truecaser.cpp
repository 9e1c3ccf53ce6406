#include "text/truecaser.hpp"

#include <sstream>

#include "common/error.hpp"
#include "common/io.hpp"
#include "text/unicode.hpp"

namespace mg::text {

int sentence_start(const std::vector<std::string>& tokens) {
  for (size_t i = 0; i < tokens.size(); ++i) {
    if (has_letter(tokens[i])) return static_cast<int>(i);
  }
  return -1;
}

TruecaseModel TruecaseModel::train(const std::vector<std::vector<std::string>>& corpus) {
  if (corpus.empty()) fail(ErrorKind::kInvalidArgument, "truecaser: empty training corpus");
  std::map<std::string, std::map<std::string, long>> counts;
  for (const auto& sentence : corpus) {
    const int start = sentence_start(sentence);
    for (size_t i = 0; i < sentence.size(); ++i) {
      const std::string& tok = sentence[i];
      if (!has_letter(tok)) continue;
      const std::string key = lowercase(tok);
      const std::string& surface = static_cast<int>(i) == start ? key : tok;
      counts[key][surface] += 1;
    }
  }
  TruecaseModel model;
  for (const auto& [key, forms] : counts) {
    CasedForm best;
    for (const auto& [surface, count] : forms) {
      // std::map iterates surfaces in lexicographic order, so strict > keeps the smallest on ties
      if (count > best.count) best = {surface, count};
    }
    model.table_[key] = best;
  }
  return model;
}

const CasedForm* TruecaseModel::lookup(const std::string& word) const {
  auto it = table_.find(lowercase(word));
  return it == table_.end() ? nullptr : &it->second;
}

std::string TruecaseModel::serialize() const {
  std::string out;
  for (const auto& [key, form] : table_) out += form.surface + " " + std::to_string(form.count) + "\n";
  return out;
}

TruecaseModel TruecaseModel::parse(const std::string& content) {
  TruecaseModel model;
  std::istringstream in(content);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const size_t sp = line.rfind(' ');
    if (sp == std::string::npos || sp == 0) fail(ErrorKind::kParse, "truecase model line " + std::to_string(lineno) + ": expected '<surface> <count>'");
    CasedForm form;
    form.surface = line.substr(0, sp);
    try {
      form.count = std::stol(line.substr(sp + 1));
    } catch (const std::exception&) {
      fail(ErrorKind::kParse, "truecase model line " + std::to_string(lineno) + ": bad count");
    }
    if (form.count <= 0) fail(ErrorKind::kParse, "truecase model line " + std::to_string(lineno) + ": count must be positive");
    model.table_[lowercase(form.surface)] = form;
  }
  return model;
}

TruecaseModel TruecaseModel::load(const std::string& path) {
  return parse(read_file(path));
}

void TruecaseModel::save(const std::string& path) const {
  write_file(path, serialize());
}

std::vector<std::string> truecase(const std::vector<std::string>& tokens, const TruecaseModel& model) {
  std::vector<std::string> out = tokens;
  const int start = sentence_start(out);
  if (start < 0) return out;
  if (const CasedForm* form = model.lookup(out[start])) out[start] = form->surface;
  return out;
}

std::vector<std::string> detruecase(const std::vector<std::string>& tokens) {
  std::vector<std::string> out = tokens;
  const int start = sentence_start(out);
  if (start >= 0) out[start] = capitalize_first_letter(out[start]);
  return out;
}

}  // namespace mg::text
