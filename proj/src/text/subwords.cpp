#include "text/subwords.hpp"

#include <sstream>

#include "common/error.hpp"
#include "common/io.hpp"
#include "text/unicode.hpp"

namespace mg::text {

std::vector<std::string> codepoints(const std::string& s) {
  std::vector<std::string> out;
  for (char32_t c : decode_utf8(s)) out.push_back(encode_utf8(c));
  return out;
}

namespace {

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

}  // namespace

SubwordModel SubwordModel::learn(const std::vector<std::string>& tokens, size_t vocab_size) {
  std::map<std::string, long> word_counts;
  for (const std::string& t : tokens) {
    if (!t.empty()) word_counts[t] += 1;
  }
  SubwordModel model;
  std::vector<std::pair<std::vector<std::string>, long>> words;
  for (const auto& [w, c] : word_counts) {
    std::vector<std::string> syms = codepoints(w);
    for (const std::string& s : syms) model.alphabet_.insert(s);
    words.emplace_back(std::move(syms), c);
  }
  if (vocab_size < model.alphabet_.size()) {
    fail(ErrorKind::kInvalidArgument, "subwords: vocab size " + std::to_string(vocab_size) + " is below the character inventory of " +
                                          std::to_string(model.alphabet_.size()));
  }
  model.vocab_ = model.alphabet_;
  while (model.vocab_.size() < vocab_size) {
    std::map<std::pair<std::string, std::string>, long> pairs;
    for (const auto& [syms, c] : words) {
      for (size_t i = 0; i + 1 < syms.size(); ++i) pairs[{syms[i], syms[i + 1]}] += c;
    }
    const std::pair<std::string, std::string>* best = nullptr;
    long best_count = 1;
    for (const auto& [p, c] : pairs) {
      if (c > best_count) {
        best = &p;
        best_count = c;
      }
    }
    if (best == nullptr) break;  // no pair occurs at least twice
    const auto merge = *best;
    const std::string joined = merge.first + merge.second;
    for (auto& [syms, c] : words) {
      std::vector<std::string> next;
      next.reserve(syms.size());
      for (size_t i = 0; i < syms.size(); ++i) {
        if (i + 1 < syms.size() && syms[i] == merge.first && syms[i + 1] == merge.second) {
          next.push_back(joined);
          ++i;
        } else {
          next.push_back(syms[i]);
        }
      }
      syms = std::move(next);
    }
    model.merges_.push_back(merge);
    model.vocab_.insert(joined);
  }
  model.index_merges();
  return model;
}

void SubwordModel::index_merges() {
  rank_.clear();
  for (size_t i = 0; i < merges_.size(); ++i) rank_.emplace(merges_[i], static_cast<int>(i));
  vocab_ = alphabet_;
  for (const auto& [l, r] : merges_) vocab_.insert(l + r);
}

std::vector<std::string> SubwordModel::segment(const std::string& token) const {
  std::vector<std::string> syms;
  for (std::string& c : codepoints(token)) syms.push_back(alphabet_.count(c) ? std::move(c) : std::string(kUnkSymbol));
  while (syms.size() > 1) {
    int best_rank = -1;
    for (size_t i = 0; i + 1 < syms.size(); ++i) {
      auto it = rank_.find({syms[i], syms[i + 1]});
      if (it != rank_.end() && (best_rank < 0 || it->second < best_rank)) best_rank = it->second;
    }
    if (best_rank < 0) break;
    const auto& merge = merges_[best_rank];
    std::vector<std::string> next;
    next.reserve(syms.size());
    for (size_t i = 0; i < syms.size(); ++i) {
      if (i + 1 < syms.size() && syms[i] == merge.first && syms[i + 1] == merge.second) {
        next.push_back(merge.first + merge.second);
        ++i;
      } else {
        next.push_back(syms[i]);
      }
    }
    syms = std::move(next);
  }
  return syms;
}

std::vector<std::string> SubwordModel::apply(const std::vector<std::string>& tokens) const {
  std::vector<std::string> units;
  for (const std::string& tok : tokens) {
    std::vector<std::string> syms = segment(tok);
    for (size_t i = 0; i < syms.size(); ++i) units.push_back(i + 1 < syms.size() ? syms[i] + joiner_ : syms[i]);
  }
  return units;
}

std::vector<std::string> revert_subwords(const std::vector<std::string>& units, const std::string& joiner) {
  std::vector<std::string> tokens;
  std::string current;
  bool open = false;
  for (const std::string& u : units) {
    if (ends_with(u, joiner) && u.size() > joiner.size()) {
      current += u.substr(0, u.size() - joiner.size());
      open = true;
    } else {
      current += u;
      tokens.push_back(std::move(current));
      current.clear();
      open = false;
    }
  }
  if (open) tokens.push_back(std::move(current));  // dangling joiner at end of a truncated output
  return tokens;
}

std::string SubwordModel::serialize() const {
  std::string out = "bpe v1 " + joiner_ + "\n";
  for (const auto& [l, r] : merges_) out += l + " " + r + "\n";
  return out;
}

SubwordModel SubwordModel::parse(const std::string& content, const std::set<std::string>& alphabet) {
  std::istringstream in(content);
  std::string line;
  if (!std::getline(in, line) || line.rfind("bpe v1 ", 0) != 0 || line.size() <= 7) {
    fail(ErrorKind::kParse, "subword model line 1: expected 'bpe v1 <joiner>'");
  }
  SubwordModel model;
  model.joiner_ = line.substr(7);
  model.alphabet_ = alphabet;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const size_t sp = line.find(' ');
    if (sp == std::string::npos || sp == 0 || sp + 1 >= line.size() || line.find(' ', sp + 1) != std::string::npos) {
      fail(ErrorKind::kParse, "subword model line " + std::to_string(lineno) + ": expected '<left> <right>'");
    }
    model.merges_.emplace_back(line.substr(0, sp), line.substr(sp + 1));
  }
  model.index_merges();
  if (model.rank_.size() != model.merges_.size()) fail(ErrorKind::kParse, "subword model: duplicate merge");
  return model;
}

void SubwordModel::save(const std::string& path) const {
  write_file(path, serialize());
}

SubwordModel SubwordModel::load(const std::string& path, const std::set<std::string>& alphabet) {
  return parse(read_file(path), alphabet);
}

}  // namespace mg::text
