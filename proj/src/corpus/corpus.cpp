#include "corpus/corpus.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "common/error.hpp"
#include "common/io.hpp"
#include "common/rng.hpp"
#include "text/tokenizer.hpp"
#include "text/unicode.hpp"

namespace mg::corpus {

int TagSet::lang_index(const std::string& lang) const {
  auto it = std::find(langs.begin(), langs.end(), lang);
  return it == langs.end() ? -1 : static_cast<int>(it - langs.begin());
}

int TagSet::domain_index(const std::string& domain) const {
  auto it = std::find(domains.begin(), domains.end(), domain);
  return it == domains.end() ? -1 : static_cast<int>(it - domains.begin());
}

TagSet TagSet::from_pairs(const std::vector<SentencePair>& pairs) {
  std::set<std::string> langs, domains;
  for (const auto& p : pairs) {
    langs.insert(p.src_lang);
    langs.insert(p.tgt_lang);
    domains.insert(p.domain);
  }
  return {{langs.begin(), langs.end()}, {domains.begin(), domains.end()}};
}

std::string TagSet::serialize() const {
  return "langs " + text::join(langs, " ") + "\ndomains " + text::join(domains, " ") + "\n";
}

TagSet TagSet::parse(const std::string& content) {
  TagSet tags;
  std::istringstream in(content);
  std::string line;
  bool seen_langs = false, seen_domains = false;
  while (std::getline(in, line)) {
    auto words = text::split_whitespace(line);
    if (words.empty()) continue;
    std::vector<std::string> rest(words.begin() + 1, words.end());
    if (words[0] == "langs") {
      tags.langs = rest;
      seen_langs = true;
    } else if (words[0] == "domains") {
      tags.domains = rest;
      seen_domains = true;
    } else {
      fail(ErrorKind::kParse, "tags: unexpected line '" + line + "'");
    }
  }
  if (!seen_langs || !seen_domains) fail(ErrorKind::kParse, "tags: need 'langs' and 'domains' lines");
  return tags;
}

void TagSet::save(const std::string& path) const {
  write_file(path, serialize());
}

TagSet TagSet::load(const std::string& path) {
  return parse(read_file(path));
}

std::string factor_name(const std::string& tag) { return "2" + tag; }

std::string clean_violation(const SentencePair& pair, const CleanOptions& opts) {
  const std::string* sides[2] = {&pair.src, &pair.tgt};
  const std::string* langs[2] = {&pair.src_lang, &pair.tgt_lang};
  size_t lens[2];
  for (int s = 0; s < 2; ++s) {
    if (text::split_whitespace(*sides[s]).empty()) return "empty sentence";
    if (!text::has_letter(*sides[s])) return "no alphabetic characters";
    lens[s] = text::tokenize(*sides[s], *langs[s]).size();
    if (lens[s] > static_cast<size_t>(opts.max_len)) return "longer than " + std::to_string(opts.max_len) + " tokens";
  }
  const double ratio = static_cast<double>(std::max(lens[0], lens[1])) / static_cast<double>(std::min(lens[0], lens[1]));
  if (ratio > opts.max_ratio) return "length ratio over " + std::to_string(opts.max_ratio);
  return {};
}

std::vector<SentencePair> clean(const std::vector<SentencePair>& pairs, const CleanOptions& opts) {
  std::vector<SentencePair> out;
  for (const auto& p : pairs) {
    if (clean_violation(p, opts).empty()) out.push_back(p);
  }
  return out;
}

std::vector<SentencePair> duplicate_directions(const std::vector<SentencePair>& pairs) {
  std::vector<SentencePair> out;
  out.reserve(pairs.size() * 2);
  for (const auto& p : pairs) {
    out.push_back(p);
    out.push_back({p.tgt, p.src, p.tgt_lang, p.src_lang, p.domain});
  }
  return out;
}

FactoredExample annotate_factors(const SentencePair& directed, const text::Pipeline& pipeline, const TagSet& tags) {
  if (tags.lang_index(directed.src_lang) < 0 || tags.lang_index(directed.tgt_lang) < 0) {
    fail(ErrorKind::kConfig, "unknown language in pair (" + directed.src_lang + " -> " + directed.tgt_lang +
                                 "); configured: " + text::join(tags.langs, ", "));
  }
  if (tags.domain_index(directed.domain) < 0) {
    fail(ErrorKind::kConfig, "unknown domain '" + directed.domain + "'; configured: " + text::join(tags.domains, ", "));
  }
  FactoredExample ex;
  ex.src_units = pipeline.units(directed.src, directed.src_lang);
  ex.tgt_units = pipeline.units(directed.tgt, directed.tgt_lang);
  ex.lang_factor = factor_name(directed.tgt_lang);
  ex.style_factor = factor_name(directed.domain);
  ex.src_lang = directed.src_lang;
  ex.tgt_lang = directed.tgt_lang;
  return ex;
}

std::vector<SentencePair> balance_corpora(const std::vector<SentencePair>& pairs, size_t cap, uint64_t seed) {
  if (cap == 0) fail(ErrorKind::kInvalidArgument, "balance_corpora: cap must be positive");
  std::vector<std::string> order;
  std::map<std::string, std::vector<size_t>> streams;
  for (size_t i = 0; i < pairs.size(); ++i) {
    const std::string key = pairs[i].src_lang + "\t" + pairs[i].tgt_lang + "\t" + pairs[i].domain;
    auto [it, inserted] = streams.try_emplace(key);
    if (inserted) order.push_back(key);
    it->second.push_back(i);
  }
  std::vector<SentencePair> out;
  for (size_t s = 0; s < order.size(); ++s) {
    std::vector<size_t> idx = streams[order[s]];
    if (idx.size() > cap) {
      Rng rng(derive_seed(seed, s));
      rng.shuffle(idx);
      idx.resize(cap);
      std::sort(idx.begin(), idx.end());
    }
    for (size_t i : idx) out.push_back(pairs[i]);
  }
  return out;
}

std::vector<SentencePair> parse_tsv(const std::string& content, const std::string& origin) {
  std::vector<SentencePair> out;
  std::istringstream in(content);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cols;
    size_t start = 0;
    while (true) {
      const size_t tab = line.find('\t', start);
      cols.push_back(line.substr(start, tab == std::string::npos ? std::string::npos : tab - start));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    if (cols.size() != 5) {
      fail(ErrorKind::kParse, origin + " line " + std::to_string(lineno) + ": expected 5 tab-separated columns, found " +
                                  std::to_string(cols.size()));
    }
    out.push_back({cols[0], cols[1], cols[2], cols[3], cols[4]});
  }
  return out;
}

std::vector<SentencePair> read_tsv(const std::string& path) {
  return parse_tsv(read_file(path), path);
}

std::string format_tsv(const std::vector<SentencePair>& pairs) {
  std::string out;
  for (const auto& p : pairs) out += p.src + "\t" + p.tgt + "\t" + p.src_lang + "\t" + p.tgt_lang + "\t" + p.domain + "\n";
  return out;
}

void write_tsv(const std::string& path, const std::vector<SentencePair>& pairs) {
  write_file(path, format_tsv(pairs));
}

}  // namespace mg::corpus
