#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "text/pipeline.hpp"

namespace mg::corpus {

struct SentencePair {
  std::string src;
  std::string tgt;
  std::string src_lang;
  std::string tgt_lang;
  std::string domain;

  bool operator==(const SentencePair&) const = default;
};

// Configured language and domain inventories; factor ids are indices here.
struct TagSet {
  std::vector<std::string> langs;
  std::vector<std::string> domains;

  int lang_index(const std::string& lang) const;      // -1 if unknown
  int domain_index(const std::string& domain) const;  // -1 if unknown
  static TagSet from_pairs(const std::vector<SentencePair>& pairs);

  // `langs a b c` and `domains x y` lines.
  std::string serialize() const;
  static TagSet parse(const std::string& content);
  void save(const std::string& path) const;
  static TagSet load(const std::string& path);
};

std::string factor_name(const std::string& tag);  // "2" + tag

struct FactoredExample {
  std::vector<std::string> src_units;
  std::string lang_factor;   // e.g. 2lv
  std::string style_factor;  // e.g. 2os
  std::vector<std::string> tgt_units;
  std::string src_lang;  // bookkeeping only, never fed to the model
  std::string tgt_lang;
};

struct CleanOptions {
  int max_len = 100;
  double max_ratio = 9.0;
};

// Why a pair was rejected; empty when it passes.
std::string clean_violation(const SentencePair& pair, const CleanOptions& opts);
std::vector<SentencePair> clean(const std::vector<SentencePair>& pairs, const CleanOptions& opts = {});

// Every pair yields (src -> tgt) followed by (tgt -> src).
std::vector<SentencePair> duplicate_directions(const std::vector<SentencePair>& pairs);

FactoredExample annotate_factors(const SentencePair& directed, const text::Pipeline& pipeline, const TagSet& tags);

// Keeps at most `cap` pairs per (src_lang, tgt_lang, domain) stream by seeded
// random subset, preserving order within a stream. Streams appear in order of
// first occurrence.
std::vector<SentencePair> balance_corpora(const std::vector<SentencePair>& pairs, size_t cap, uint64_t seed);

// TSV: src<TAB>tgt<TAB>src_lang<TAB>tgt_lang<TAB>domain
std::vector<SentencePair> read_tsv(const std::string& path);
std::vector<SentencePair> parse_tsv(const std::string& content, const std::string& origin = "<memory>");
void write_tsv(const std::string& path, const std::vector<SentencePair>& pairs);
std::string format_tsv(const std::vector<SentencePair>& pairs);

}  // namespace mg::corpus
