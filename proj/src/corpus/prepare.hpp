#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "corpus/batching.hpp"
#include "corpus/corpus.hpp"
#include "text/pipeline.hpp"

namespace mg::corpus {

// Per-language truecasers over both sides, one joint subword model and the
// vocabulary of the units it produces.
text::Pipeline train_pipeline(const std::vector<SentencePair>& pairs, int subword_vocab);

struct PrepareOptions {
  std::string input_dir;   // train.tsv, valid.tsv, test.tsv
  std::string output_dir;
  int subword_vocab = 512;
  size_t balance_cap = 0;  // 0 disables balancing
  CleanOptions clean;
  uint64_t seed = 1;
};

struct PrepareReport {
  size_t train_in = 0, train_out = 0;
  size_t valid_out = 0, test_out = 0;
  int vocab_size = 0;
  TagSet tags;
};

PrepareReport prepare(const PrepareOptions& opts);

// A prepared directory read back: pipeline, tags and the three splits.
struct PreparedData {
  text::Pipeline pipeline;
  TagSet tags;
  std::vector<SentencePair> train, valid, test;
};

PreparedData load_prepared(const std::string& dir);

// Factored and encoded examples; `both_directions` adds each reversed pair.
std::vector<EncodedExample> encode_pairs(const std::vector<SentencePair>& pairs, const text::Pipeline& pipeline,
                                         const TagSet& tags, bool both_directions);

inline std::string tags_file(const std::string& dir) { return dir + "/tags.txt"; }

}  // namespace mg::corpus
