#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "corpus/corpus.hpp"
#include "text/vocab.hpp"

namespace mg::corpus {

// Unit ids of one factored example. Target ids carry no BOS/EOS.
struct EncodedExample {
  std::vector<int> src;
  std::vector<int> tgt;
  int lang_factor = 0;
  int style_factor = 0;
  std::string src_lang;
  std::string tgt_lang;
};

EncodedExample encode_example(const FactoredExample& ex, const text::Vocab& vocab, const TagSet& tags);

// Padded batch. Decoder input is BOS + tgt, decoder output is tgt + EOS.
struct Batch {
  std::vector<size_t> examples;  // indices into the epoch's example list
  int size = 0;
  int src_len = 0;
  int tgt_len = 0;                 // includes the BOS/EOS shift slot
  std::vector<int> src_ids;        // size * src_len, pad = 0
  std::vector<uint8_t> src_valid;  // size * src_len
  std::vector<int> tgt_in;         // size * tgt_len
  std::vector<int> tgt_out;        // size * tgt_len
  std::vector<float> tgt_weight;   // 1 on real positions, 0 on padding
  std::vector<int> lang_factor;    // size
  std::vector<int> style_factor;   // size
  long target_words = 0;
};

// Target words of an example: its target unit count.
inline long target_words(const EncodedExample& ex) { return static_cast<long>(ex.tgt.size()); }

// Shuffle by seed, bucket by target length, pack each bucket greedily under
// the budget. Returns index lists; every example appears exactly once.
std::vector<std::vector<size_t>> plan_batches(const std::vector<long>& lengths, long word_budget, uint64_t seed,
                                              int buckets = 8);

Batch collate(const std::vector<EncodedExample>& examples, const std::vector<size_t>& indices);

std::vector<Batch> make_batches(const std::vector<EncodedExample>& examples, long word_budget, uint64_t seed,
                                int buckets = 8);

}  // namespace mg::corpus
