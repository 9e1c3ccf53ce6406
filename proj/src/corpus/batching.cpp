#include "corpus/batching.hpp"

#include <algorithm>

#include "common/error.hpp"
#include "common/rng.hpp"

namespace mg::corpus {

EncodedExample encode_example(const FactoredExample& ex, const text::Vocab& vocab, const TagSet& tags) {
  EncodedExample out;
  out.src = vocab.encode(ex.src_units);
  out.tgt = vocab.encode(ex.tgt_units);
  out.lang_factor = tags.lang_index(ex.tgt_lang);
  out.style_factor = -1;
  for (size_t d = 0; d < tags.domains.size(); ++d) {
    if (factor_name(tags.domains[d]) == ex.style_factor) out.style_factor = static_cast<int>(d);
  }
  if (out.lang_factor < 0 || factor_name(ex.tgt_lang) != ex.lang_factor) {
    fail(ErrorKind::kConfig, "unknown language factor " + ex.lang_factor);
  }
  if (out.style_factor < 0) fail(ErrorKind::kConfig, "unknown style factor " + ex.style_factor);
  out.src_lang = ex.src_lang;
  out.tgt_lang = ex.tgt_lang;
  return out;
}

std::vector<std::vector<size_t>> plan_batches(const std::vector<long>& lengths, long word_budget, uint64_t seed,
                                              int buckets) {
  if (word_budget <= 0) fail(ErrorKind::kInvalidArgument, "word budget must be positive");
  if (buckets < 1) fail(ErrorKind::kInvalidArgument, "bucket count must be positive");
  for (size_t i = 0; i < lengths.size(); ++i) {
    if (lengths[i] > word_budget) {
      fail(ErrorKind::kInvalidArgument, "example " + std::to_string(i) + " has " + std::to_string(lengths[i]) +
                                            " target words, over the batch budget of " + std::to_string(word_budget));
    }
  }
  if (lengths.empty()) return {};

  // Bucket boundaries are quantiles of the length distribution.
  std::vector<long> sorted = lengths;
  std::sort(sorted.begin(), sorted.end());
  std::vector<long> upper;
  for (int b = 1; b < buckets; ++b) upper.push_back(sorted[sorted.size() * b / buckets]);
  auto bucket_of = [&](long len) {
    return static_cast<size_t>(std::upper_bound(upper.begin(), upper.end(), len) - upper.begin());
  };

  std::vector<size_t> order(lengths.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(derive_seed(seed, 0));
  rng.shuffle(order);

  std::vector<std::vector<size_t>> per_bucket(buckets);
  for (size_t i : order) per_bucket[bucket_of(lengths[i])].push_back(i);

  std::vector<std::vector<size_t>> batches;
  for (const auto& bucket : per_bucket) {
    std::vector<size_t> current;
    long words = 0;
    for (size_t i : bucket) {
      if (!current.empty() && words + lengths[i] > word_budget) {
        batches.push_back(std::move(current));
        current.clear();
        words = 0;
      }
      current.push_back(i);
      words += lengths[i];
    }
    if (!current.empty()) batches.push_back(std::move(current));
  }
  Rng batch_rng(derive_seed(seed, 1));
  batch_rng.shuffle(batches);
  return batches;
}

Batch collate(const std::vector<EncodedExample>& examples, const std::vector<size_t>& indices) {
  if (indices.empty()) fail(ErrorKind::kInvalidArgument, "cannot collate an empty batch");
  Batch b;
  b.examples = indices;
  b.size = static_cast<int>(indices.size());
  for (size_t i : indices) {
    const auto& ex = examples.at(i);
    b.src_len = std::max(b.src_len, static_cast<int>(ex.src.size()));
    b.tgt_len = std::max(b.tgt_len, static_cast<int>(ex.tgt.size()) + 1);
    b.target_words += target_words(ex);
  }
  // An empty source still needs one slot so attention has a key to look at.
  b.src_len = std::max(b.src_len, 1);
  b.src_ids.assign(static_cast<size_t>(b.size) * b.src_len, text::Vocab::kPad);
  b.src_valid.assign(b.src_ids.size(), 0);
  b.tgt_in.assign(static_cast<size_t>(b.size) * b.tgt_len, text::Vocab::kPad);
  b.tgt_out.assign(b.tgt_in.size(), text::Vocab::kPad);
  b.tgt_weight.assign(b.tgt_in.size(), 0.0f);
  for (int r = 0; r < b.size; ++r) {
    const auto& ex = examples[indices[r]];
    for (size_t t = 0; t < ex.src.size(); ++t) {
      b.src_ids[r * b.src_len + t] = ex.src[t];
      b.src_valid[r * b.src_len + t] = 1;
    }
    const size_t row = static_cast<size_t>(r) * b.tgt_len;
    b.tgt_in[row] = text::Vocab::kBos;
    for (size_t t = 0; t < ex.tgt.size(); ++t) {
      b.tgt_in[row + t + 1] = ex.tgt[t];
      b.tgt_out[row + t] = ex.tgt[t];
    }
    b.tgt_out[row + ex.tgt.size()] = text::Vocab::kEos;
    for (size_t t = 0; t <= ex.tgt.size(); ++t) b.tgt_weight[row + t] = 1.0f;
    b.lang_factor.push_back(ex.lang_factor);
    b.style_factor.push_back(ex.style_factor);
  }
  return b;
}

std::vector<Batch> make_batches(const std::vector<EncodedExample>& examples, long word_budget, uint64_t seed,
                                int buckets) {
  std::vector<long> lengths;
  lengths.reserve(examples.size());
  for (const auto& ex : examples) lengths.push_back(target_words(ex));
  std::vector<Batch> out;
  for (const auto& idx : plan_batches(lengths, word_budget, seed, buckets)) out.push_back(collate(examples, idx));
  return out;
}

}  // namespace mg::corpus
