#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "decode/rewriter.hpp"
#include "styleclf/classifier.hpp"
#include "toylang/toylang.hpp"
#include "train/trainer.hpp"

namespace mg::toylang {

// Concepts split into disjoint train/valid/test sets, realized as
// cross-lingual pairs for every language pair and both styles.
struct ToyData {
  std::vector<ToyLanguage> langs;
  std::vector<ConceptSentence> train, valid, test;
  std::vector<corpus::SentencePair> train_pairs, valid_pairs, test_pairs;
};

ToyData make_toy_data(int n_langs, size_t train, size_t valid, size_t test, uint64_t seed);

// Writes train.tsv, valid.tsv, test.tsv, styles.tsv (sentence<TAB>style),
// codeswitch.tsv and, per language and error kind, gec/<lang>.<kind>.{src,ref,m2}.
void write_toy_tree(const ToyData& data, const std::string& dir, uint64_t seed);

struct ToyModelOptions {
  int layers = 2;
  int model_dim = 64;
  int heads = 4;
  int ff_dim = 128;
  float dropout = 0.3f;
  int subword_vocab = 512;
  train::TrainOptions train;

  ToyModelOptions();
};

struct ToyModel {
  std::unique_ptr<decode::Bundle> bundle;
  train::TrainResult result;
  double train_seconds = 0.0;
};

// Trains pipeline and model on the cross-lingual training pairs (both
// directions); the bundle holds the best checkpoint.
ToyModel train_toy_model(const ToyData& data, const ToyModelOptions& opts);

using Rewriter = std::function<std::string(const std::string& text, const std::string& source_lang,
                                           const std::string& target_lang, const std::string& style)>;
Rewriter bundle_rewriter(const decode::Bundle& bundle, int beam = 5);

struct CrossLingualReport {
  double bleu = 0.0;
  double exact = 0.0;
  size_t sentences = 0;
};
// Every cross-lingual direction and both styles for the first `concepts` test concepts.
CrossLingualReport evaluate_crosslingual(const ToyData& data, const Rewriter& rw, size_t concepts);

struct MonolingualReport {
  double token_identity = 0.0;  // share of output word tokens in the requested language
  double fully_in_language = 0.0;  // share of outputs with every word in the requested language
  double exact_copy = 0.0;
  size_t sentences = 0;
};
MonolingualReport evaluate_monolingual(const ToyData& data, const Rewriter& rw, size_t concepts);

struct RestorationReport {
  std::map<ErrorType, size_t> restored, attempted;
  double rate(ErrorType t) const;
};
// Injects each error kind into test sentences and asks for a monolingual
// rewrite in the same style; a case counts when the clean sentence comes back.
RestorationReport evaluate_restoration(const ToyData& data, const Rewriter& rw, size_t concepts, uint64_t seed);

struct CodeSwitchReport {
  size_t cases = 0;
  size_t fully_rewritten = 0;  // every output word in the requested language
  double rate() const { return cases ? static_cast<double>(fully_rewritten) / static_cast<double>(cases) : 0.0; }
};
// Case i mixes two languages and requests language i mod n.
CodeSwitchReport evaluate_code_switching(const ToyData& data, const Rewriter& rw, size_t cases, uint64_t seed);

// Sentences of every language in both styles, labeled "formal"/"informal".
std::vector<styleclf::LabeledSentence> style_sentences(const ToyData& data, const std::vector<ConceptSentence>& concepts);

struct StyleTransferReport {
  // Keyed by target style: transfer rate of the originals (written in the
  // other style) and of their monolingual rewrites into the target style.
  std::map<std::string, double> original_rate, transferred_rate;
  size_t sentences_per_direction = 0;
};
StyleTransferReport evaluate_style_transfer(const ToyData& data, const Rewriter& rw,
                                            const styleclf::StyleClassifier& clf, size_t concepts);

std::string style_label(Style s);

}  // namespace mg::toylang
