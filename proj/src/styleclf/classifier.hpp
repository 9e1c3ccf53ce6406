#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "common/rng.hpp"
#include "model/checkpoint.hpp"
#include "model/params.hpp"

namespace mg::styleclf {

struct ClassifierConfig {
  int embedding_dim = 300;
  std::vector<int> filter_widths = {3, 4, 5};
  int filters_per_width = 256;
  float dropout = 0.5f;
  double lr = 5e-4;
  int batch_size = 32;
  int max_epochs = 10;
  int patience = 3;  // epochs without a better validation accuracy
  double valid_fraction = 0.2;
  std::vector<std::string> labels;  // class names, index order

  void validate() const;
  std::string serialize() const;
  static ClassifierConfig parse(const std::string& text);
  int max_width() const;
};

struct LabeledSentence {
  std::string text;
  std::string label;
};

// TSV `sentence<TAB>label`, one per line.
std::vector<LabeledSentence> parse_labeled(const std::string& content, const std::string& origin = "<tsv>");
std::vector<LabeledSentence> read_labeled(const std::string& path);

struct Prediction {
  int index = 0;
  std::string label;
  std::vector<double> probabilities;
};

// Word-level CNN: embeddings, one convolution per filter width with ReLU and
// max-over-time pooling, concatenation, dropout, one linear layer to logits.
class StyleClassifier {
 public:
  StyleClassifier(ClassifierConfig config, std::vector<std::string> words, uint64_t seed);

  const ClassifierConfig& config() const { return config_; }
  const std::vector<std::string>& words() const { return words_; }
  model::ParamStore& params() { return params_; }
  const model::ParamStore& params() const { return params_; }

  // Word ids; 0 is padding, 1 unknown.
  std::vector<int> encode(const std::string& sentence) const;
  // Ids may carry trailing padding (0), which is ignored.
  Prediction predict_ids(const std::vector<int>& ids) const;
  Prediction predict(const std::string& sentence) const;

  // Logits [N x classes] for a batch of id sequences (none empty).
  Var logits(Graph& g, const std::vector<std::vector<int>>& batch, Rng* dropout_rng, bool training);

  model::Checkpoint to_checkpoint(uint64_t seed) const;
  static StyleClassifier from_checkpoint(const model::Checkpoint& ckpt);
  void save(const std::string& path) const;
  static StyleClassifier load(const std::string& path);

 private:
  ClassifierConfig config_;
  std::vector<std::string> words_;
  std::unordered_map<std::string, int> index_;
  model::ParamStore params_;
};

inline constexpr const char* kClassifierMagic = "MGCF";

// Words used as classifier input: tokenizer output, case kept.
std::vector<std::string> classifier_tokens(const std::string& sentence);

struct TrainedClassifier {
  std::unique_ptr<StyleClassifier> classifier;
  double valid_accuracy = 0.0;
  std::vector<double> accuracy_trace;  // validation accuracy per epoch
};

// Splits off valid_fraction of the data by seed, trains with Adam and keeps
// the epoch with the best validation accuracy.
TrainedClassifier train_classifier(const std::vector<LabeledSentence>& data, ClassifierConfig config, uint64_t seed,
                                   const std::function<void(const std::string&)>& log = {});

double accuracy(const StyleClassifier& clf, const std::vector<LabeledSentence>& data);

// 100 * share of sentences predicted as `target_label`.
double transfer_rate(const StyleClassifier& clf, const std::vector<std::string>& sentences,
                     const std::string& target_label);

}  // namespace mg::styleclf
