#include "styleclf/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "common/error.hpp"
#include "common/io.hpp"
#include "common/rng.hpp"
#include "tensor/adam.hpp"
#include "tensor/ops.hpp"
#include "text/tokenizer.hpp"
#include "text/unicode.hpp"

namespace mg::styleclf {

namespace {

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

std::string join_ints(const std::vector<int>& v) {
  std::string out;
  for (size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + std::to_string(v[i]);
  return out;
}

Tensor uniform_init(Rng& rng, Shape shape, double bound) {
  Tensor t(std::move(shape));
  for (size_t i = 0; i < t.size(); ++i) t[i] = static_cast<float>(rng.uniform(-bound, bound));
  return t;
}

int label_index(const ClassifierConfig& c, const std::string& label) {
  auto it = std::find(c.labels.begin(), c.labels.end(), label);
  if (it == c.labels.end()) {
    fail(ErrorKind::kUnknownTag, "unknown style label '" + label + "' (available: " + text::join(c.labels, ", ") + ")");
  }
  return static_cast<int>(it - c.labels.begin());
}

std::vector<int> strip_padding(std::vector<int> ids) {
  while (!ids.empty() && ids.back() == 0) ids.pop_back();
  return ids;
}

}  // namespace

void ClassifierConfig::validate() const {
  auto need = [](bool ok, const std::string& what) {
    if (!ok) fail(ErrorKind::kConfig, "classifier config: " + what);
  };
  need(embedding_dim >= 1, "embedding_dim must be >= 1");
  need(!filter_widths.empty(), "no filter widths");
  for (int w : filter_widths) need(w >= 1, "filter widths must be >= 1");
  need(filters_per_width >= 1, "filters_per_width must be >= 1");
  need(dropout >= 0.0f && dropout < 1.0f, "dropout must be in [0, 1)");
  need(lr > 0.0, "lr must be positive");
  need(batch_size >= 1, "batch_size must be >= 1");
  need(max_epochs >= 1, "max_epochs must be >= 1");
  need(patience >= 1, "patience must be >= 1");
  need(valid_fraction > 0.0 && valid_fraction < 1.0, "valid_fraction must be in (0, 1)");
}

int ClassifierConfig::max_width() const { return *std::max_element(filter_widths.begin(), filter_widths.end()); }

std::string ClassifierConfig::serialize() const {
  std::ostringstream o;
  o.precision(17);
  o << "embedding_dim=" << embedding_dim << "\n"
    << "filter_widths=" << join_ints(filter_widths) << "\n"
    << "filters_per_width=" << filters_per_width << "\n"
    << "dropout=" << dropout << "\n"
    << "lr=" << lr << "\n"
    << "batch_size=" << batch_size << "\n"
    << "max_epochs=" << max_epochs << "\n"
    << "patience=" << patience << "\n"
    << "valid_fraction=" << valid_fraction << "\n"
    << "labels=" << text::join(labels, ",") << "\n";
  return o.str();
}

ClassifierConfig ClassifierConfig::parse(const std::string& content) {
  ClassifierConfig c;
  std::istringstream in(content);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const size_t eq = line.find('=');
    if (eq == std::string::npos) fail(ErrorKind::kParse, "classifier config: bad line '" + line + "'");
    const std::string key = line.substr(0, eq), value = line.substr(eq + 1);
    try {
      if (key == "embedding_dim") c.embedding_dim = std::stoi(value);
      else if (key == "filter_widths") {
        c.filter_widths.clear();
        for (const auto& w : split_list(value)) c.filter_widths.push_back(std::stoi(w));
      } else if (key == "filters_per_width") c.filters_per_width = std::stoi(value);
      else if (key == "dropout") c.dropout = std::stof(value);
      else if (key == "lr") c.lr = std::stod(value);
      else if (key == "batch_size") c.batch_size = std::stoi(value);
      else if (key == "max_epochs") c.max_epochs = std::stoi(value);
      else if (key == "patience") c.patience = std::stoi(value);
      else if (key == "valid_fraction") c.valid_fraction = std::stod(value);
      else if (key == "labels") c.labels = split_list(value);
      else fail(ErrorKind::kParse, "classifier config: unknown key '" + key + "'");
    } catch (const std::logic_error&) {
      fail(ErrorKind::kParse, "classifier config: bad value for '" + key + "'");
    }
  }
  c.validate();
  return c;
}

std::vector<LabeledSentence> parse_labeled(const std::string& content, const std::string& origin) {
  std::vector<LabeledSentence> out;
  std::istringstream in(content);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const size_t tab = line.rfind('\t');
    if (tab == std::string::npos || tab + 1 == line.size()) {
      fail(ErrorKind::kParse, origin + ":" + std::to_string(line_no) + ": expected 'sentence<TAB>label'");
    }
    out.push_back({line.substr(0, tab), line.substr(tab + 1)});
  }
  return out;
}

std::vector<LabeledSentence> read_labeled(const std::string& path) { return parse_labeled(read_file(path), path); }

std::vector<std::string> classifier_tokens(const std::string& sentence) { return text::tokenize(sentence, ""); }

StyleClassifier::StyleClassifier(ClassifierConfig config, std::vector<std::string> words, uint64_t seed)
    : config_(std::move(config)), words_(std::move(words)) {
  config_.validate();
  if (config_.labels.size() < 2) fail(ErrorKind::kConfig, "classifier config: need at least 2 labels");
  for (size_t i = 0; i < words_.size(); ++i) index_.emplace(words_[i], static_cast<int>(i) + 2);
  Rng rng(seed);
  const int e = config_.embedding_dim, f = config_.filters_per_width;
  const int v = static_cast<int>(words_.size()) + 2;
  Tensor emb = uniform_init(rng, {v, e}, 0.1);
  std::fill(emb.mutable_ptr(), emb.mutable_ptr() + e, 0.0f);  // padding row
  params_.add("emb", std::move(emb));
  for (int w : config_.filter_widths) {
    const double bound = std::sqrt(6.0 / (w * e + f));
    params_.add("conv" + std::to_string(w) + ".w", uniform_init(rng, {w * e, f}, bound));
    params_.add("conv" + std::to_string(w) + ".b", Tensor({f}, 0.0f));
  }
  const int pooled = f * static_cast<int>(config_.filter_widths.size());
  const int classes = static_cast<int>(config_.labels.size());
  params_.add("out.w", uniform_init(rng, {pooled, classes}, std::sqrt(6.0 / (pooled + classes))));
  params_.add("out.b", Tensor({classes}, 0.0f));
}

std::vector<int> StyleClassifier::encode(const std::string& sentence) const {
  std::vector<int> ids;
  for (const auto& t : classifier_tokens(sentence)) {
    auto it = index_.find(t);
    ids.push_back(it == index_.end() ? 1 : it->second);
  }
  return ids;
}

Var StyleClassifier::logits(Graph& g, const std::vector<std::vector<int>>& batch, Rng* dropout_rng, bool training) {
  Var emb = g.parameter(params_.get("emb"));
  const int vocab = emb.value().rows();
  for (const auto& ids : batch) {
    if (ids.empty()) fail(ErrorKind::kInvalidArgument, "classifier: empty sentence in batch");
    for (int id : ids) {
      if (id < 0 || id >= vocab) fail(ErrorKind::kInvalidArgument, "classifier: word id " + std::to_string(id) + " out of range");
    }
  }
  std::vector<Var> pooled;
  for (int w : config_.filter_widths) {
    // Windows start at 0..L-w; a sentence shorter than w gets one window
    // padded with id 0, whose embedding row is kept at zero.
    std::vector<std::vector<int>> columns(w);
    std::vector<int> offsets{0};
    for (const auto& ids : batch) {
      const int len = static_cast<int>(ids.size());
      const int windows = std::max(1, len - w + 1);
      for (int s = 0; s < windows; ++s) {
        for (int k = 0; k < w; ++k) columns[k].push_back(s + k < len ? ids[s + k] : 0);
      }
      offsets.push_back(offsets.back() + windows);
    }
    std::vector<Var> parts;
    for (int k = 0; k < w; ++k) parts.push_back(ops::gather_rows(emb, columns[k]));
    Var x = parts.size() == 1 ? parts[0] : ops::concat_cols(parts);
    const std::string name = "conv" + std::to_string(w);
    Var h = ops::relu(ops::add_bias(ops::matmul(x, g.parameter(params_.get(name + ".w"))), g.parameter(params_.get(name + ".b"))));
    pooled.push_back(ops::segment_max(h, offsets));
  }
  Var features = pooled.size() == 1 ? pooled[0] : ops::concat_cols(pooled);
  if (training && config_.dropout > 0.0f) features = ops::dropout(features, config_.dropout, dropout_rng);
  return ops::add_bias(ops::matmul(features, g.parameter(params_.get("out.w"))), g.parameter(params_.get("out.b")));
}

Prediction StyleClassifier::predict_ids(const std::vector<int>& raw) const {
  const std::vector<int> ids = strip_padding(raw);
  std::vector<double> z;
  if (ids.empty()) {
    // No words: only the output bias decides.
    for (float b : params_.get("out.b").value.data()) z.push_back(b);
  } else {
    Graph g(false);
    Var out = const_cast<StyleClassifier*>(this)->logits(g, {ids}, nullptr, false);
    for (int c = 0; c < out.value().cols(); ++c) z.push_back(out.value().at(0, c));
  }
  const double mx = *std::max_element(z.begin(), z.end());
  double total = 0.0;
  for (double& v : z) total += (v = std::exp(v - mx));
  Prediction p;
  for (double v : z) p.probabilities.push_back(v / total);
  p.index = static_cast<int>(std::max_element(p.probabilities.begin(), p.probabilities.end()) - p.probabilities.begin());
  p.label = config_.labels[p.index];
  return p;
}

Prediction StyleClassifier::predict(const std::string& sentence) const { return predict_ids(encode(sentence)); }

model::Checkpoint StyleClassifier::to_checkpoint(uint64_t seed) const {
  model::Checkpoint c;
  c.magic = kClassifierMagic;
  c.config = config_.serialize();
  for (const auto& w : words_) c.config += "word=" + w + "\n";
  for (size_t i = 0; i < params_.size(); ++i) c.params.push_back({params_.at(i).name, params_.at(i).value});
  c.seed = seed;
  return c;
}

StyleClassifier StyleClassifier::from_checkpoint(const model::Checkpoint& ckpt) {
  std::string config_text;
  std::vector<std::string> words;
  std::istringstream in(ckpt.config);
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("word=", 0) == 0) {
      words.push_back(line.substr(5));
    } else {
      config_text += line + "\n";
    }
  }
  StyleClassifier clf(ClassifierConfig::parse(config_text), std::move(words), 0);
  if (ckpt.params.size() != clf.params_.size()) fail(ErrorKind::kParse, "classifier checkpoint: parameter count mismatch");
  for (const auto& p : ckpt.params) {
    if (!clf.params_.contains(p.name)) fail(ErrorKind::kParse, "classifier checkpoint: unexpected parameter " + p.name);
    Parameter& dst = clf.params_.get(p.name);
    if (dst.value.shape() != p.value.shape()) fail(ErrorKind::kParse, "classifier checkpoint: bad shape for " + p.name);
    dst.value = p.value;
  }
  return clf;
}

void StyleClassifier::save(const std::string& path) const { to_checkpoint(0).save(path); }

StyleClassifier StyleClassifier::load(const std::string& path) {
  return from_checkpoint(model::Checkpoint::load(path, kClassifierMagic));
}

double accuracy(const StyleClassifier& clf, const std::vector<LabeledSentence>& data) {
  if (data.empty()) fail(ErrorKind::kInvalidArgument, "accuracy: no sentences");
  size_t right = 0;
  for (const auto& s : data) right += clf.predict(s.text).label == s.label;
  return static_cast<double>(right) / static_cast<double>(data.size());
}

double transfer_rate(const StyleClassifier& clf, const std::vector<std::string>& sentences,
                     const std::string& target_label) {
  if (sentences.empty()) fail(ErrorKind::kInvalidArgument, "transfer rate: no sentences");
  label_index(clf.config(), target_label);
  size_t hits = 0;
  for (const auto& s : sentences) hits += clf.predict(s).label == target_label;
  return 100.0 * static_cast<double>(hits) / static_cast<double>(sentences.size());
}

TrainedClassifier train_classifier(const std::vector<LabeledSentence>& data, ClassifierConfig config, uint64_t seed,
                                   const std::function<void(const std::string&)>& log) {
  if (config.labels.empty()) {
    std::set<std::string> seen;
    for (const auto& s : data) seen.insert(s.label);
    config.labels.assign(seen.begin(), seen.end());
  }
  {
    std::set<std::string> present;
    for (const auto& s : data) present.insert(s.label);
    if (present.size() < 2) fail(ErrorKind::kInvalidArgument, "classifier training needs at least 2 classes");
    for (const auto& s : data) label_index(config, s.label);
  }
  config.validate();

  std::vector<size_t> order(data.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng split_rng(derive_seed(seed, 1));
  split_rng.shuffle(order);
  const size_t n_valid = std::max<size_t>(1, static_cast<size_t>(std::llround(config.valid_fraction * data.size())));
  if (n_valid >= data.size()) fail(ErrorKind::kInvalidArgument, "classifier training needs more sentences");
  std::vector<LabeledSentence> valid, train;
  for (size_t i = 0; i < order.size(); ++i) (i < n_valid ? valid : train).push_back(data[order[i]]);

  std::map<std::string, long> freq;
  for (const auto& s : train) {
    for (const auto& t : classifier_tokens(s.text)) ++freq[t];
  }
  std::vector<std::pair<std::string, long>> ranked(freq.begin(), freq.end());
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<std::string> words;
  for (const auto& [w, n] : ranked) words.push_back(w);

  TrainedClassifier result;
  result.classifier = std::make_unique<StyleClassifier>(config, words, derive_seed(seed, 2));
  StyleClassifier& clf = *result.classifier;
  std::vector<std::vector<int>> ids;
  std::vector<int> labels;
  for (const auto& s : train) {
    auto e = clf.encode(s.text);
    if (e.empty()) continue;
    ids.push_back(std::move(e));
    labels.push_back(label_index(config, s.label));
  }
  if (ids.empty()) fail(ErrorKind::kInvalidArgument, "classifier training: every training sentence is empty");

  const auto params = clf.params().all();
  AdamState adam;
  adam.lr = config.lr;
  adam.beta2 = 0.999;
  adam.eps = 1e-8;
  Parameter& emb = clf.params().get("emb");
  const int e = config.embedding_dim;
  std::vector<Tensor> best_values;
  double best_acc = -1.0;
  int stale = 0;
  uint64_t update = 0;
  for (int epoch = 0; epoch < config.max_epochs; ++epoch) {
    std::vector<size_t> perm(ids.size());
    for (size_t i = 0; i < perm.size(); ++i) perm[i] = i;
    Rng epoch_rng(derive_seed(seed, 100 + static_cast<uint64_t>(epoch)));
    epoch_rng.shuffle(perm);
    for (size_t start = 0; start < perm.size(); start += config.batch_size) {
      const size_t end = std::min(perm.size(), start + static_cast<size_t>(config.batch_size));
      std::vector<std::vector<int>> batch;
      std::vector<int> targets;
      for (size_t k = start; k < end; ++k) {
        batch.push_back(ids[perm[k]]);
        targets.push_back(labels[perm[k]]);
      }
      clf.params().zero_grad();
      Rng dropout(derive_seed(derive_seed(seed, 3), update++));
      Graph g;
      Var z = clf.logits(g, batch, &dropout, true);
      Var loss = ops::cross_entropy(z, targets, std::vector<float>(targets.size(), 1.0f), 0.0f);
      g.backward(ops::scale(loss, 1.0f / static_cast<float>(targets.size())));
      adam_step(params, adam);
      std::fill(emb.value.mutable_ptr(), emb.value.mutable_ptr() + e, 0.0f);
    }
    const double acc = accuracy(clf, valid);
    result.accuracy_trace.push_back(acc);
    if (log) log("epoch " + std::to_string(epoch + 1) + " valid_accuracy " + std::to_string(acc));
    if (acc > best_acc) {
      best_acc = acc;
      stale = 0;
      best_values.clear();
      for (const Parameter* p : params) best_values.push_back(p->value);
    } else if (++stale >= config.patience) {
      break;
    }
  }
  for (size_t i = 0; i < params.size(); ++i) params[i]->value = best_values[i];
  result.valid_accuracy = best_acc;
  return result;
}

}  // namespace mg::styleclf
