#include "config/run_config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <sstream>

#include "common/error.hpp"
#include "common/io.hpp"
#include "text/unicode.hpp"

namespace mg::config {

namespace {

const KeySpec* find_key(const std::string& key) {
  for (const auto& k : known_keys()) {
    if (k.key == key) return &k;
  }
  return nullptr;
}

bool parse_long(const std::string& s, long& out) {
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && ptr == end;
}

bool parse_real(const std::string& s, double& out) {
  if (s.empty()) return false;
  char* end = nullptr;
  out = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size() && std::isfinite(out);
}

std::vector<int> parse_list(const std::string& s, bool& ok) {
  std::vector<int> out;
  ok = !s.empty();
  std::stringstream in(s);
  std::string item;
  while (ok && std::getline(in, item, ',')) {
    long v = 0;
    ok = parse_long(text::normalize_whitespace(item), v);
    out.push_back(static_cast<int>(v));
  }
  return out;
}

// Canonical text of a value, or a config error naming the key.
std::string canonical(const KeySpec& spec, const std::string& raw) {
  const std::string v = text::normalize_whitespace(raw);
  auto bad = [&](const char* what) -> std::string {
    fail(ErrorKind::kConfig, "config key '" + spec.key + "': " + what + ", got '" + v + "'");
  };
  switch (spec.type) {
    case ValueType::kInt: {
      long n = 0;
      if (!parse_long(v, n)) bad("expected an integer");
      return std::to_string(n);
    }
    case ValueType::kReal: {
      double d = 0;
      if (!parse_real(v, d)) bad("expected a number");
      char buf[64];
      auto [end, ec] = std::to_chars(buf, buf + sizeof buf, d);
      return std::string(buf, end);
    }
    case ValueType::kIntList: {
      bool ok = false;
      const auto list = parse_list(v, ok);
      if (!ok) bad("expected a comma-separated integer list");
      std::string out;
      for (size_t i = 0; i < list.size(); ++i) out += (i ? "," : "") + std::to_string(list[i]);
      return out;
    }
    case ValueType::kText:
      return v;
  }
  return v;
}

}  // namespace

const std::vector<KeySpec>& known_keys() {
  using T = ValueType;
  static const std::vector<KeySpec> kKeys = {
      {"seed", T::kInt, "1", "random seed for every seeded step"},
      {"subword_vocab", T::kInt, "512", "subword vocabulary size"},
      {"balance_cap", T::kInt, "0", "max pairs per (src, tgt, domain) stream; 0 disables balancing"},
      {"clean_max_len", T::kInt, "100", "drop pairs with a side longer than this (tokens)"},
      {"clean_max_ratio", T::kReal, "9", "drop pairs whose length ratio exceeds this"},
      {"layers", T::kInt, "2", "encoder and decoder layers"},
      {"heads", T::kInt, "4", "attention heads"},
      {"model_dim", T::kInt, "64", "model width"},
      {"ff_dim", T::kInt, "128", "feed-forward width"},
      {"factor_dim", T::kInt, "4", "width of each factor embedding"},
      {"max_positions", T::kInt, "512", "longest sequence in units"},
      {"dropout", T::kReal, "0.1", "transformer dropout"},
      {"label_smoothing", T::kReal, "0.1", "label smoothing"},
      {"lr", T::kReal, "0.0002", "initial learning rate"},
      {"decay", T::kReal, "0.7", "learning-rate factor on a plateau"},
      {"plateau_patience", T::kInt, "8", "stale checkpoints before decay"},
      {"stop_patience", T::kInt, "32", "stale checkpoints before stopping"},
      {"checkpoint_interval", T::kInt, "200", "updates between validations"},
      {"max_epochs", T::kInt, "20", "epoch limit"},
      {"max_updates", T::kInt, "0", "update limit; 0 means none"},
      {"batch_words", T::kInt, "400", "target units per batch"},
      {"clip_norm", T::kReal, "1", "global gradient norm cap; <= 0 disables"},
      {"beam", T::kInt, "5", "beam width"},
      {"length_alpha", T::kReal, "1", "length normalization exponent"},
      {"clf_embedding_dim", T::kInt, "300", "classifier embedding width"},
      {"clf_filter_widths", T::kIntList, "3,4,5", "classifier filter widths"},
      {"clf_filters", T::kInt, "256", "filters per width"},
      {"clf_dropout", T::kReal, "0.5", "classifier dropout"},
      {"clf_lr", T::kReal, "0.0005", "classifier learning rate"},
      {"clf_batch_size", T::kInt, "32", "classifier batch size"},
      {"clf_max_epochs", T::kInt, "10", "classifier epoch limit"},
      {"clf_patience", T::kInt, "3", "classifier epochs without improvement before stopping"},
      {"clf_valid_fraction", T::kReal, "0.2", "classifier validation share"},
      {"port", T::kInt, "8080", "service port"},
  };
  return kKeys;
}

RunConfig::RunConfig() {
  for (const auto& k : known_keys()) values_[k.key] = canonical(k, k.default_value);
}

void RunConfig::set(const std::string& key, const std::string& value) {
  const KeySpec* spec = find_key(key);
  if (!spec) fail(ErrorKind::kConfig, "unknown config key '" + key + "'");
  const std::string previous = values_[key];
  values_[key] = canonical(*spec, value);
  try {
    validate();
  } catch (const Error& e) {
    values_[key] = previous;
    fail(ErrorKind::kConfig, "config key '" + key + "' = '" + text::normalize_whitespace(value) + "': " + e.what());
  }
}

void RunConfig::validate() const {
  model::ModelConfig m = model_config();
  m.token_vocab = 5;
  m.langs = {"xx"};
  m.domains = {"xx"};
  m.validate();
  train::validate_options(train_options());
  classifier_config().validate();
  auto need = [](bool ok, const std::string& what) {
    if (!ok) fail(ErrorKind::kConfig, what);
  };
  need(get_int("subword_vocab") >= 1, "subword_vocab must be >= 1");
  need(get_int("balance_cap") >= 0, "balance_cap must be >= 0");
  need(get_int("clean_max_len") >= 1, "clean_max_len must be >= 1");
  need(get_real("clean_max_ratio") >= 1.0, "clean_max_ratio must be >= 1");
  need(get_int("beam") >= 1, "beam must be >= 1");
  need(get_real("length_alpha") >= 0.0, "length_alpha must be >= 0");
  need(get_int("seed") >= 0, "seed must be >= 0");
  need(get_int("port") >= 0 && get_int("port") <= 65535, "port must be in [0, 65535]");
}

const std::string& RunConfig::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) fail(ErrorKind::kConfig, "unknown config key '" + key + "'");
  return it->second;
}

long RunConfig::get_int(const std::string& key) const {
  long v = 0;
  if (!parse_long(get(key), v)) fail(ErrorKind::kConfig, "config key '" + key + "' is not an integer");
  return v;
}

double RunConfig::get_real(const std::string& key) const {
  double v = 0;
  if (!parse_real(get(key), v)) fail(ErrorKind::kConfig, "config key '" + key + "' is not a number");
  return v;
}

std::vector<int> RunConfig::get_int_list(const std::string& key) const {
  bool ok = false;
  auto v = parse_list(get(key), ok);
  if (!ok) fail(ErrorKind::kConfig, "config key '" + key + "' is not an integer list");
  return v;
}

std::string RunConfig::echo() const {
  std::string out;
  for (const auto& k : known_keys()) out += k.key + " = " + values_.at(k.key) + "\n";
  return out;
}

RunConfig RunConfig::parse(const std::string& content, const std::string& origin) {
  RunConfig cfg;
  std::map<std::string, int> seen;
  std::istringstream in(content);
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const std::string where = origin + ":" + std::to_string(number);
    if (const size_t hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string trimmed = text::normalize_whitespace(line);
    if (trimmed.empty()) continue;
    const size_t eq = trimmed.find('=');
    if (eq == std::string::npos) fail(ErrorKind::kConfig, where + ": expected 'key = value', got '" + trimmed + "'");
    const std::string key = text::normalize_whitespace(trimmed.substr(0, eq));
    const std::string value = trimmed.substr(eq + 1);
    if (!find_key(key)) fail(ErrorKind::kConfig, where + ": unknown config key '" + key + "'");
    if (auto it = seen.find(key); it != seen.end()) {
      cfg.warnings_.push_back(where + ": duplicate key '" + key + "' (first set on line " + std::to_string(it->second) +
                              "); the last value wins");
    }
    seen[key] = number;
    try {
      cfg.values_[key] = canonical(*find_key(key), value);
    } catch (const Error& e) {
      fail(ErrorKind::kConfig, where + ": " + e.what());
    }
  }
  // Range and cross-key checks run once all lines are in, so key order in
  // the file does not matter. The error points at the first line whose
  // reset to the default makes the configuration valid.
  try {
    cfg.validate();
  } catch (const Error& e) {
    std::vector<std::pair<int, std::string>> by_line;
    for (const auto& [key, line_no] : seen) by_line.push_back({line_no, key});
    std::sort(by_line.begin(), by_line.end());
    const RunConfig defaults;
    for (const auto& [line_no, key] : by_line) {
      RunConfig trial = cfg;
      trial.values_[key] = defaults.values_.at(key);
      try {
        trial.validate();
      } catch (const Error&) {
        continue;
      }
      fail(ErrorKind::kConfig, origin + ":" + std::to_string(line_no) + ": config key '" + key + "' = '" +
                                   cfg.values_.at(key) + "': " + e.what());
    }
    fail(ErrorKind::kConfig, origin + ": " + e.what());
  }
  return cfg;
}

RunConfig RunConfig::load(const std::string& path) { return parse(read_file(path), path); }

model::ModelConfig RunConfig::model_config() const {
  model::ModelConfig m;
  m.layers = static_cast<int>(get_int("layers"));
  m.heads = static_cast<int>(get_int("heads"));
  m.model_dim = static_cast<int>(get_int("model_dim"));
  m.ff_dim = static_cast<int>(get_int("ff_dim"));
  m.factor_dim = static_cast<int>(get_int("factor_dim"));
  m.max_positions = static_cast<int>(get_int("max_positions"));
  m.dropout = static_cast<float>(get_real("dropout"));
  m.label_smoothing = static_cast<float>(get_real("label_smoothing"));
  return m;
}

train::TrainOptions RunConfig::train_options() const {
  train::TrainOptions o;
  o.lr = get_real("lr");
  o.decay = get_real("decay");
  o.plateau_patience = static_cast<int>(get_int("plateau_patience"));
  o.stop_patience = static_cast<int>(get_int("stop_patience"));
  o.checkpoint_interval = static_cast<int>(get_int("checkpoint_interval"));
  o.max_epochs = static_cast<int>(get_int("max_epochs"));
  o.max_updates = get_int("max_updates");
  o.batch_words = get_int("batch_words");
  o.clip_norm = get_real("clip_norm");
  o.seed = static_cast<uint64_t>(get_int("seed"));
  return o;
}

styleclf::ClassifierConfig RunConfig::classifier_config() const {
  styleclf::ClassifierConfig c;
  c.embedding_dim = static_cast<int>(get_int("clf_embedding_dim"));
  c.filter_widths = get_int_list("clf_filter_widths");
  c.filters_per_width = static_cast<int>(get_int("clf_filters"));
  c.dropout = static_cast<float>(get_real("clf_dropout"));
  c.lr = get_real("clf_lr");
  c.batch_size = static_cast<int>(get_int("clf_batch_size"));
  c.max_epochs = static_cast<int>(get_int("clf_max_epochs"));
  c.patience = static_cast<int>(get_int("clf_patience"));
  c.valid_fraction = get_real("clf_valid_fraction");
  return c;
}

}  // namespace mg::config
