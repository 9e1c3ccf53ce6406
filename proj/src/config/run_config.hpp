#pragma once

#include <map>
#include <string>
#include <vector>

#include "model/config.hpp"
#include "styleclf/classifier.hpp"
#include "train/trainer.hpp"

namespace mg::config {

enum class ValueType { kInt, kReal, kText, kIntList };

struct KeySpec {
  std::string key;
  ValueType type;
  std::string default_value;
  std::string help;
};

// Every recognized key with its default, in echo order.
const std::vector<KeySpec>& known_keys();

// Flat `key = value` settings. Values are stored as canonical text and
// validated on every set.
class RunConfig {
 public:
  RunConfig();  // all defaults

  // Throws a config error naming the key for an unknown key or bad value.
  void set(const std::string& key, const std::string& value);
  const std::string& get(const std::string& key) const;
  long get_int(const std::string& key) const;
  double get_real(const std::string& key) const;
  std::vector<int> get_int_list(const std::string& key) const;

  // Range checks of every module; throws a config error.
  void validate() const;

  // Effective configuration in the file format, one `key = value` per line.
  std::string echo() const;

  // Notices such as duplicate keys, collected while parsing.
  const std::vector<std::string>& warnings() const { return warnings_; }

  // Parses file content on top of the defaults; errors name origin and line.
  static RunConfig parse(const std::string& content, const std::string& origin = "<config>");
  static RunConfig load(const std::string& path);

  // Module views; each runs the module's own validation.
  model::ModelConfig model_config() const;  // without vocabulary and tags
  train::TrainOptions train_options() const;
  styleclf::ClassifierConfig classifier_config() const;

 private:
  std::map<std::string, std::string> values_;
  std::vector<std::string> warnings_;
};

}  // namespace mg::config
