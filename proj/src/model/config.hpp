#pragma once

#include <string>
#include <vector>

namespace mg::model {

struct ModelConfig {
  int layers = 2;
  int heads = 4;
  int model_dim = 64;
  int ff_dim = 128;
  int max_positions = 512;
  int token_vocab = 0;
  int factor_dim = 4;
  float dropout = 0.1f;
  float label_smoothing = 0.1f;
  std::vector<std::string> langs;    // language factor inventory
  std::vector<std::string> domains;  // style factor inventory

  int lang_factors() const { return static_cast<int>(langs.size()); }
  int style_factors() const { return static_cast<int>(domains.size()); }

  // Throws a config error naming the offending field.
  void validate() const;

  // `key=value` lines; parse rejects unknown keys.
  std::string serialize() const;
  static ModelConfig parse(const std::string& text);
};

}  // namespace mg::model
