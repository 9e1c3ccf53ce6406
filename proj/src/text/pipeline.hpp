#pragma once

#include <map>
#include <string>
#include <vector>

#include "text/subwords.hpp"
#include "text/truecaser.hpp"
#include "text/vocab.hpp"

namespace mg::text {

// tokenize -> truecase -> subwords, and the way back.
struct Pipeline {
  std::map<std::string, TruecaseModel> truecasers;  // per language
  SubwordModel subwords;
  Vocab vocab;

  std::vector<std::string> words(const std::string& text, const std::string& lang) const;
  std::vector<std::string> units(const std::string& text, const std::string& lang) const;
  std::string restore(const std::vector<std::string>& units, const std::string& lang) const;

  // File names inside a model or prepared-data directory.
  static std::string subwords_file(const std::string& dir) { return dir + "/subwords.bpe"; }
  static std::string vocab_file(const std::string& dir) { return dir + "/vocab.txt"; }
  static std::string truecase_file(const std::string& dir, const std::string& lang) { return dir + "/truecase." + lang; }

  void save(const std::string& dir) const;
  static Pipeline load(const std::string& dir, const std::vector<std::string>& langs);
};

}  // namespace mg::text
