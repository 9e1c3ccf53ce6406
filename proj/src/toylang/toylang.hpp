#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "corpus/corpus.hpp"
#include "metrics/edits.hpp"

namespace mg::toylang {

enum class Number { kSingular, kPlural };
enum class Addressee { kNone, kInformal, kFormal };
enum class Style { kFormal, kInformal };
enum class WordOrder { kSVO, kSOV, kVSO };
enum class Agreement { kNone, kSubject, kObject };
enum class Pos { kPronoun, kAgent, kObject, kVerb, kAdverb, kPunct };

struct Inventory {
  int agents = 10;
  int objects = 10;
  int verbs = 8;
  int adverbs = 6;
};

struct ConceptSentence {
  int subject = 0;  // agent meaning
  int verb = 0;
  int object = 0;   // object meaning
  Number subject_num = Number::kSingular;
  Number object_num = Number::kSingular;
  int adverb = -1;  // -1: none
  Addressee addressee = Addressee::kNone;

  bool operator==(const ConceptSentence&) const = default;
  auto operator<=>(const ConceptSentence&) const = default;
};

// What a surface word form means inside one language.
struct WordInfo {
  Pos pos = Pos::kPunct;
  int meaning = -1;
  Number number = Number::kSingular;
  std::optional<Style> style;  // set for style-marked forms
};

struct ToyLanguage {
  std::string tag;
  WordOrder order = WordOrder::kSVO;
  Agreement agreement = Agreement::kNone;
  bool contracts = false;  // informal verbs are contracted
  std::vector<std::string> consonants;
  std::vector<std::string> vowels;
  std::vector<std::string> agents, objects, verbs, adverbs;  // stems
  std::vector<std::string> verbs_short;                      // contracted stems
  std::string plural_suffix;
  std::string agr_singular, agr_plural;
  std::string pronoun_formal, pronoun_informal;
  std::string punct_formal, punct_informal;
  std::map<std::string, WordInfo> forms;  // closure, lowercase

  std::string noun(const std::string& stem, Number n) const;
  std::string verb(int meaning, Number agree_with, Style style) const;
  std::string letters() const;  // every letter the language uses
};

// Fixed per-language definitions; n in {2, 3}.
std::vector<ToyLanguage> languages(int n, const Inventory& inv = {});
const ToyLanguage& language_by_tag(const std::vector<ToyLanguage>& langs, const std::string& tag);

std::string domain_of(Style style);  // formal -> ep, informal -> os
Style style_of(const std::string& domain);

// Realized lowercase words with their roles; the first word is capitalized
// in the surface string.
struct Realization {
  std::vector<std::string> tokens;
  std::vector<Pos> roles;
};

Realization realize_tokens(const ConceptSentence& cs, const ToyLanguage& lang, Style style);
std::string realize(const ConceptSentence& cs, const ToyLanguage& lang, Style style);

// Every word form the language can produce, lowercase.
const std::map<std::string, WordInfo>& closure(const ToyLanguage& lang);

// Share of word tokens (punctuation excluded) belonging to `lang`; 1 for a
// sentence without words.
double language_identity(const std::string& sentence, const ToyLanguage& lang);
bool word_in_language(const std::string& token, const ToyLanguage& lang);

// Concept-level reading of a sentence in `lang`; nullopt if some word is
// outside the language or a role is missing.
std::optional<ConceptSentence> analyze(const std::string& sentence, const ToyLanguage& lang);

struct ToyCorpus {
  std::vector<ConceptSentence> concepts;
  std::vector<corpus::SentencePair> pairs;
};

// Distinct meaning sentences drawn by seed.
std::vector<ConceptSentence> sample_concepts(size_t n, uint64_t seed, const Inventory& inv = {});

// Pairs for every unordered language pair and both styles, realized for each
// meaning: C(n_langs, 2) * 2 * n pairs.
std::vector<corpus::SentencePair> realize_pairs(const std::vector<ConceptSentence>& concepts,
                                                const std::vector<ToyLanguage>& langs);
ToyCorpus generate_corpus(int n_langs, size_t n, uint64_t seed, const Inventory& inv = {});

enum class ErrorType { kSpelling, kLex, kGrammar, kOrder };
std::string to_string(ErrorType type);
ErrorType parse_error_type(const std::string& name);

struct Injection {
  std::string corrupted;
  std::vector<std::string> corrupted_tokens;
  std::vector<std::string> clean_tokens;
  metrics::EditSet gold;
  std::vector<ErrorType> applied;
  std::vector<std::pair<ErrorType, std::string>> skipped;  // type and reason
};

// `sentence` must be realized by `lang`; tokens are the tokenizer's output.
Injection inject_errors(const std::string& sentence, const ToyLanguage& lang, const std::vector<ErrorType>& types,
                        uint64_t seed);

// Mixes constituents of two languages: word order and style markers follow
// `base`; a non-empty proper subset of content words comes from `other`.
std::string code_switch(const ConceptSentence& cs, const ToyLanguage& base, const ToyLanguage& other, Style style,
                        uint64_t seed);

}  // namespace mg::toylang
