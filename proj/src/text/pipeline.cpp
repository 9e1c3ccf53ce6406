#include "text/pipeline.hpp"

#include "common/error.hpp"
#include "text/tokenizer.hpp"

namespace mg::text {

std::vector<std::string> Pipeline::words(const std::string& text, const std::string& lang) const {
  auto it = truecasers.find(lang);
  if (it == truecasers.end()) fail(ErrorKind::kUnknownTag, "no truecase model for language '" + lang + "'");
  return truecase(tokenize(text, lang), it->second);
}

std::vector<std::string> Pipeline::units(const std::string& text, const std::string& lang) const {
  return subwords.apply(words(text, lang));
}

std::string Pipeline::restore(const std::vector<std::string>& units, const std::string& lang) const {
  return detokenize(detruecase(revert_subwords(units, subwords.joiner())), lang);
}

void Pipeline::save(const std::string& dir) const {
  subwords.save(subwords_file(dir));
  vocab.save(vocab_file(dir));
  for (const auto& [lang, model] : truecasers) model.save(truecase_file(dir, lang));
}

Pipeline Pipeline::load(const std::string& dir, const std::vector<std::string>& langs) {
  Pipeline p;
  p.vocab = Vocab::load(vocab_file(dir));
  p.subwords = SubwordModel::load(subwords_file(dir), p.vocab.alphabet());
  for (const std::string& lang : langs) p.truecasers.emplace(lang, TruecaseModel::load(truecase_file(dir, lang)));
  return p;
}

}  // namespace mg::text
