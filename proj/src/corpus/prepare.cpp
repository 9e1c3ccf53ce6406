#include "corpus/prepare.hpp"

#include <filesystem>
#include <map>
#include <set>

#include "common/error.hpp"
#include "text/tokenizer.hpp"

namespace mg::corpus {

text::Pipeline train_pipeline(const std::vector<SentencePair>& pairs, int subword_vocab) {
  if (pairs.empty()) fail(ErrorKind::kInvalidArgument, "cannot train a pipeline on an empty corpus");
  std::map<std::string, std::vector<std::vector<std::string>>> per_lang;
  for (const auto& p : pairs) {
    per_lang[p.src_lang].push_back(text::tokenize(p.src, p.src_lang));
    per_lang[p.tgt_lang].push_back(text::tokenize(p.tgt, p.tgt_lang));
  }
  text::Pipeline pipe;
  std::vector<std::string> tokens;
  for (const auto& [lang, sentences] : per_lang) {
    auto model = text::TruecaseModel::train(sentences);
    for (const auto& s : sentences) {
      auto cased = text::truecase(s, model);
      tokens.insert(tokens.end(), cased.begin(), cased.end());
    }
    pipe.truecasers.emplace(lang, std::move(model));
  }
  pipe.subwords = text::SubwordModel::learn(tokens, subword_vocab);
  std::map<std::string, long> counts;
  for (const auto& u : pipe.subwords.apply(tokens)) ++counts[u];
  pipe.vocab = text::Vocab::build(counts, pipe.subwords.alphabet());
  return pipe;
}

PrepareReport prepare(const PrepareOptions& opts) {
  namespace fs = std::filesystem;
  PrepareReport report;
  auto train = read_tsv(opts.input_dir + "/train.tsv");
  auto valid = read_tsv(opts.input_dir + "/valid.tsv");
  auto test = read_tsv(opts.input_dir + "/test.tsv");
  report.train_in = train.size();
  train = clean(train, opts.clean);
  if (opts.balance_cap > 0) train = balance_corpora(train, opts.balance_cap, opts.seed);
  valid = clean(valid, opts.clean);
  test = clean(test, opts.clean);
  if (train.empty()) fail(ErrorKind::kInvalidArgument, "no training pairs survive cleaning");
  if (valid.empty()) fail(ErrorKind::kInvalidArgument, "no validation pairs survive cleaning");

  report.train_out = train.size();
  report.valid_out = valid.size();
  report.test_out = test.size();
  report.tags = TagSet::from_pairs(train);
  for (const auto* split : {&valid, &test}) {
    for (const auto& p : *split) {
      if (report.tags.lang_index(p.src_lang) < 0 || report.tags.lang_index(p.tgt_lang) < 0 ||
          report.tags.domain_index(p.domain) < 0) {
        fail(ErrorKind::kConfig, "held-out pair uses a tag absent from training: " + p.src_lang + " " + p.tgt_lang +
                                     " " + p.domain);
      }
    }
  }

  auto pipe = train_pipeline(train, opts.subword_vocab);
  report.vocab_size = pipe.vocab.size();
  fs::create_directories(opts.output_dir);
  write_tsv(opts.output_dir + "/train.tsv", train);
  write_tsv(opts.output_dir + "/valid.tsv", valid);
  write_tsv(opts.output_dir + "/test.tsv", test);
  pipe.save(opts.output_dir);
  report.tags.save(tags_file(opts.output_dir));
  return report;
}

PreparedData load_prepared(const std::string& dir) {
  PreparedData d;
  d.tags = TagSet::load(tags_file(dir));
  d.pipeline = text::Pipeline::load(dir, d.tags.langs);
  d.train = read_tsv(dir + "/train.tsv");
  d.valid = read_tsv(dir + "/valid.tsv");
  d.test = read_tsv(dir + "/test.tsv");
  return d;
}

std::vector<EncodedExample> encode_pairs(const std::vector<SentencePair>& pairs, const text::Pipeline& pipeline,
                                         const TagSet& tags, bool both_directions) {
  std::vector<EncodedExample> out;
  for (const SentencePair& p : both_directions ? duplicate_directions(pairs) : pairs) {
    out.push_back(encode_example(annotate_factors(p, pipeline, tags), pipeline.vocab, tags));
  }
  return out;
}

}  // namespace mg::corpus
