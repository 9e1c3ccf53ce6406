#include "toylang/harness.hpp"

#include <chrono>
#include <filesystem>

#include "common/error.hpp"
#include "common/io.hpp"
#include "common/rng.hpp"
#include "corpus/prepare.hpp"
#include "metrics/m2.hpp"
#include "metrics/scores.hpp"
#include "text/tokenizer.hpp"
#include "text/unicode.hpp"

namespace mg::toylang {

namespace {

constexpr ErrorType kAllErrors[] = {ErrorType::kOrder, ErrorType::kGrammar, ErrorType::kSpelling, ErrorType::kLex};

Style other(Style s) { return s == Style::kFormal ? Style::kInformal : Style::kFormal; }

// Alternate styles across concepts so both get evaluated.
Style style_for(size_t i) { return i % 2 == 0 ? Style::kFormal : Style::kInformal; }

// At least one word, and every word from `lang`.
bool all_words_in(const std::string& sentence, const ToyLanguage& lang) {
  bool any = false;
  for (const auto& t : text::tokenize(sentence, lang.tag)) {
    if (!text::has_letter(t)) continue;
    if (!word_in_language(t, lang)) return false;
    any = true;
  }
  return any;
}

}  // namespace

std::string style_label(Style s) { return s == Style::kFormal ? "formal" : "informal"; }

ToyData make_toy_data(int n_langs, size_t train, size_t valid, size_t test, uint64_t seed) {
  if (train == 0 || valid == 0 || test == 0) fail(ErrorKind::kInvalidArgument, "toy data needs non-empty train, valid and test splits");
  ToyData d;
  d.langs = languages(n_langs);
  const auto concepts = sample_concepts(train + valid + test, seed);
  d.train.assign(concepts.begin(), concepts.begin() + static_cast<long>(train));
  d.valid.assign(concepts.begin() + static_cast<long>(train), concepts.begin() + static_cast<long>(train + valid));
  d.test.assign(concepts.begin() + static_cast<long>(train + valid), concepts.end());
  d.train_pairs = realize_pairs(d.train, d.langs);
  d.valid_pairs = realize_pairs(d.valid, d.langs);
  d.test_pairs = realize_pairs(d.test, d.langs);
  return d;
}

void write_toy_tree(const ToyData& data, const std::string& dir, uint64_t seed) {
  std::filesystem::create_directories(dir + "/gec");
  corpus::write_tsv(dir + "/train.tsv", data.train_pairs);
  corpus::write_tsv(dir + "/valid.tsv", data.valid_pairs);
  corpus::write_tsv(dir + "/test.tsv", data.test_pairs);

  std::string styles;
  for (const auto& s : style_sentences(data, data.train)) styles += s.text + "\t" + s.label + "\n";
  write_file(dir + "/styles.tsv", styles);

  std::string cs_lines;
  Rng rng(derive_seed(seed, 31));
  for (size_t i = 0; i < data.test.size(); ++i) {
    const ToyLanguage& base = data.langs[i % data.langs.size()];
    const ToyLanguage& mix = data.langs[(i + 1 + rng.below(data.langs.size() - 1)) % data.langs.size()];
    const Style style = style_for(i);
    const ToyLanguage& want = data.langs[(i / data.langs.size()) % data.langs.size()];
    cs_lines += code_switch(data.test[i], base, mix, style, derive_seed(seed, 1000 + i)) + "\t" + base.tag + "\t" +
                want.tag + "\t" + domain_of(style) + "\n";
  }
  write_file(dir + "/codeswitch.tsv", cs_lines);

  for (const auto& lang : data.langs) {
    for (ErrorType kind : kAllErrors) {
      std::string src, ref;
      std::vector<metrics::M2Sentence> gold;
      for (size_t i = 0; i < data.test.size(); ++i) {
        const std::string clean = realize(data.test[i], lang, style_for(i));
        const Injection inj = inject_errors(clean, lang, {kind}, derive_seed(seed, 7000 + i));
        if (inj.applied.empty()) continue;
        src += inj.corrupted + "\n";
        ref += clean + "\n";
        gold.push_back({inj.corrupted_tokens, inj.gold});
      }
      if (gold.empty()) continue;
      const std::string stem = dir + "/gec/" + lang.tag + "." + to_string(kind);
      write_file(stem + ".src", src);
      write_file(stem + ".ref", ref);
      write_file(stem + ".m2", metrics::emit_m2(gold));
    }
  }
}

ToyModelOptions::ToyModelOptions() {
  train.lr = 1e-3;
  train.batch_words = 300;
  train.max_epochs = 6;
  train.checkpoint_interval = 500;
  train.seed = 1;
}

ToyModel train_toy_model(const ToyData& data, const ToyModelOptions& opts) {
  const auto start = std::chrono::steady_clock::now();
  text::Pipeline pipeline = corpus::train_pipeline(data.train_pairs, opts.subword_vocab);
  const corpus::TagSet tags = corpus::TagSet::from_pairs(data.train_pairs);
  const auto train_set = corpus::encode_pairs(data.train_pairs, pipeline, tags, true);
  const auto valid_set = corpus::encode_pairs(data.valid_pairs, pipeline, tags, true);

  model::ModelConfig cfg;
  cfg.layers = opts.layers;
  cfg.model_dim = opts.model_dim;
  cfg.heads = opts.heads;
  cfg.ff_dim = opts.ff_dim;
  cfg.dropout = opts.dropout;
  cfg.token_vocab = pipeline.vocab.size();
  cfg.langs = tags.langs;
  cfg.domains = tags.domains;
  model::Transformer model(cfg, opts.train.seed);

  ToyModel out;
  out.result = train::train(model, train_set, valid_set, opts.train);
  out.bundle = std::make_unique<decode::Bundle>(decode::Bundle{model::restore(out.result.best), std::move(pipeline), tags});
  out.train_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

Rewriter bundle_rewriter(const decode::Bundle& bundle, int beam) {
  return [&bundle, beam](const std::string& text, const std::string& source_lang, const std::string& target_lang,
                         const std::string& style) {
    decode::RewriteRequest req;
    req.text = text;
    req.source_lang = source_lang;
    req.target_lang = target_lang;
    req.target_style = style;
    req.beam = beam;
    return decode::rewrite(bundle, req).output;
  };
}

CrossLingualReport evaluate_crosslingual(const ToyData& data, const Rewriter& rw, size_t concepts) {
  CrossLingualReport r;
  std::vector<metrics::Tokens> hyps, refs;
  size_t exact = 0;
  for (size_t i = 0; i < std::min(concepts, data.test.size()); ++i) {
    for (const auto& a : data.langs) {
      for (const auto& b : data.langs) {
        if (a.tag == b.tag) continue;
        for (Style style : {Style::kFormal, Style::kInformal}) {
          const std::string want = realize(data.test[i], b, style);
          const std::string got = rw(realize(data.test[i], a, style), a.tag, b.tag, domain_of(style));
          exact += got == want;
          hyps.push_back(text::tokenize(got, b.tag));
          refs.push_back(text::tokenize(want, b.tag));
        }
      }
    }
  }
  r.sentences = hyps.size();
  if (r.sentences == 0) return r;
  r.bleu = metrics::corpus_bleu(hyps, refs).value;
  r.exact = static_cast<double>(exact) / static_cast<double>(r.sentences);
  return r;
}

MonolingualReport evaluate_monolingual(const ToyData& data, const Rewriter& rw, size_t concepts) {
  MonolingualReport r;
  size_t words = 0, in_lang = 0, full = 0, exact = 0;
  for (size_t i = 0; i < std::min(concepts, data.test.size()); ++i) {
    for (const auto& lang : data.langs) {
      for (Style style : {Style::kFormal, Style::kInformal}) {
        const std::string src = realize(data.test[i], lang, style);
        const std::string got = rw(src, lang.tag, lang.tag, domain_of(style));
        for (const auto& t : text::tokenize(got, lang.tag)) {
          if (!text::has_letter(t)) continue;
          ++words;
          in_lang += word_in_language(t, lang);
        }
        full += all_words_in(got, lang);
        exact += got == src;
        ++r.sentences;
      }
    }
  }
  if (r.sentences == 0) return r;
  r.token_identity = words ? static_cast<double>(in_lang) / static_cast<double>(words) : 0.0;
  r.fully_in_language = static_cast<double>(full) / static_cast<double>(r.sentences);
  r.exact_copy = static_cast<double>(exact) / static_cast<double>(r.sentences);
  return r;
}

double RestorationReport::rate(ErrorType t) const {
  auto a = attempted.find(t);
  if (a == attempted.end() || a->second == 0) return 0.0;
  auto s = restored.find(t);
  return static_cast<double>(s == restored.end() ? 0 : s->second) / static_cast<double>(a->second);
}

RestorationReport evaluate_restoration(const ToyData& data, const Rewriter& rw, size_t concepts, uint64_t seed) {
  RestorationReport r;
  for (size_t i = 0; i < std::min(concepts, data.test.size()); ++i) {
    const Style style = style_for(i);
    for (const auto& lang : data.langs) {
      const std::string clean = realize(data.test[i], lang, style);
      for (ErrorType kind : kAllErrors) {
        const Injection inj = inject_errors(clean, lang, {kind}, derive_seed(seed, 7000 + i));
        if (inj.applied.empty()) continue;
        ++r.attempted[kind];
        r.restored[kind] += rw(inj.corrupted, lang.tag, lang.tag, domain_of(style)) == clean;
      }
    }
  }
  return r;
}

CodeSwitchReport evaluate_code_switching(const ToyData& data, const Rewriter& rw, size_t cases, uint64_t seed) {
  CodeSwitchReport r;
  if (data.langs.size() < 2) fail(ErrorKind::kInvalidArgument, "code switching needs two languages");
  Rng rng(derive_seed(seed, 31));
  const size_t n = data.langs.size();
  for (size_t i = 0; i < cases; ++i) {
    const ConceptSentence& cs = data.test[i % data.test.size()];
    const ToyLanguage& base = data.langs[i % n];
    const ToyLanguage& mix = data.langs[(i + 1 + rng.below(n - 1)) % n];
    const ToyLanguage& want = data.langs[(i / n) % n];
    const Style style = style_for(i);
    const std::string input = code_switch(cs, base, mix, style, derive_seed(seed, 1000 + i));
    const std::string got = rw(input, base.tag, want.tag, domain_of(style));
    ++r.cases;
    r.fully_rewritten += all_words_in(got, want);
  }
  return r;
}

std::vector<styleclf::LabeledSentence> style_sentences(const ToyData& data, const std::vector<ConceptSentence>& concepts) {
  std::vector<styleclf::LabeledSentence> out;
  for (const auto& cs : concepts) {
    for (const auto& lang : data.langs) {
      for (Style style : {Style::kFormal, Style::kInformal}) out.push_back({realize(cs, lang, style), style_label(style)});
    }
  }
  return out;
}

StyleTransferReport evaluate_style_transfer(const ToyData& data, const Rewriter& rw,
                                            const styleclf::StyleClassifier& clf, size_t concepts) {
  StyleTransferReport r;
  for (Style target : {Style::kFormal, Style::kInformal}) {
    std::vector<std::string> originals, transferred;
    for (size_t i = 0; i < std::min(concepts, data.test.size()); ++i) {
      for (const auto& lang : data.langs) {
        const std::string src = realize(data.test[i], lang, other(target));
        originals.push_back(src);
        transferred.push_back(rw(src, lang.tag, lang.tag, domain_of(target)));
      }
    }
    if (originals.empty()) fail(ErrorKind::kInvalidArgument, "style transfer evaluation needs test concepts");
    r.sentences_per_direction = originals.size();
    r.original_rate[style_label(target)] = styleclf::transfer_rate(clf, originals, style_label(target));
    r.transferred_rate[style_label(target)] = styleclf::transfer_rate(clf, transferred, style_label(target));
  }
  return r;
}

}  // namespace mg::toylang
