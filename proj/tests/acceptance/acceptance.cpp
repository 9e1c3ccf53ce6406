// Acceptance run: one PASS/FAIL line per criterion. Arguments select a subset
// of criteria by number; with none, all run.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <functional>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>

#include "metrics/m2.hpp"
#include "metrics/scores.hpp"
#include "model/checkpoint.hpp"
#include "support/m2_oracle.hpp"
#include "support/model_checks.hpp"
#include "support/primitive_checks.hpp"
#include "support/text_generators.hpp"
#include "text/subwords.hpp"
#include "text/tokenizer.hpp"
#include "text/truecaser.hpp"
#include "text/unicode.hpp"
#include "toylang/harness.hpp"
#include "train/trainer.hpp"

using namespace mg;
using Tokens = std::vector<std::string>;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t).count();
}

std::string fmt(double v, int digits = 4) {
  std::ostringstream os;
  os.precision(digits);
  os << v;
  return os.str();
}

void note(const std::string& s) { std::cerr << "  " << s << std::endl; }

// Gradient checks

Outcome gradients() {
  const auto start = std::chrono::steady_clock::now();
  double worst_primitive = 0.0, worst_model = 0.0;
  std::string worst_name;
  size_t checks = 0;
  for (uint64_t seed = 0; seed < 100; ++seed) {
    for (const auto& c : testing::primitive_cases(seed)) {
      const double e = testing::gradcheck(c.inputs, c.build, c.reference);
      ++checks;
      if (e > worst_primitive) {
        worst_primitive = e;
        worst_name = c.name;
      }
    }
    worst_model = std::max(worst_model, testing::end_to_end_gradcheck(seed).relative_error);
  }
  const double secs = seconds_since(start);
  Outcome o;
  o.pass = worst_primitive <= 1e-3 && worst_model <= 2e-3 && secs < 60.0;
  o.detail = std::to_string(checks) + " primitive checks, worst " + fmt(worst_primitive) + " (" + worst_name +
             "); end-to-end worst " + fmt(worst_model) + " over 100 seeds; " + fmt(secs, 3) + " s";
  return o;
}

// Metric oracles

Outcome metric_oracles() {
  size_t mismatches = 0;
  Rng rng(2024);
  metrics::M2Counts running_dp, running_oracle;
  for (int i = 0; i < 500; ++i) {
    const testing::M2Case c = testing::random_m2_case(rng);
    const auto dp = metrics::best_sentence_counts(metrics::edit_lattice(c.gold.source, c.hyp), c.gold, running_dp);
    const auto oracle = testing::oracle_sentence_counts(c.hyp, c.gold, running_oracle);
    mismatches += dp.correct != oracle.correct || dp.proposed != oracle.proposed || dp.gold != oracle.gold;
    running_dp.add(dp);
    running_oracle.add(oracle);
  }

  const double f = metrics::f_beta(0.334, 0.279);

  const auto split = text::split_whitespace;
  const Tokens src = split("a b c d e f"), ref = split("a b c d e g"), hyp = split("a b c d e f g");
  const double hand = std::pow(5.0 / 7 * 3.0 / 6 * 2.0 / 5 * 1.0 / 4, 0.25);
  double gleu_gap = std::fabs(metrics::sentence_gleu(src, hyp, {ref}) - hand);
  gleu_gap = std::max(gleu_gap, std::fabs(metrics::sentence_gleu(src, hyp, {ref, hyp}) - (hand + 1.0) / 2));
  gleu_gap = std::max(gleu_gap, std::fabs(metrics::sentence_gleu(split("a b c"), split("a d c"), {split("a d c")}) - 1.0));

  std::vector<Tokens> corpus;
  Rng words(9);
  for (int i = 0; i < 200; ++i) corpus.push_back(text::tokenize(testing::random_sentence(words), "en"));
  const double bleu = metrics::corpus_bleu(corpus, corpus).value;

  Outcome o;
  o.pass = mismatches == 0 && std::fabs(f - 0.321) <= 0.001 && gleu_gap <= 1e-6 && bleu == 100.0;
  o.detail = "M2 DP vs brute force mismatches " + std::to_string(mismatches) + "/500; F0.5(0.334, 0.279) = " +
             fmt(f, 6) + "; GLEU hand-case gap " + fmt(gleu_gap, 3) + "; BLEU(identical) = " + fmt(bleu, 6);
  return o;
}

// Codec round trips

size_t tokenizer_failures(int cases) {
  Rng rng(101);
  size_t bad = 0;
  for (int i = 0; i < cases; ++i) {
    const std::string s = testing::random_sentence(rng);
    bad += text::detokenize(text::tokenize(s, "en"), "en") != text::normalize_whitespace(s);
  }
  return bad;
}

// A sentence starting with the capitalized model surface of a known word
// comes back unchanged; the model file round trips.
size_t truecaser_failures(int cases) {
  Rng rng(102);
  size_t bad = 0;
  for (int i = 0; i < cases; ++i) {
    std::vector<Tokens> corpus;
    for (int s = 0; s < 4; ++s) {
      Tokens sent;
      for (int w = 0; w < 4; ++w) {
        std::string word = testing::random_word(rng, testing::mixed_letters(), 1, 4);
        if (rng.below(3) == 0) word = text::capitalize_first_letter(word);
        sent.push_back(word);
      }
      corpus.push_back(sent);
    }
    const auto model = text::TruecaseModel::train(corpus);
    const auto back = text::TruecaseModel::parse(model.serialize());
    if (back.serialize() != model.serialize()) {
      ++bad;
      continue;
    }
    const auto& table = model.table();
    auto it = table.begin();
    std::advance(it, static_cast<long>(rng.below(table.size())));
    Tokens sentence{text::capitalize_first_letter(it->second.surface)};
    for (int w = 0; w < 3; ++w) sentence.push_back(corpus[rng.below(corpus.size())][rng.below(4)]);
    if (rng.below(4) == 0) sentence.insert(sentence.begin(), "\"");
    bad += text::detruecase(text::truecase(sentence, back)) != sentence;
  }
  return bad;
}

size_t subword_failures(int cases) {
  Rng rng(103);
  size_t bad = 0;
  std::optional<text::SubwordModel> model;
  for (int i = 0; i < cases; ++i) {
    if (i % 1000 == 0) {
      Tokens corpus;
      for (int k = 0; k < 400; ++k) corpus.push_back(testing::random_word(rng, testing::mixed_letters(), 1, 7));
      model = text::SubwordModel::learn(corpus, 40 + static_cast<int>(rng.below(80)));
      const auto back = text::SubwordModel::parse(model->serialize(), model->alphabet());
      bad += back.merges() != model->merges() || back.vocab() != model->vocab();
    }
    Tokens tokens;
    const int n = 1 + static_cast<int>(rng.below(6));
    for (int k = 0; k < n; ++k) tokens.push_back(testing::random_word(rng, testing::mixed_letters(), 1, 9));
    bad += text::revert_subwords(model->apply(tokens)) != tokens;
  }
  return bad;
}

size_t m2_failures(int cases) {
  Rng rng(104);
  static const Tokens kWords = {"we", "are", "is", "a", "b", "ö", "x-y", "'s", "."};
  size_t bad = 0;
  for (int i = 0; i < cases; ++i) {
    std::vector<metrics::M2Sentence> doc(1 + rng.below(3));
    for (auto& s : doc) {
      const int n = 1 + static_cast<int>(rng.below(8));
      for (int k = 0; k < n; ++k) s.source.push_back(kWords[rng.below(kWords.size())]);
      const int edits = static_cast<int>(rng.below(4));
      for (int k = 0; k < edits; ++k) {
        metrics::Edit e;
        e.annotator = static_cast<int>(rng.below(3));
        if (rng.below(6) == 0) {
          e.start = e.end = -1;
          e.type = "noop";
        } else {
          e.start = static_cast<int>(rng.below(n + 1));
          e.end = e.start + static_cast<int>(rng.below(n - e.start + 1));
          e.type = rng.below(2) ? "R:VERB" : "M:DET";
          const int r = static_cast<int>(rng.below(3));
          for (int t = 0; t < r; ++t) e.replacement.push_back(kWords[rng.below(kWords.size())]);
        }
        s.edits.push_back(e);
      }
    }
    const std::string text = metrics::emit_m2(doc);
    const auto back = metrics::parse_m2(text);
    bad += back != doc || metrics::emit_m2(back) != text;
  }
  return bad;
}

bool same_bits(const Tensor& a, const Tensor& b) {
  return a.shape() == b.shape() && std::memcmp(a.ptr(), b.ptr(), a.size() * sizeof(float)) == 0;
}

size_t checkpoint_failures(int cases) {
  Rng rng(105);
  size_t bad = 0;
  for (int i = 0; i < cases; ++i) {
    model::Checkpoint c;
    c.config = "layers=" + std::to_string(rng.below(9)) + "\n";
    const int n = static_cast<int>(rng.below(4));
    auto values = [&](Shape shape) {
      Tensor t(std::move(shape));
      for (float& v : t.mutable_data()) v = static_cast<float>(rng.normal());
      return t;
    };
    for (int k = 0; k < n; ++k) {
      Shape shape = rng.below(2) ? Shape{1 + static_cast<int>(rng.below(4))}
                                 : Shape{1 + static_cast<int>(rng.below(3)), 1 + static_cast<int>(rng.below(3))};
      c.params.push_back({"p" + std::to_string(k), values(shape)});
    }
    if (rng.below(2)) {
      model::OptimizerSection opt;
      opt.adam.step = static_cast<int64_t>(rng.below(1000));
      opt.adam.lr = rng.uniform();
      for (const auto& p : c.params) {
        opt.adam.m.push_back(values(p.value.shape()));
        opt.adam.v.push_back(values(p.value.shape()));
      }
      opt.counters["best"] = model::exact(rng.normal());
      c.optimizer = opt;
    }
    c.seed = rng.next_u64();
    const std::string bytes = c.encode();
    const model::Checkpoint back = model::Checkpoint::decode(bytes);
    bool ok = back.encode() == bytes && back.seed == c.seed && back.params.size() == c.params.size() &&
              back.config == c.config && back.optimizer.has_value() == c.optimizer.has_value();
    for (size_t k = 0; ok && k < c.params.size(); ++k) ok = same_bits(back.params[k].value, c.params[k].value);
    bad += !ok;
  }
  return bad;
}

Outcome codecs() {
  const int n = 10000;
  const size_t tok = tokenizer_failures(n), tc = truecaser_failures(n), sw = subword_failures(n), m2 = m2_failures(n),
               ck = checkpoint_failures(n);
  Outcome o;
  o.pass = tok + tc + sw + m2 + ck == 0;
  o.detail = "failures per 10000: tokenizer " + std::to_string(tok) + ", truecaser " + std::to_string(tc) +
             ", subwords " + std::to_string(sw) + ", M2 " + std::to_string(m2) + ", checkpoint " + std::to_string(ck);
  return o;
}

// Toy-language runs, shared by several criteria.

struct ToyRun {
  toylang::ToyData data;
  toylang::ToyModel model;
};

std::unique_ptr<ToyRun> toy_run(int langs) {
  auto run = std::make_unique<ToyRun>();
  run->data = toylang::make_toy_data(langs, 5000, 200, 200, 7);
  toylang::ToyModelOptions opts;
  opts.train.log = [langs](const std::string& s) { note(std::to_string(langs) + " langs: " + s); };
  run->model = toylang::train_toy_model(run->data, opts);
  return run;
}

std::unique_ptr<ToyRun> three, two;

ToyRun& three_langs() {
  if (!three) three = toy_run(3);
  return *three;
}

ToyRun& two_langs() {
  if (!two) two = toy_run(2);
  return *two;
}

std::optional<double> three_lang_identity;

Outcome toy_three() {
  const auto start = std::chrono::steady_clock::now();
  ToyRun& run = three_langs();
  const auto rw = toylang::bundle_rewriter(*run.model.bundle);
  const auto cross = toylang::evaluate_crosslingual(run.data, rw, 100);
  const auto mono = toylang::evaluate_monolingual(run.data, rw, 100);
  const auto fix = toylang::evaluate_restoration(run.data, rw, 100, 17);
  three_lang_identity = mono.token_identity;
  const double order = fix.rate(toylang::ErrorType::kOrder), grammar = fix.rate(toylang::ErrorType::kGrammar);
  const double secs = seconds_since(start);
  note("spelling restored " + fmt(fix.rate(toylang::ErrorType::kSpelling)) + ", lexical " +
       fmt(fix.rate(toylang::ErrorType::kLex)) + ", monolingual exact copy " + fmt(mono.exact_copy));
  double best_ppl = run.model.result.log.empty() ? 0.0 : run.model.result.log[0].valid_ppl;
  for (const auto& r : run.model.result.log) best_ppl = std::min(best_ppl, r.valid_ppl);
  Outcome o;
  o.pass = cross.bleu >= 90.0 && mono.token_identity >= 0.95 && order >= 0.8 && grammar >= 0.8 && secs <= 1800.0;
  o.detail = "cross-lingual BLEU " + fmt(cross.bleu) + " (exact " + fmt(cross.exact) + ", " +
             std::to_string(cross.sentences) + " sentences); monolingual identity " + fmt(mono.token_identity) +
             "; order restored " + fmt(order) + ", grammar restored " + fmt(grammar) + "; " +
             std::to_string(run.model.result.log.size()) + " checkpoints, best ppl " + fmt(best_ppl) + "; " +
             fmt(secs, 4) + " s";
  return o;
}

Outcome toy_two() {
  ToyRun& run = two_langs();
  const auto rw = toylang::bundle_rewriter(*run.model.bundle);
  const auto mono2 = toylang::evaluate_monolingual(run.data, rw, 100);
  if (!three_lang_identity) {
    ToyRun& big = three_langs();
    three_lang_identity = toylang::evaluate_monolingual(big.data, toylang::bundle_rewriter(*big.model.bundle), 100)
                              .token_identity;
  }
  const double gap = 100.0 * (*three_lang_identity - mono2.token_identity);
  Outcome o;
  o.pass = gap >= 20.0;
  o.detail = "monolingual identity 3 langs " + fmt(*three_lang_identity) + ", 2 langs " + fmt(mono2.token_identity) +
             " (fully in language " + fmt(mono2.fully_in_language) + "); gap " + fmt(gap) + " points; 2-lang training " +
             fmt(run.model.train_seconds, 4) + " s";
  return o;
}

Outcome style_classifier() {
  ToyRun& run = three_langs();
  const std::vector<toylang::ConceptSentence> concepts(run.data.train.begin(), run.data.train.begin() + 1000);
  styleclf::ClassifierConfig cfg;
  cfg.labels = {"formal", "informal"};
  const auto start = std::chrono::steady_clock::now();
  auto trained = styleclf::train_classifier(toylang::style_sentences(run.data, concepts), cfg, 5);
  const double train_secs = seconds_since(start);
  const auto report = toylang::evaluate_style_transfer(run.data, toylang::bundle_rewriter(*run.model.bundle),
                                                       *trained.classifier, 100);
  Outcome o;
  o.pass = trained.valid_accuracy >= 0.95;
  std::string dirs;
  for (const char* target : {"formal", "informal"}) {
    const double before = report.original_rate.at(target), after = report.transferred_rate.at(target);
    o.pass = o.pass && after - before >= 15.0;
    dirs += std::string("; to ") + target + " " + fmt(before) + " -> " + fmt(after);
  }
  o.detail = "validation accuracy " + fmt(trained.valid_accuracy) + " (" + fmt(train_secs, 3) + " s)" + dirs + " (" +
             std::to_string(report.sentences_per_direction) + " sentences per direction)";
  return o;
}

// Plateau schedule and resume

std::vector<corpus::EncodedExample> mapping_data(uint64_t seed, int count, int vocab) {
  Rng rng(seed);
  std::vector<corpus::EncodedExample> out(count);
  for (auto& ex : out) {
    const int len = 2 + static_cast<int>(rng.below(4));
    for (int i = 0; i < len; ++i) ex.src.push_back(4 + static_cast<int>(rng.below(vocab - 4)));
    for (int id : ex.src) ex.tgt.push_back(4 + (id - 4 + 1) % (vocab - 4));
    ex.lang_factor = 1;
    ex.style_factor = static_cast<int>(rng.below(2));
    ex.src_lang = "ka";
    ex.tgt_lang = "lu";
  }
  return out;
}

bool same_params(const model::Checkpoint& a, const model::Checkpoint& b) {
  if (a.params.size() != b.params.size()) return false;
  for (size_t i = 0; i < a.params.size(); ++i) {
    if (a.params[i].name != b.params[i].name || !same_bits(a.params[i].value, b.params[i].value)) return false;
  }
  return true;
}

Outcome schedule_and_resume() {
  const auto data = mapping_data(1, 50, 14), valid = mapping_data(2, 8, 14);
  train::TrainOptions o;
  o.lr = 3e-3;
  o.checkpoint_interval = 5;
  o.batch_words = 24;
  o.max_epochs = 200;
  o.seed = 11;

  // Frozen weights give a constant validation perplexity: the first
  // checkpoint is best and every later one is stale.
  train::TrainOptions frozen = o;
  frozen.frozen = true;
  model::Transformer fm(testing::micro_config(), 3);
  const auto flat = train::train(fm, data, valid, frozen);
  bool schedule_ok = flat.log.size() == 33 && flat.stop_reason == "stop_patience";
  for (size_t i = 0; schedule_ok && i < flat.log.size(); ++i) {
    const int decays = i == 0 ? 0 : static_cast<int>((i - 1) / 8);
    schedule_ok = std::fabs(flat.log[i].lr - o.lr * std::pow(0.7, decays)) <= 1e-15;
  }

  o.max_updates = 60;
  model::Transformer full(testing::micro_config(), 3);
  const auto straight = train::train(full, data, valid, o);
  const std::string dir = (std::filesystem::temp_directory_path() / "mg_acceptance_resume").string();
  std::filesystem::remove_all(dir);
  train::TrainOptions first = o;
  first.max_updates = 25;
  first.out_dir = dir;
  model::Transformer part(testing::micro_config(), 3);
  train::train(part, data, valid, first);
  const model::Checkpoint last = model::Checkpoint::load(train::last_file(dir));
  model::Transformer resumed(testing::micro_config(), 99);
  train::TrainOptions second = o;
  second.out_dir = dir;
  const auto rest = train::train(resumed, data, valid, second, &last);
  bool resume_ok = rest.log.size() == straight.log.size() && same_params(rest.last, straight.last) &&
                   same_params(rest.best, straight.best);
  for (size_t i = 0; resume_ok && i < straight.log.size(); ++i) {
    resume_ok = rest.log[i].train_loss == straight.log[i].train_loss &&
                rest.log[i].valid_ppl == straight.log[i].valid_ppl && rest.log[i].lr == straight.log[i].lr;
  }
  std::filesystem::remove_all(dir);

  Outcome out;
  out.pass = schedule_ok && resume_ok;
  out.detail = "frozen run: " + std::to_string(flat.log.size()) + " checkpoints, stop reason " + flat.stop_reason +
               ", decay x0.7 every 8 stale checkpoints " + (schedule_ok ? "as expected" : "WRONG") +
               "; resume after 25 of 60 updates " + (resume_ok ? "bit-exact" : "DIVERGED");
  return out;
}

Outcome code_switching() {
  ToyRun& run = three_langs();
  const auto report = toylang::evaluate_code_switching(run.data, toylang::bundle_rewriter(*run.model.bundle), 200, 23);
  Outcome o;
  o.pass = report.rate() >= 0.9;
  o.detail = std::to_string(report.fully_rewritten) + "/" + std::to_string(report.cases) +
             " fully rewritten into the requested language (" + fmt(report.rate()) + ")";
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "gradient checks", gradients},
      {2, "metric oracles", metric_oracles},
      {3, "codec round trips", codecs},
      {4, "3-language toy run", toy_three},
      {5, "2-language identity gap", toy_two},
      {6, "style classifier and transfer", style_classifier},
      {7, "plateau schedule and resume", schedule_and_resume},
      {8, "code-switched inputs", code_switching},
  };
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));

  int failed = 0;
  for (const auto& c : criteria) {
    if (!wanted.empty() && !wanted.count(c.id)) continue;
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("error: ") + e.what();
    }
    failed += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << c.id << " (" << c.name << "): " << o.detail
              << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
