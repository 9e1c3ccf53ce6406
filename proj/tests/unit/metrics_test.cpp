#include <cmath>

#include "common/error.hpp"
#include "doctest.h"
#include "metrics/m2.hpp"
#include "metrics/scores.hpp"
#include "support/m2_oracle.hpp"
#include "text/unicode.hpp"
#include "toylang/toylang.hpp"

using namespace mg;
using namespace mg::metrics;

namespace {

Tokens toks(const std::string& s) { return text::split_whitespace(s); }

bool has_edit(const EditLattice& lat, int start, int end, const Tokens& repl) {
  for (const auto& a : lat.arcs) {
    if (a.is_edit && a.edit.start == start && a.edit.end == end && a.edit.replacement == repl) return true;
  }
  return false;
}

Tokens random_tokens(Rng& rng, int max_len) {
  static const Tokens kWords = {"a", "b", "c", "d", "e", "f"};
  Tokens t;
  const int n = static_cast<int>(rng.below(max_len + 1));
  for (int i = 0; i < n; ++i) t.push_back(kWords[rng.below(kWords.size())]);
  return t;
}

}  // namespace

TEST_CASE("BLEU examples") {
  const std::vector<Tokens> corpus = {toks("the cat sat on the mat"), toks("a dog"), toks("x y z w v")};
  CHECK(corpus_bleu(corpus, corpus).value == doctest::Approx(100.0));
  NgramStats s = bleu_stats(toks("the the the"), toks("the cat"));
  CHECK(s.numerator[0] == 1);
  CHECK(s.denominator[0] == 3);
  CHECK(corpus_bleu({Tokens{}, Tokens{}}, {toks("a b"), toks("c")}).value == 0.0);
  CHECK_THROWS_AS(corpus_bleu({toks("a")}, {}), Error);
}

TEST_CASE("GLEU examples") {
  const Tokens src = toks("a b c"), ref = toks("a d c");
  CHECK(sentence_gleu(src, ref, {ref}) == doctest::Approx(1.0));
  CHECK(sentence_gleu(src, src, {ref}) < 1.0);
  NgramStats s = gleu_stats(src, src, ref);
  CHECK(s.numerator[0] == 1);
  CHECK(s.denominator[0] == 3);

  // Orders 1..4: (6-1)/7, (4-1)/6, (3-1)/5, (2-1)/4; no brevity penalty.
  const Tokens src2 = toks("a b c d e f"), ref2 = toks("a b c d e g"), hyp2 = toks("a b c d e f g");
  const double hand = std::pow(5.0 / 7 * 3.0 / 6 * 2.0 / 5 * 1.0 / 4, 0.25);
  CHECK(sentence_gleu(src2, hyp2, {ref2}) == doctest::Approx(hand).epsilon(1e-9));
  CHECK(sentence_gleu(src2, hyp2, {ref2, hyp2}) == doctest::Approx((hand + 1.0) / 2).epsilon(1e-9));
  CHECK(corpus_gleu({src2}, {hyp2}, {{ref2}}).value == doctest::Approx(hand).epsilon(1e-9));
  CHECK_THROWS_AS(sentence_gleu(src, src, {Tokens{}}), Error);
  CHECK_THROWS_AS(sentence_gleu(src, src, {}), Error);
}

TEST_CASE("BLEU and GLEU stay in range") {
  Rng rng(3);
  for (int i = 0; i < 10000; ++i) {
    const Tokens src = random_tokens(rng, 9), hyp = random_tokens(rng, 9);
    Tokens ref = random_tokens(rng, 9);
    if (ref.empty()) ref.push_back("a");
    const double b = corpus_bleu({hyp}, {ref}).value;
    const double g = sentence_gleu(src, hyp, {ref});
    REQUIRE(b >= 0.0);
    REQUIRE(b <= 100.0 + 1e-9);
    REQUIRE(g >= 0.0);
    REQUIRE(g <= 1.0 + 1e-12);
  }
}

TEST_CASE("F beta arithmetic") {
  CHECK(f_beta(0.334, 0.279) == doctest::Approx(0.321).epsilon(0.001 / 0.321));
  CHECK(f_beta(1, 1) == 1.0);
  CHECK(f_beta(0, 0) == 0.0);
  CHECK(f_beta(0.5, 0.25) == doctest::Approx(1.25 * 0.5 * 0.25 / (0.25 * 0.5 + 0.25)));
  Rng rng(1);
  for (int i = 0; i < 1000; ++i) {
    const double p = rng.uniform(), r = rng.uniform(), d = rng.uniform() * (1 - std::max(p, r));
    REQUIRE(f_beta(p + d, r) >= f_beta(p, r));
    REQUIRE(f_beta(p, r + d) >= f_beta(p, r));
  }
}

TEST_CASE("edit lattice examples") {
  EditLattice same = edit_lattice(toks("a b c"), toks("a b c"));
  for (const auto& a : same.arcs) CHECK_FALSE(a.is_edit);

  CHECK(has_edit(edit_lattice(toks("we is"), toks("we are")), 1, 2, toks("are")));

  EditLattice swap = edit_lattice(toks("a b"), toks("b a"));
  CHECK(has_edit(swap, 0, 1, {}));
  CHECK(has_edit(swap, 2, 2, toks("a")));
  CHECK(has_edit(swap, 0, 2, toks("b a")));
  const auto decomps = testing::all_decompositions(toks("a b"), toks("b a"), 2);
  CHECK(decomps.count({{0, 1, {}}, {2, 2, toks("a")}}) == 1);
  CHECK(decomps.count({{0, 2, toks("b a")}}) == 1);
}

TEST_CASE("M2 scorer examples") {
  M2Sentence s;
  s.source = toks("we is happy");
  s.edits.push_back({1, 2, toks("are"), "SVA", 0});
  MetricReport perfect = m2_score({toks("we are happy")}, {s});
  CHECK(perfect.precision == 1.0);
  CHECK(perfect.recall == 1.0);
  CHECK(perfect.value == 1.0);

  MetricReport untouched = m2_score({toks("we is happy")}, {s});
  CHECK(untouched.precision == 1.0);  // nothing proposed
  CHECK(untouched.recall == 0.0);

  MetricReport wrong = m2_score({toks("we was happy")}, {s});
  CHECK(wrong.precision == 0.0);
  CHECK(wrong.value == 0.0);
  CHECK_THROWS_AS(m2_score({}, {s}), Error);
}

TEST_CASE("M2 dynamic program equals the exhaustive oracle") {
  Rng rng(2024);
  M2Counts running_dp, running_oracle;
  for (int i = 0; i < 500; ++i) {
    const testing::M2Case c = testing::random_m2_case(rng);
    const M2Counts dp = best_sentence_counts(edit_lattice(c.gold.source, c.hyp), c.gold, running_dp);
    const M2Counts oracle = testing::oracle_sentence_counts(c.hyp, c.gold, running_oracle);
    REQUIRE(dp.correct == oracle.correct);
    REQUIRE(dp.proposed == oracle.proposed);
    REQUIRE(dp.gold == oracle.gold);
    running_dp.add(dp);
    running_oracle.add(oracle);
  }
}

TEST_CASE("gold-corrected toy sentences score exactly 1") {
  const auto langs = toylang::languages(3);
  const auto concepts = toylang::sample_concepts(60, 5);
  std::vector<M2Sentence> gold;
  std::vector<Tokens> hyps;
  for (size_t i = 0; i < concepts.size(); ++i) {
    const auto& lang = langs[i % 3];
    const std::string clean = toylang::realize(concepts[i], lang, toylang::Style::kFormal);
    const auto inj = toylang::inject_errors(clean, lang,
                                            {toylang::ErrorType::kOrder, toylang::ErrorType::kSpelling,
                                             toylang::ErrorType::kGrammar, toylang::ErrorType::kLex},
                                            i);
    gold.push_back({inj.corrupted_tokens, inj.gold});
    hyps.push_back(inj.clean_tokens);
  }
  MetricReport r = m2_score(hyps, gold);
  CHECK(r.precision == 1.0);
  CHECK(r.recall == 1.0);
  CHECK(r.value == 1.0);
  CHECK(parse_m2(emit_m2(gold)) == gold);
}

TEST_CASE("M2 format parsing") {
  auto s = parse_m2("S we is\nA 1 2|||SVA|||are|||REQUIRED|||-NONE-|||0\n\nS fine\n\n");
  REQUIRE(s.size() == 2);
  CHECK(s[0].source == toks("we is"));
  REQUIRE(s[0].edits.size() == 1);
  CHECK(s[0].edits[0] == Edit{1, 2, toks("are"), "SVA", 0});
  CHECK(s[1].edits.empty());
  CHECK(s[1].annotators() == std::vector<int>{0});

  auto noop = parse_m2("S a b\nA -1 -1|||noop|||-NONE-|||REQUIRED|||-NONE-|||1\n\n");
  CHECK(noop[0].annotators() == std::vector<int>{1});
  CHECK(noop[0].gold(1).empty());

  CHECK_THROWS_AS(parse_m2("S a b\nA 2 1|||X|||y|||REQUIRED|||-NONE-|||0\n"), Error);
  CHECK_THROWS_AS(parse_m2("S a b\nA 0 5|||X|||y|||REQUIRED|||-NONE-|||0\n"), Error);
  CHECK_THROWS_AS(parse_m2("A 0 1|||X|||y|||REQUIRED|||-NONE-|||0\n"), Error);
  CHECK_THROWS_AS(parse_m2("S a\nA 0 1|||X|||y\n"), Error);
  try {
    parse_m2("S a b\n\nS c\nA 1 0|||X|||y|||REQUIRED|||-NONE-|||0\n", "gold.m2");
    FAIL("expected a parse error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("gold.m2:4") != std::string::npos);
  }
}

TEST_CASE("M2 format round trips") {
  Rng rng(77);
  static const Tokens kWords = {"we", "are", "is", "a", "b", "ö", "x-y", "'s", "."};
  for (int i = 0; i < 10000; ++i) {
    std::vector<M2Sentence> doc(1 + rng.below(3));
    for (auto& s : doc) {
      const int n = 1 + static_cast<int>(rng.below(8));
      for (int k = 0; k < n; ++k) s.source.push_back(kWords[rng.below(kWords.size())]);
      const int edits = static_cast<int>(rng.below(4));
      for (int k = 0; k < edits; ++k) {
        Edit e;
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
    const std::string text = emit_m2(doc);
    const auto back = parse_m2(text);
    REQUIRE(back == doc);
    REQUIRE(emit_m2(back) == text);
  }
}
