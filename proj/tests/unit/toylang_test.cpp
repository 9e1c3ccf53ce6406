#include <algorithm>
#include <map>

#include "common/error.hpp"
#include "doctest.h"
#include "text/tokenizer.hpp"
#include "text/unicode.hpp"
#include "toylang/toylang.hpp"

using namespace mg;
using namespace mg::toylang;
using Tokens = std::vector<std::string>;

namespace {

Tokens sorted_words(const std::string& s, const std::string& lang) {
  Tokens out;
  for (const auto& t : text::tokenize(s, lang)) {
    if (text::has_letter(t)) out.push_back(text::lowercase(t));
  }
  std::sort(out.begin(), out.end());
  return out;
}

ConceptSentence example() {
  ConceptSentence cs;
  cs.subject = 2;
  cs.verb = 1;
  cs.object = 4;
  cs.subject_num = Number::kPlural;
  cs.object_num = Number::kSingular;
  cs.adverb = 3;
  cs.addressee = Addressee::kFormal;
  return cs;
}

}  // namespace

TEST_CASE("lexicons are disjoint and style markers differ") {
  auto langs = languages(3);
  REQUIRE(langs.size() == 3);
  for (size_t a = 0; a < langs.size(); ++a) {
    for (size_t b = a + 1; b < langs.size(); ++b) {
      for (const auto& [form, info] : closure(langs[a])) CHECK(closure(langs[b]).count(form) == 0);
    }
  }
  for (const auto& cs : sample_concepts(500, 3)) {
    for (const auto& lang : langs) {
      CHECK(realize(cs, lang, Style::kFormal) != realize(cs, lang, Style::kInformal));
    }
  }
}

TEST_CASE("realize") {
  auto langs = languages(3);
  const auto cs = example();
  SUBCASE("word order differs, stems do not") {
    // Stems match across word orders once the verb form is fixed: compare the
    // same language realized with two orders.
    ToyLanguage sov = langs[0];
    sov.order = WordOrder::kSOV;
    const std::string a = realize(cs, langs[0], Style::kFormal);
    const std::string b = realize(cs, sov, Style::kFormal);
    CHECK(a != b);
    CHECK(sorted_words(a, "ka") == sorted_words(b, "ka"));
  }
  SUBCASE("formal and informal differ only in marked positions") {
    const auto f = realize_tokens(cs, langs[0], Style::kFormal);
    const auto i = realize_tokens(cs, langs[0], Style::kInformal);
    REQUIRE(f.tokens.size() == i.tokens.size());
    for (size_t k = 0; k < f.tokens.size(); ++k) {
      const bool marked = f.roles[k] == Pos::kPronoun || f.roles[k] == Pos::kVerb || f.roles[k] == Pos::kPunct;
      CHECK((f.tokens[k] != i.tokens[k]) == marked);
    }
    CHECK(f.tokens.back() == ".");
    CHECK(i.tokens.back() == "!");
  }
  SUBCASE("plural subject gives the plural verb suffix in the subject-agreeing language") {
    const auto r = realize_tokens(cs, langs[0], Style::kFormal);
    for (size_t k = 0; k < r.tokens.size(); ++k) {
      if (r.roles[k] == Pos::kVerb) CHECK(r.tokens[k] == langs[0].verbs[cs.verb] + langs[0].agr_plural);
    }
  }
  SUBCASE("first word capitalized and the sentence is analyzable") {
    for (const auto& lang : langs) {
      for (Style s : {Style::kFormal, Style::kInformal}) {
        const std::string out = realize(cs, lang, s);
        CHECK(out == text::capitalize_first_letter(out));
        auto back = analyze(out, lang);
        REQUIRE(back.has_value());
        ConceptSentence expected = cs;
        expected.addressee = s == Style::kFormal ? Addressee::kFormal : Addressee::kInformal;
        CHECK(*back == expected);
        CHECK(language_identity(out, lang) == 1.0);
      }
    }
  }
  SUBCASE("unknown concept") {
    ConceptSentence bad = cs;
    bad.verb = 99;
    CHECK_THROWS_AS(realize(bad, langs[0], Style::kFormal), Error);
  }
}

TEST_CASE("generate_corpus") {
  auto a = generate_corpus(3, 100, 7);
  auto b = generate_corpus(3, 100, 7);
  CHECK(corpus::format_tsv(a.pairs) == corpus::format_tsv(b.pairs));
  CHECK(a.pairs.size() == 600);
  CHECK(generate_corpus(2, 100, 7).pairs.size() == 200);
  auto langs = languages(3);
  for (const auto& p : a.pairs) {
    CHECK(language_identity(p.src, language_by_tag(langs, p.src_lang)) == 1.0);
    CHECK(language_identity(p.tgt, language_by_tag(langs, p.tgt_lang)) == 1.0);
    CHECK(p.src_lang != p.tgt_lang);
  }
  CHECK(corpus::format_tsv(generate_corpus(3, 100, 8).pairs) != corpus::format_tsv(a.pairs));
}

TEST_CASE("inject_errors examples") {
  auto langs = languages(3);
  ConceptSentence cs = example();
  cs.adverb = -1;
  cs.addressee = Addressee::kNone;
  const std::string clean = realize(cs, langs[0], Style::kFormal);

  SUBCASE("order swaps exactly one adjacent pair") {
    auto inj = inject_errors(clean, langs[0], {ErrorType::kOrder}, 5);
    REQUIRE(inj.gold.size() == 1);
    CHECK(inj.gold[0].end - inj.gold[0].start == 2);
    CHECK(metrics::apply_edits(inj.corrupted_tokens, inj.gold) == inj.clean_tokens);
    CHECK(sorted_words(inj.corrupted, "ka") == sorted_words(clean, "ka"));
    CHECK(inj.corrupted != clean);
  }
  SUBCASE("grammar on a plural subject gives the singular suffix on the verb") {
    auto inj = inject_errors(clean, langs[0], {ErrorType::kGrammar}, 5);
    REQUIRE(inj.gold.size() == 1);
    const int v = inj.gold[0].start;
    CHECK(inj.gold[0].end == v + 1);
    CHECK(inj.corrupted_tokens[v] == langs[0].verbs[cs.verb] + langs[0].agr_singular);
    CHECK(inj.gold[0].replacement == Tokens{langs[0].verbs[cs.verb] + langs[0].agr_plural});
  }
  SUBCASE("grammar is skipped and reported without agreement") {
    auto inj = inject_errors(realize(cs, langs[2], Style::kFormal), langs[2], {ErrorType::kGrammar}, 5);
    CHECK(inj.gold.empty());
    REQUIRE(inj.skipped.size() == 1);
    CHECK(inj.skipped[0].first == ErrorType::kGrammar);
  }
  SUBCASE("fixed seed gives identical corruption") {
    std::vector<ErrorType> all{ErrorType::kSpelling, ErrorType::kLex, ErrorType::kGrammar, ErrorType::kOrder};
    auto x = inject_errors(clean, langs[0], all, 9);
    auto y = inject_errors(clean, langs[0], all, 9);
    CHECK(x.corrupted == y.corrupted);
    CHECK(x.gold == y.gold);
  }
  SUBCASE("foreign sentence is rejected") {
    CHECK_THROWS_AS(inject_errors(clean, langs[1], {ErrorType::kOrder}, 1), Error);
  }
}

TEST_CASE("gold edits invert every injection") {
  auto langs = languages(3);
  auto concepts = sample_concepts(400, 21);
  const std::vector<ErrorType> kinds{ErrorType::kSpelling, ErrorType::kLex, ErrorType::kGrammar, ErrorType::kOrder};
  int cases = 0;
  std::map<std::string, int> applied;
  for (int i = 0; i < 10000; ++i) {
    const auto& cs = concepts[i % concepts.size()];
    const auto& lang = langs[i % 3];
    const Style style = (i / 3) % 2 ? Style::kFormal : Style::kInformal;
    std::vector<ErrorType> pick;
    for (size_t k = 0; k < kinds.size(); ++k) {
      if ((i * 7 + static_cast<int>(k) * 3) % 5 < 2) pick.push_back(kinds[k]);
    }
    if (pick.empty()) pick.push_back(kinds[i % 4]);
    auto inj = inject_errors(realize(cs, lang, style), lang, pick, static_cast<uint64_t>(i));
    for (auto t : inj.applied) ++applied[to_string(t)];
    CHECK(inj.applied.size() + inj.skipped.size() == pick.size());
    CHECK(metrics::apply_edits(inj.corrupted_tokens, inj.gold) == inj.clean_tokens);
    CHECK(text::tokenize(inj.corrupted, lang.tag) == inj.corrupted_tokens);
    ++cases;
  }
  CHECK(cases == 10000);
  CHECK(applied.size() == 4);
}

TEST_CASE("code_switch mixes exactly two languages") {
  auto langs = languages(3);
  auto concepts = sample_concepts(200, 4);
  for (size_t i = 0; i < concepts.size(); ++i) {
    const auto& base = langs[i % 3];
    const auto& other = langs[(i + 1) % 3];
    const std::string s = code_switch(concepts[i], base, other, Style::kFormal, i);
    const double in_base = language_identity(s, base);
    const double in_other = language_identity(s, other);
    CHECK(in_base > 0.0);
    CHECK(in_other > 0.0);
    CHECK(in_base + in_other == doctest::Approx(1.0));
  }
}
