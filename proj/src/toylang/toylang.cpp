#include "toylang/toylang.hpp"

#include <algorithm>
#include <tuple>

#include "common/error.hpp"
#include "common/rng.hpp"
#include "text/tokenizer.hpp"
#include "text/unicode.hpp"

namespace mg::toylang {

namespace {

struct LanguageSpec {
  const char* tag;
  WordOrder order;
  Agreement agreement;
  bool contracts;
  std::vector<std::string> consonants;
  std::vector<std::string> vowels;
  const char* plural;
  const char* agr_sg;
  const char* agr_pl;
  const char* punct_formal;
  const char* punct_informal;
  uint64_t seed;
};

// Letter sets are pairwise disjoint, so no two languages share a word form.
const std::vector<LanguageSpec>& specs() {
  static const std::vector<LanguageSpec> kSpecs = {
      {"ka", WordOrder::kSVO, Agreement::kSubject, true, {"k", "t", "p", "r", "n", "s"}, {"a", "o"},
       "os", "t", "n", ".", "!", 101},
      {"lu", WordOrder::kSOV, Agreement::kObject, true, {"l", "m", "v", "d", "g"}, {"e", "i", "ē"},
       "il", "d", "m", ".", ".", 202},
      {"mi", WordOrder::kVSO, Agreement::kNone, false, {"b", "z", "h", "f", "c", "j"}, {"u", "y", "ū"},
       "uz", "", "", ".", "!", 303},
  };
  return kSpecs;
}

std::vector<std::string> syllables(Rng& rng, const ToyLanguage& lang, int count) {
  std::vector<std::string> out;
  for (int i = 0; i < count; ++i) {
    out.push_back(lang.consonants[rng.below(lang.consonants.size())] + lang.vowels[rng.below(lang.vowels.size())]);
  }
  return out;
}

std::string concat(const std::vector<std::string>& parts, size_t n) {
  std::string s;
  for (size_t i = 0; i < n && i < parts.size(); ++i) s += parts[i];
  return s;
}

// Proposes words until all forms of the new entry are unused.
class FormAllocator {
 public:
  FormAllocator(ToyLanguage& lang, uint64_t seed) : lang_(lang), rng_(seed) {}

  std::vector<std::string> propose(int n_syllables) { return syllables(rng_, lang_, n_syllables); }

  bool try_claim(const std::vector<std::pair<std::string, WordInfo>>& entries) {
    std::set<std::string> fresh;
    for (const auto& [form, info] : entries) {
      if (lang_.forms.count(form) || !fresh.insert(form).second) return false;
    }
    for (const auto& [form, info] : entries) lang_.forms.emplace(form, info);
    return true;
  }

 private:
  ToyLanguage& lang_;
  Rng rng_;
};

ToyLanguage build_language(const LanguageSpec& spec, const Inventory& inv) {
  ToyLanguage lang;
  lang.tag = spec.tag;
  lang.order = spec.order;
  lang.agreement = spec.agreement;
  lang.contracts = spec.contracts;
  lang.consonants = spec.consonants;
  lang.vowels = spec.vowels;
  lang.plural_suffix = spec.plural;
  lang.agr_singular = spec.agr_sg;
  lang.agr_plural = spec.agr_pl;
  lang.punct_formal = spec.punct_formal;
  lang.punct_informal = spec.punct_informal;
  FormAllocator alloc(lang, spec.seed);

  auto pronoun = [&](Style style) {
    while (true) {
      std::string w = concat(alloc.propose(2), 2);
      if (alloc.try_claim({{w, {Pos::kPronoun, -1, Number::kSingular, style}}})) return w;
    }
  };
  lang.pronoun_formal = pronoun(Style::kFormal);
  lang.pronoun_informal = pronoun(Style::kInformal);

  auto nouns = [&](Pos pos, int count, std::vector<std::string>& out) {
    while (static_cast<int>(out.size()) < count) {
      std::string stem = concat(alloc.propose(2), 2);
      const int meaning = static_cast<int>(out.size());
      if (alloc.try_claim({{stem, {pos, meaning, Number::kSingular, std::nullopt}},
                           {stem + lang.plural_suffix, {pos, meaning, Number::kPlural, std::nullopt}}})) {
        out.push_back(stem);
      }
    }
  };
  nouns(Pos::kAgent, inv.agents, lang.agents);
  nouns(Pos::kObject, inv.objects, lang.objects);

  while (static_cast<int>(lang.verbs.size()) < inv.verbs) {
    const auto syl = alloc.propose(3);
    const std::string full = concat(syl, 3);
    const std::string short_form = concat(syl, 2);
    const int meaning = static_cast<int>(lang.verbs.size());
    std::vector<std::pair<std::string, WordInfo>> entries;
    for (Number n : {Number::kSingular, Number::kPlural}) {
      const std::string& agr = lang.agreement == Agreement::kNone ? std::string()
                               : n == Number::kSingular           ? lang.agr_singular
                                                                  : lang.agr_plural;
      if (lang.agreement == Agreement::kNone && n == Number::kPlural) break;
      if (lang.contracts) {
        entries.push_back({full + agr, {Pos::kVerb, meaning, n, Style::kFormal}});
        entries.push_back({short_form + agr, {Pos::kVerb, meaning, n, Style::kInformal}});
      } else {
        entries.push_back({full + agr, {Pos::kVerb, meaning, n, std::nullopt}});
      }
    }
    if (alloc.try_claim(entries)) {
      lang.verbs.push_back(full);
      lang.verbs_short.push_back(short_form);
    }
  }

  while (static_cast<int>(lang.adverbs.size()) < inv.adverbs) {
    std::string w = concat(alloc.propose(3), 3);
    if (alloc.try_claim({{w, {Pos::kAdverb, static_cast<int>(lang.adverbs.size()), Number::kSingular, std::nullopt}}})) {
      lang.adverbs.push_back(w);
    }
  }
  return lang;
}

Number agreement_number(const ConceptSentence& cs, const ToyLanguage& lang) {
  switch (lang.agreement) {
    case Agreement::kSubject: return cs.subject_num;
    case Agreement::kObject: return cs.object_num;
    case Agreement::kNone: break;
  }
  return Number::kSingular;
}

bool is_content(Pos p) { return p == Pos::kAgent || p == Pos::kObject || p == Pos::kVerb || p == Pos::kAdverb; }

std::vector<std::string> surface(std::vector<std::string> tokens) {
  if (!tokens.empty()) tokens[0] = text::capitalize_first_letter(tokens[0]);
  return tokens;
}

std::string check_inventory(const ConceptSentence& cs, const ToyLanguage& lang) {
  auto in = [](int v, size_t n) { return v >= 0 && static_cast<size_t>(v) < n; };
  if (!in(cs.subject, lang.agents.size())) return "subject";
  if (!in(cs.object, lang.objects.size())) return "object";
  if (!in(cs.verb, lang.verbs.size())) return "verb";
  if (cs.adverb != -1 && !in(cs.adverb, lang.adverbs.size())) return "adverb";
  return {};
}

}  // namespace

std::string ToyLanguage::noun(const std::string& stem, Number n) const {
  return n == Number::kPlural ? stem + plural_suffix : stem;
}

std::string ToyLanguage::verb(int meaning, Number agree_with, Style style) const {
  std::string form = contracts && style == Style::kInformal ? verbs_short.at(meaning) : verbs.at(meaning);
  if (agreement != Agreement::kNone) form += agree_with == Number::kSingular ? agr_singular : agr_plural;
  return form;
}

std::string ToyLanguage::letters() const { return text::join(consonants, "") + text::join(vowels, ""); }

std::vector<ToyLanguage> languages(int n, const Inventory& inv) {
  if (n < 2 || n > static_cast<int>(specs().size())) {
    fail(mg::ErrorKind::kInvalidArgument, "toy language count must be 2 or 3, got " + std::to_string(n));
  }
  std::vector<ToyLanguage> out;
  for (int i = 0; i < n; ++i) out.push_back(build_language(specs()[i], inv));
  return out;
}

const ToyLanguage& language_by_tag(const std::vector<ToyLanguage>& langs, const std::string& tag) {
  for (const auto& l : langs) {
    if (l.tag == tag) return l;
  }
  fail(mg::ErrorKind::kUnknownTag, "unknown toy language '" + tag + "'");
}

std::string domain_of(Style style) { return style == Style::kFormal ? "ep" : "os"; }

Style style_of(const std::string& domain) {
  if (domain == "ep") return Style::kFormal;
  if (domain == "os") return Style::kInformal;
  fail(mg::ErrorKind::kUnknownTag, "unknown toy style '" + domain + "' (expected ep or os)");
}

Realization realize_tokens(const ConceptSentence& cs, const ToyLanguage& lang, Style style) {
  if (auto bad = check_inventory(cs, lang); !bad.empty()) {
    fail(mg::ErrorKind::kInvalidArgument, "unknown " + bad + " meaning for language " + lang.tag);
  }
  Realization r;
  auto put = [&](const std::string& w, Pos p) {
    r.tokens.push_back(w);
    r.roles.push_back(p);
  };
  if (cs.addressee != Addressee::kNone) {
    put(style == Style::kFormal ? lang.pronoun_formal : lang.pronoun_informal, Pos::kPronoun);
  }
  const std::string subj = lang.noun(lang.agents[cs.subject], cs.subject_num);
  const std::string obj = lang.noun(lang.objects[cs.object], cs.object_num);
  const std::string verb = lang.verb(cs.verb, agreement_number(cs, lang), style);
  const bool has_adv = cs.adverb >= 0;
  const std::string adv = has_adv ? lang.adverbs[cs.adverb] : std::string();
  switch (lang.order) {
    case WordOrder::kSVO:
      put(subj, Pos::kAgent);
      put(verb, Pos::kVerb);
      put(obj, Pos::kObject);
      if (has_adv) put(adv, Pos::kAdverb);
      break;
    case WordOrder::kSOV:
      put(subj, Pos::kAgent);
      put(obj, Pos::kObject);
      if (has_adv) put(adv, Pos::kAdverb);
      put(verb, Pos::kVerb);
      break;
    case WordOrder::kVSO:
      put(verb, Pos::kVerb);
      put(subj, Pos::kAgent);
      put(obj, Pos::kObject);
      if (has_adv) put(adv, Pos::kAdverb);
      break;
  }
  put(style == Style::kFormal ? lang.punct_formal : lang.punct_informal, Pos::kPunct);
  r.tokens = surface(r.tokens);
  return r;
}

std::string realize(const ConceptSentence& cs, const ToyLanguage& lang, Style style) {
  return text::detokenize(realize_tokens(cs, lang, style).tokens, lang.tag);
}

const std::map<std::string, WordInfo>& closure(const ToyLanguage& lang) { return lang.forms; }

bool word_in_language(const std::string& token, const ToyLanguage& lang) {
  return lang.forms.count(text::lowercase(token)) > 0;
}

double language_identity(const std::string& sentence, const ToyLanguage& lang) {
  int words = 0, hits = 0;
  for (const auto& t : text::tokenize(sentence, lang.tag)) {
    if (!text::has_letter(t)) continue;
    ++words;
    if (word_in_language(t, lang)) ++hits;
  }
  return words == 0 ? 1.0 : static_cast<double>(hits) / words;
}

std::optional<ConceptSentence> analyze(const std::string& sentence, const ToyLanguage& lang) {
  ConceptSentence cs;
  cs.adverb = -1;
  bool subject = false, verb = false, object = false;
  for (const auto& t : text::tokenize(sentence, lang.tag)) {
    if (!text::has_letter(t)) continue;
    auto it = lang.forms.find(text::lowercase(t));
    if (it == lang.forms.end()) return std::nullopt;
    const WordInfo& w = it->second;
    switch (w.pos) {
      case Pos::kPronoun:
        if (cs.addressee != Addressee::kNone) return std::nullopt;
        cs.addressee = *w.style == Style::kFormal ? Addressee::kFormal : Addressee::kInformal;
        break;
      case Pos::kAgent:
        if (subject) return std::nullopt;
        subject = true;
        cs.subject = w.meaning;
        cs.subject_num = w.number;
        break;
      case Pos::kObject:
        if (object) return std::nullopt;
        object = true;
        cs.object = w.meaning;
        cs.object_num = w.number;
        break;
      case Pos::kVerb:
        if (verb) return std::nullopt;
        verb = true;
        cs.verb = w.meaning;
        break;
      case Pos::kAdverb:
        if (cs.adverb >= 0) return std::nullopt;
        cs.adverb = w.meaning;
        break;
      case Pos::kPunct: break;
    }
  }
  if (!subject || !verb || !object) return std::nullopt;
  return cs;
}

std::vector<ConceptSentence> sample_concepts(size_t n, uint64_t seed, const Inventory& inv) {
  const double space = 2.0 * inv.agents * 2.0 * inv.objects * inv.verbs * (inv.adverbs + 1) * 3.0;
  if (static_cast<double>(n) > space / 2) {
    fail(mg::ErrorKind::kInvalidArgument, "requested " + std::to_string(n) + " distinct sentences from a space of " +
                                              std::to_string(static_cast<long>(space)));
  }
  Rng rng(derive_seed(seed, 0xC0C0));
  std::set<ConceptSentence> seen;
  std::vector<ConceptSentence> out;
  while (out.size() < n) {
    ConceptSentence cs;
    cs.subject = static_cast<int>(rng.below(inv.agents));
    cs.verb = static_cast<int>(rng.below(inv.verbs));
    cs.object = static_cast<int>(rng.below(inv.objects));
    cs.subject_num = rng.below(2) ? Number::kPlural : Number::kSingular;
    cs.object_num = rng.below(2) ? Number::kPlural : Number::kSingular;
    cs.adverb = static_cast<int>(rng.below(inv.adverbs + 1)) - 1;
    cs.addressee = static_cast<Addressee>(rng.below(3));
    if (seen.insert(cs).second) out.push_back(cs);
  }
  return out;
}

std::vector<corpus::SentencePair> realize_pairs(const std::vector<ConceptSentence>& concepts,
                                                const std::vector<ToyLanguage>& langs) {
  std::vector<corpus::SentencePair> out;
  for (size_t a = 0; a < langs.size(); ++a) {
    for (size_t b = a + 1; b < langs.size(); ++b) {
      for (Style style : {Style::kFormal, Style::kInformal}) {
        for (const auto& cs : concepts) {
          out.push_back({realize(cs, langs[a], style), realize(cs, langs[b], style), langs[a].tag, langs[b].tag,
                         domain_of(style)});
        }
      }
    }
  }
  return out;
}

ToyCorpus generate_corpus(int n_langs, size_t n, uint64_t seed, const Inventory& inv) {
  if (n == 0) fail(mg::ErrorKind::kInvalidArgument, "toy corpus needs at least one sentence");
  ToyCorpus corpus;
  corpus.concepts = sample_concepts(n, seed, inv);
  corpus.pairs = realize_pairs(corpus.concepts, languages(n_langs, inv));
  return corpus;
}

std::string to_string(ErrorType type) {
  switch (type) {
    case ErrorType::kSpelling: return "spelling";
    case ErrorType::kLex: return "lex";
    case ErrorType::kGrammar: return "grammar";
    case ErrorType::kOrder: return "order";
  }
  return "?";
}

ErrorType parse_error_type(const std::string& name) {
  for (ErrorType t : {ErrorType::kSpelling, ErrorType::kLex, ErrorType::kGrammar, ErrorType::kOrder}) {
    if (to_string(t) == name) return t;
  }
  fail(mg::ErrorKind::kInvalidArgument, "unknown error kind '" + name + "' (spelling, lex, grammar, order)");
}

Injection inject_errors(const std::string& sentence, const ToyLanguage& lang, const std::vector<ErrorType>& types,
                        uint64_t seed) {
  Injection inj;
  inj.clean_tokens = text::tokenize(sentence, lang.tag);
  std::vector<std::string> cur;
  std::vector<WordInfo> info;
  for (const auto& t : inj.clean_tokens) {
    cur.push_back(text::lowercase(t));
    if (!text::has_letter(t)) {
      info.push_back({});
      continue;
    }
    auto it = lang.forms.find(cur.back());
    if (it == lang.forms.end()) {
      fail(mg::ErrorKind::kInvalidArgument, "'" + t + "' is not a word of toy language " + lang.tag);
    }
    info.push_back(it->second);
  }
  const std::vector<std::string> original = cur;
  std::vector<bool> touched(cur.size(), false);
  std::vector<std::tuple<int, int, ErrorType>> spans;

  auto untouched_content = [&](auto pred) {
    std::vector<int> out;
    for (size_t i = 0; i < cur.size(); ++i) {
      if (!touched[i] && is_content(info[i].pos) && pred(info[i])) out.push_back(static_cast<int>(i));
    }
    return out;
  };
  auto mark = [&](int start, int end, ErrorType type) {
    for (int i = start; i < end; ++i) touched[i] = true;
    spans.emplace_back(start, end, type);
  };
  auto inflect = [&](const WordInfo& w, int meaning) {
    switch (w.pos) {
      case Pos::kAgent: return lang.noun(lang.agents[meaning], w.number);
      case Pos::kObject: return lang.noun(lang.objects[meaning], w.number);
      case Pos::kVerb: return lang.verb(meaning, w.number, w.style.value_or(Style::kFormal));
      default: return lang.adverbs[meaning];
    }
  };
  auto inventory_size = [&](Pos p) {
    switch (p) {
      case Pos::kAgent: return lang.agents.size();
      case Pos::kObject: return lang.objects.size();
      case Pos::kVerb: return lang.verbs.size();
      default: return lang.adverbs.size();
    }
  };

  // Grammar first: it is tied to one position. Order last: it needs two.
  std::vector<ErrorType> order = types;
  std::stable_sort(order.begin(), order.end(), [](ErrorType a, ErrorType b) {
    auto rank = [](ErrorType t) {
      return t == ErrorType::kGrammar ? 0 : t == ErrorType::kLex ? 1 : t == ErrorType::kSpelling ? 2 : 3;
    };
    return rank(a) < rank(b);
  });
  order.erase(std::unique(order.begin(), order.end()), order.end());

  for (ErrorType type : order) {
    Rng rng(derive_seed(seed, static_cast<uint64_t>(type) + 1));
    switch (type) {
      case ErrorType::kGrammar: {
        if (lang.agreement == Agreement::kNone) {
          inj.skipped.push_back({type, "language has no agreement"});
          continue;
        }
        auto verbs = untouched_content([](const WordInfo& w) { return w.pos == Pos::kVerb; });
        if (verbs.empty()) {
          inj.skipped.push_back({type, "no verb available"});
          continue;
        }
        const int i = verbs[0];
        WordInfo w = info[i];
        w.number = w.number == Number::kSingular ? Number::kPlural : Number::kSingular;
        cur[i] = inflect(w, w.meaning);
        mark(i, i + 1, type);
        break;
      }
      case ErrorType::kLex: {
        auto cands = untouched_content([&](const WordInfo& w) { return inventory_size(w.pos) >= 2; });
        if (cands.empty()) {
          inj.skipped.push_back({type, "no content word available"});
          continue;
        }
        const int i = cands[rng.below(cands.size())];
        const int n = static_cast<int>(inventory_size(info[i].pos));
        const int other = (info[i].meaning + 1 + static_cast<int>(rng.below(n - 1))) % n;
        cur[i] = inflect(info[i], other);
        mark(i, i + 1, type);
        break;
      }
      case ErrorType::kSpelling: {
        auto cands = untouched_content([](const WordInfo&) { return true; });
        if (cands.empty()) {
          inj.skipped.push_back({type, "no content word available"});
          continue;
        }
        const int i = cands[rng.below(cands.size())];
        const auto chars = text::codepoints(cur[i]);
        std::string best;
        for (int attempt = 0; attempt < 32; ++attempt) {
          const size_t pos = rng.below(chars.size());
          const bool vowel = std::find(lang.vowels.begin(), lang.vowels.end(), chars[pos]) != lang.vowels.end();
          const auto& pool = vowel ? lang.vowels : lang.consonants;
          const std::string& sub = pool[rng.below(pool.size())];
          if (sub == chars[pos]) continue;
          auto changed = chars;
          changed[pos] = sub;
          best = text::join(changed, "");
          if (!lang.forms.count(best)) break;
        }
        if (best.empty()) {
          inj.skipped.push_back({type, "no substitution found"});
          continue;
        }
        cur[i] = best;
        mark(i, i + 1, type);
        break;
      }
      case ErrorType::kOrder: {
        std::vector<int> starts;
        for (size_t i = 0; i + 1 < cur.size(); ++i) {
          if (!touched[i] && !touched[i + 1] && is_content(info[i].pos) && is_content(info[i + 1].pos)) {
            starts.push_back(static_cast<int>(i));
          }
        }
        if (starts.empty()) {
          inj.skipped.push_back({type, "fewer than two adjacent constituents"});
          continue;
        }
        const int i = starts[rng.below(starts.size())];
        std::swap(cur[i], cur[i + 1]);
        mark(i, i + 2, type);
        break;
      }
    }
    inj.applied.push_back(type);
  }

  inj.corrupted_tokens = surface(cur);
  std::sort(spans.begin(), spans.end());
  for (const auto& [start, end, type] : spans) {
    metrics::Edit e;
    e.start = start;
    e.end = end;
    e.replacement.assign(inj.clean_tokens.begin() + start, inj.clean_tokens.begin() + end);
    e.type = to_string(type);
    inj.gold.push_back(e);
  }
  inj.corrupted = text::detokenize(inj.corrupted_tokens, lang.tag);
  return inj;
}

std::string code_switch(const ConceptSentence& cs, const ToyLanguage& base, const ToyLanguage& other, Style style,
                        uint64_t seed) {
  Realization r = realize_tokens(cs, base, style);
  std::vector<int> content;
  for (size_t i = 0; i < r.roles.size(); ++i) {
    if (is_content(r.roles[i])) content.push_back(static_cast<int>(i));
  }
  Rng rng(seed);
  const uint64_t full = (uint64_t{1} << content.size()) - 1;
  const uint64_t mask = 1 + rng.below(full - 1);  // non-empty proper subset
  std::vector<std::string> words;
  for (size_t i = 0; i < r.tokens.size(); ++i) words.push_back(text::lowercase(r.tokens[i]));
  for (size_t k = 0; k < content.size(); ++k) {
    if (!(mask >> k & 1)) continue;
    const int i = content[k];
    switch (r.roles[i]) {
      case Pos::kAgent: words[i] = other.noun(other.agents[cs.subject], cs.subject_num); break;
      case Pos::kObject: words[i] = other.noun(other.objects[cs.object], cs.object_num); break;
      case Pos::kVerb: words[i] = other.verb(cs.verb, agreement_number(cs, other), style); break;
      case Pos::kAdverb: words[i] = other.adverbs[cs.adverb]; break;
      default: break;
    }
  }
  return text::detokenize(surface(words), base.tag);
}

}  // namespace mg::toylang
