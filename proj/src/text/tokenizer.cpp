#include "text/tokenizer.hpp"

#include "text/unicode.hpp"

namespace mg::text {

namespace {

bool is_apostrophe(char32_t c) { return c == '\'' || c == 0x2019; }

bool elides_left(std::string_view lang) { return lang == "fr" || lang == "it" || lang == "ca"; }

bool is_word_char(char32_t c) { return !is_space(c) && !is_punct(c); }

bool starts_with(std::u32string_view s, std::u32string_view prefix) {
  return s.size() >= prefix.size() && s.substr(0, prefix.size()) == prefix;
}

bool is_url(std::u32string_view chunk) {
  return starts_with(chunk, U"http://") || starts_with(chunk, U"https://") || starts_with(chunk, U"www.");
}

bool is_trailing_punct(char32_t c) {
  return c == '.' || c == ',' || c == '!' || c == '?' || c == ';' || c == ':' || c == ')' || c == ']' || c == '"';
}

void tokenize_chunk(std::u32string_view chunk, bool elide_left, std::vector<std::string>& out) {
  if (is_url(chunk)) {
    size_t end = chunk.size();
    while (end > 0 && is_trailing_punct(chunk[end - 1])) --end;
    out.push_back(encode_utf8(chunk.substr(0, end)));
    for (size_t i = end; i < chunk.size(); ++i) out.push_back(encode_utf8(chunk[i]));
    return;
  }
  std::u32string word;
  auto flush = [&]() {
    if (!word.empty()) out.push_back(encode_utf8(word));
    word.clear();
  };
  const size_t n = chunk.size();
  for (size_t i = 0; i < n; ++i) {
    const char32_t c = chunk[i];
    const char32_t prev = i > 0 ? chunk[i - 1] : 0;
    const char32_t next = i + 1 < n ? chunk[i + 1] : 0;
    if (is_word_char(c)) {
      word.push_back(c);
      continue;
    }
    if (is_apostrophe(c) && !word.empty() && is_letter(prev) && is_letter(next)) {
      if (elide_left) {
        word.push_back(c);
        flush();
      } else {
        flush();
        word.push_back(c);
      }
      continue;
    }
    if ((c == '.' || c == ',') && is_digit(prev) && is_digit(next) && !word.empty()) {
      word.push_back(c);
      continue;
    }
    if (c == '-' && !word.empty() && is_word_char(next)) {
      word.push_back(c);
      continue;
    }
    flush();
    out.push_back(encode_utf8(c));
  }
  flush();
}

bool attaches_left(const std::string& tok) {
  static const char* kClosers[] = {".", ",", "!", "?", ";", ":", "%", ")", "]", "}", "\xC2\xBB", "\xE2\x80\xA6"};
  for (const char* c : kClosers) {
    if (tok == c) return true;
  }
  // clitic such as 't or 's
  std::u32string cps = decode_utf8(tok);
  return cps.size() >= 2 && is_apostrophe(cps[0]) && is_letter(cps[1]);
}

bool attaches_right(const std::string& tok) {
  static const char* kOpeners[] = {"(", "[", "{", "\xC2\xAB", "\xC2\xBF", "\xC2\xA1", "$"};
  for (const char* c : kOpeners) {
    if (tok == c) return true;
  }
  // elided article such as l'
  std::u32string cps = decode_utf8(tok);
  return cps.size() >= 2 && is_apostrophe(cps.back()) && is_letter(cps[cps.size() - 2]);
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text, std::string_view lang) {
  std::vector<std::string> out;
  const bool elide = elides_left(lang);
  for (const std::string& chunk : split_whitespace(text)) tokenize_chunk(decode_utf8(chunk), elide, out);
  return out;
}

std::string detokenize(const std::vector<std::string>& tokens, std::string_view /*lang*/) {
  std::string out;
  bool glue_next = false;
  bool double_open = false;
  bool single_open = false;
  for (size_t i = 0; i < tokens.size(); ++i) {
    const std::string& tok = tokens[i];
    bool glue = glue_next || i == 0;
    glue_next = false;
    if (tok == "\"") {
      if (double_open) {
        glue = true;
      } else {
        glue_next = true;
      }
      double_open = !double_open;
    } else if (tok == "'") {
      if (single_open) {
        glue = true;
      } else {
        glue_next = true;
      }
      single_open = !single_open;
    } else {
      if (attaches_left(tok)) glue = true;
      if (attaches_right(tok)) glue_next = true;
    }
    if (!glue) out.push_back(' ');
    out += tok;
  }
  return out;
}

}  // namespace mg::text
