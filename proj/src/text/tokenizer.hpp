#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace mg::text {

// Rule-based word tokenizer:
//  * whitespace separates chunks and is collapsed;
//  * punctuation characters become single-character tokens;
//  * an apostrophe between two letters starts a clitic token ("don't" ->
//    "don" "'t"); for elision languages (fr, it, ca) it ends the left token
//    instead ("l'homme" -> "l'" "homme");
//  * numbers keep internal '.' and ',' between digits ("3.14", "1,000");
//  * hyphens between word characters stay inside the word;
//  * URLs (http://, https://, www.) are kept whole apart from trailing
//    sentence punctuation.
std::vector<std::string> tokenize(std::string_view text, std::string_view lang);

// Inverse of tokenize up to whitespace normalization for conventionally
// punctuated text.
std::string detokenize(const std::vector<std::string>& tokens, std::string_view lang);

}  // namespace mg::text
