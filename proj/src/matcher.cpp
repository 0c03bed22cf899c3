// Copyright 2026 The keyfind Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "keyfind/matcher.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "keyfind/util.hpp"
#include "json.hpp"

namespace keyfind {

namespace {

std::string strip_trailing_periods(std::string s) {
  while (!s.empty() && s.back() == '.') s.pop_back();
  return util::trim(s);
}

// Removes one matched layer of surrounding brackets per pass until stable.
std::string strip_surrounding_brackets(std::string s) {
  while (s.size() >= 2) {
    char a = s.front();
    char b = s.back();
    bool matched = (a == '(' && b == ')') || (a == '[' && b == ']') ||
                   (a == '{' && b == '}') || (a == '"' && b == '"') ||
                   (a == '\'' && b == '\'');
    if (!matched) break;
    s = util::trim(s.substr(1, s.size() - 2));
  }
  // A dangling close without its opener, as in "a)" or "b].", is also noise.
  while (!s.empty() && (s.back() == ')' || s.back() == ']')) {
    char open = s.back() == ')' ? '(' : '[';
    if (s.find(open) != std::string::npos) break;
    s.pop_back();
    s = util::trim(s);
  }
  return s;
}

std::string normalize_letter(std::string s, const NormalizationProfile& profile) {
  s = util::trim(s);
  if (profile.strip_brackets_and_period) {
    // Alternate the two strips to a fixpoint: "(a)." needs the period gone
    // before the parentheses match, "((a).)." needs several rounds.
    while (true) {
      std::string before = s;
      s = strip_trailing_periods(std::move(s));
      s = strip_surrounding_brackets(std::move(s));
      if (s == before) break;
    }
  }
  if (profile.collapse_whitespace) s = util::collapse_whitespace(s);
  if (profile.letter_uppercase) s = util::to_upper(s);
  return s;
}

std::string normalize_math(std::string s, const NormalizationProfile& profile) {
  s = util::trim(s);
  bool latex = s.find('\\') != std::string::npos;
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    if (profile.math_strip_commas && c == ',') continue;
    if (profile.math_strip_currency_outside_latex && c == '$' && !latex) continue;
    out.push_back(c);
  }
  s = util::trim(out);
  if (!latex) {
    // Trailing dots are sentence punctuation; interior decimal points stay.
    // Stripped after the comma/currency pass so nothing re-exposes a dot.
    while (!s.empty() && s.back() == '.') s.pop_back();
    s = util::trim(s);
  }
  return s;
}

std::string normalize_text(std::string s, const NormalizationProfile& profile) {
  s = util::trim(s);
  if (profile.collapse_whitespace) s = util::collapse_whitespace(s);
  return s;
}

}  // namespace

NormalizationProfile NormalizationProfile::from_json_text(std::string_view text) {
  nlohmann::json j = nlohmann::json::parse(text);
  NormalizationProfile p;
  p.letter_uppercase = j.value("letter_uppercase", p.letter_uppercase);
  p.strip_brackets_and_period = j.value("strip_brackets_and_period", p.strip_brackets_and_period);
  p.collapse_whitespace = j.value("collapse_whitespace", p.collapse_whitespace);
  p.math_strip_commas = j.value("math_strip_commas", p.math_strip_commas);
  p.math_strip_currency_outside_latex =
      j.value("math_strip_currency_outside_latex", p.math_strip_currency_outside_latex);
  p.categorical_case_sensitive =
      j.value("categorical_case_sensitive", p.categorical_case_sensitive);
  return p;
}

NormalizationProfile NormalizationProfile::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read normalization profile: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return from_json_text(buf.str());
}

std::string normalize(std::string_view raw, TaskType type,
                      const NormalizationProfile& profile) {
  std::string s(raw);
  switch (type) {
    case TaskType::kAlphabetOption:
      return normalize_letter(std::move(s), profile);
    case TaskType::kMath:
      return normalize_math(std::move(s), profile);
    case TaskType::kShortText:
      return normalize_text(std::move(s), profile);
    case TaskType::kCategoricalLabel: {
      std::string t = normalize_text(std::move(s), profile);
      if (!profile.categorical_case_sensitive) t = util::to_lower(t);
      return t;
    }
  }
  return s;
}

bool check_letter_content_consistency(const EvalItem& item, std::string_view letter,
                                      std::optional<std::string_view> content_mention,
                                      const NormalizationProfile& profile) {
  std::string norm_letter = normalize(letter, TaskType::kAlphabetOption, profile);
  const OptionPair* option = item.answer_range.find_letter(norm_letter);
  if (option == nullptr) return false;
  if (!content_mention) return true;
  auto fold = [&](std::string_view text) {
    return util::to_lower(strip_trailing_periods(normalize_text(std::string(text), profile)));
  };
  return fold(*content_mention) == fold(option->content);
}

Judgment judge(const EvalItem& item, const ExtractedKey& extracted,
               const NormalizationProfile& profile) {
  if (!item.gold_answer) return Judgment::kWrong;
  const std::string& gold = *item.gold_answer;
  std::string gold_norm = gold == kNoValidAnswerLiteral
                              ? std::string(kNoValidAnswerLiteral)
                              : normalize(gold, item.task_type, profile);
  return extracted.serialize() == gold_norm ? Judgment::kCorrect : Judgment::kWrong;
}

bool score_extraction(const ExtractedKey& extracted, const ExtractedKey& gold_extraction) {
  return extracted.serialize() == gold_extraction.serialize();
}

}  // namespace keyfind
