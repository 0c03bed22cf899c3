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

#include "keyfind/core.hpp"

#include <algorithm>
#include <set>

#include "keyfind/util.hpp"

namespace keyfind {

std::string_view to_string(TaskType type) {
  switch (type) {
    case TaskType::kAlphabetOption: return "alphabet option";
    case TaskType::kShortText: return "short text";
    case TaskType::kCategoricalLabel: return "categorical label";
    case TaskType::kMath: return "math";
  }
  return "unknown";
}

std::optional<TaskType> task_type_from_string(std::string_view name) {
  for (TaskType t : kAllTaskTypes) {
    if (name == to_string(t)) return t;
  }
  return std::nullopt;
}

AnswerRange AnswerRange::pairs(std::vector<OptionPair> options) {
  AnswerRange r;
  r.kind_ = Kind::kPairs;
  r.pairs_ = std::move(options);
  return r;
}

AnswerRange AnswerRange::flat(std::vector<std::string> candidates) {
  AnswerRange r;
  r.kind_ = Kind::kFlat;
  r.flat_ = std::move(candidates);
  return r;
}

AnswerRange AnswerRange::math_domain(std::string description) {
  AnswerRange r;
  r.kind_ = Kind::kMathDomain;
  r.domain_ = std::move(description);
  return r;
}

std::vector<std::string> AnswerRange::letters() const {
  std::vector<std::string> out;
  out.reserve(pairs_.size());
  for (const auto& p : pairs_) out.push_back(p.letter);
  return out;
}

const OptionPair* AnswerRange::find_letter(std::string_view letter) const {
  for (const auto& p : pairs_) {
    if (p.letter == letter) return &p;
  }
  return nullptr;
}

bool AnswerRange::contains_flat(std::string_view candidate) const {
  return std::find(flat_.begin(), flat_.end(), candidate) != flat_.end();
}

std::string AnswerRange::serialize() const {
  switch (kind_) {
    case Kind::kPairs: {
      std::vector<std::pair<std::string, std::string>> pairs;
      pairs.reserve(pairs_.size());
      for (const auto& p : pairs_) pairs.emplace_back(p.letter, p.content);
      return util::render_pair_list(pairs);
    }
    case Kind::kFlat:
      return util::render_flat_list(flat_);
    case Kind::kMathDomain:
      return domain_;
  }
  return {};
}

std::string PromptConfig::name() const {
  std::string out = "random-" + std::to_string(shots) + "-shot";
  if (cot) out += "-cot";
  if (restrict_format) out += "-restrict";
  return out;
}

std::optional<PromptConfig> PromptConfig::from_name(std::string_view name) {
  for (int shots : {0, 5}) {
    for (bool cot : {false, true}) {
      for (bool restrict_format : {false, true}) {
        PromptConfig c{shots, cot, restrict_format};
        if (c.name() == name) return c;
      }
    }
  }
  return std::nullopt;
}

ExtractedKey ExtractedKey::key(std::string value) {
  ExtractedKey k;
  k.has_value_ = true;
  k.value_ = std::move(value);
  return k;
}

std::string ExtractedKey::serialize() const {
  return has_value_ ? value_ : std::string(kNoValidAnswerLiteral);
}

ExtractedKey ExtractedKey::parse(std::string_view text) {
  if (text == kNoValidAnswerLiteral) return no_valid_answer();
  return key(std::string(text));
}

std::string serialize_extracted(const ExtractedKey& key) { return key.serialize(); }

std::string_view to_string(Judgment judgment) {
  return judgment == Judgment::kCorrect ? "Correct" : "Wrong";
}

namespace {

bool is_single_uppercase(const std::string& s) {
  return s.size() == 1 && s[0] >= 'A' && s[0] <= 'Z';
}

}  // namespace

std::vector<std::string> validate_item(const EvalItem& item) {
  std::vector<std::string> violations;
  const AnswerRange& range = item.answer_range;

  switch (item.task_type) {
    case TaskType::kAlphabetOption:
      if (!range.is_pairs())
        violations.push_back("alphabet option item must carry a pair-list answer range");
      break;
    case TaskType::kShortText:
    case TaskType::kCategoricalLabel:
      if (!range.is_flat())
        violations.push_back(std::string(to_string(item.task_type)) +
                             " item must carry a flat-list answer range");
      break;
    case TaskType::kMath:
      if (!range.is_math_domain())
        violations.push_back("math item must carry a math-domain answer range");
      break;
  }

  if (range.is_pairs()) {
    std::set<std::string> seen;
    for (const auto& p : range.pair_list()) {
      if (!is_single_uppercase(p.letter))
        violations.push_back("option letter '" + p.letter +
                             "' is not a single uppercase letter");
      if (!seen.insert(p.letter).second)
        violations.push_back("duplicate option letter " + p.letter);
      if (p.content.empty()) violations.push_back("empty content for option " + p.letter);
      if (p.content == kNoValidAnswerLiteral)
        violations.push_back("option " + p.letter + " uses the reserved literal " +
                             std::string(kNoValidAnswerLiteral));
    }
  }
  if (range.is_flat()) {
    std::set<std::string> seen;
    for (const auto& c : range.flat_list()) {
      if (c.empty()) violations.push_back("empty answer-range candidate");
      if (!seen.insert(c).second) violations.push_back("duplicate candidate '" + c + "'");
      if (c == kNoValidAnswerLiteral)
        violations.push_back("answer-range candidate uses the reserved literal " +
                             std::string(kNoValidAnswerLiteral));
    }
  }

  if (item.gold_answer && *item.gold_answer != kNoValidAnswerLiteral) {
    const std::string& gold = *item.gold_answer;
    switch (item.task_type) {
      case TaskType::kAlphabetOption:
        if (range.is_pairs() && range.find_letter(gold) == nullptr)
          violations.push_back("gold answer '" + gold + "' is not an option letter");
        break;
      case TaskType::kShortText:
      case TaskType::kCategoricalLabel:
        if (range.is_flat() && !range.contains_flat(gold))
          violations.push_back("gold answer '" + gold + "' is not a listed candidate");
        break;
      case TaskType::kMath:
        if (gold.empty()) violations.push_back("empty math gold answer");
        break;
    }
  }

  return violations;
}

}  // namespace keyfind
