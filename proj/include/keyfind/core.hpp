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

#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace keyfind {

/// The sentinel emitted when no single final answer can be extracted.
inline constexpr std::string_view kNoValidAnswerLiteral = "[No valid answer]";

enum class TaskType {
  kAlphabetOption,
  kShortText,
  kCategoricalLabel,
  kMath,
};

inline constexpr TaskType kAllTaskTypes[] = {
    TaskType::kAlphabetOption, TaskType::kShortText, TaskType::kCategoricalLabel,
    TaskType::kMath};

/// Dataset-facing names: "alphabet option", "short text", "categorical label",
/// "math".
std::string_view to_string(TaskType type);
std::optional<TaskType> task_type_from_string(std::string_view name);

struct OptionPair {
  std::string letter;
  std::string content;

  bool operator==(const OptionPair&) const = default;
};

/// The candidate space C of an item. Alphabet option items carry
/// (letter, content) pairs, short text and categorical label items carry a
/// flat candidate list, math items carry only a free-text domain description.
class AnswerRange {
 public:
  AnswerRange() = default;

  static AnswerRange pairs(std::vector<OptionPair> options);
  static AnswerRange flat(std::vector<std::string> candidates);
  static AnswerRange math_domain(std::string description);

  bool is_pairs() const { return kind_ == Kind::kPairs; }
  bool is_flat() const { return kind_ == Kind::kFlat; }
  bool is_math_domain() const { return kind_ == Kind::kMathDomain; }

  const std::vector<OptionPair>& pair_list() const { return pairs_; }
  const std::vector<std::string>& flat_list() const { return flat_; }
  const std::string& domain() const { return domain_; }

  /// Letters of the pair list, in order.
  std::vector<std::string> letters() const;
  const OptionPair* find_letter(std::string_view letter) const;
  bool contains_flat(std::string_view candidate) const;

  /// Serializes in the standard_answer_range text form: single-quoted
  /// [[letter, content], ...] for pairs, ['a', 'b'] for flat lists, the bare
  /// description for math domains.
  std::string serialize() const;

  bool operator==(const AnswerRange&) const = default;

 private:
  enum class Kind { kPairs, kFlat, kMathDomain };
  Kind kind_ = Kind::kMathDomain;
  std::vector<OptionPair> pairs_;
  std::vector<std::string> flat_;
  std::string domain_;
};

/// Prompt configuration naming scheme: random-{0,5}-shot[-cot][-restrict].
struct PromptConfig {
  int shots = 0;       // 0 or 5
  bool cot = false;
  bool restrict_format = false;

  std::string name() const;
  static std::optional<PromptConfig> from_name(std::string_view name);

  bool operator==(const PromptConfig&) const = default;
};

/// One benchmark question: the (q, C, a) triple plus bookkeeping.
/// gold_answer is absent when the source records carry only gold
/// extractions (the KAF schema has no correct-answer field).
struct EvalItem {
  std::string id;
  std::string question;
  TaskType task_type = TaskType::kAlphabetOption;
  AnswerRange answer_range;
  std::optional<std::string> gold_answer;
  std::string source_dataset;
  std::optional<PromptConfig> prompt_config;

  bool operator==(const EvalItem&) const = default;
};

/// Raw free-form model output for one item. Empty text is valid input and
/// maps to NoValidAnswer downstream.
struct ModelResponse {
  std::string item_id;
  std::string producer_model;
  std::string text;

  bool operator==(const ModelResponse&) const = default;
};

/// Either an extracted key answer or the NoValidAnswer sentinel.
class ExtractedKey {
 public:
  ExtractedKey() = default;

  static ExtractedKey key(std::string value);
  static ExtractedKey no_valid_answer() { return ExtractedKey(); }

  bool has_value() const { return has_value_; }
  const std::string& value() const { return value_; }

  /// Key(v) -> v; NoValidAnswer -> "[No valid answer]".
  std::string serialize() const;

  /// Inverse of serialize: the exact literal maps to NoValidAnswer,
  /// everything else to Key.
  static ExtractedKey parse(std::string_view text);

  bool operator==(const ExtractedKey&) const = default;

 private:
  bool has_value_ = false;
  std::string value_;
};

std::string serialize_extracted(const ExtractedKey& key);

enum class Judgment { kCorrect, kWrong };

std::string_view to_string(Judgment judgment);

/// Per-item outcome of running one extractor plus the matcher.
struct Verdict {
  std::string item_id;
  std::string extractor_id;
  TaskType task_type = TaskType::kAlphabetOption;
  ExtractedKey extracted;
  bool unavailable = false;          // remote transport failure; excluded from metrics
  bool extraction_known = false;     // a human gold extraction exists
  bool extraction_correct = false;
  bool judgment_known = false;       // a ground-truth judgment exists
  Judgment judgment = Judgment::kWrong;
  bool judgment_correct = false;
};

/// Returns every invariant violation as a human-readable description;
/// an empty list means the item is well formed. Never mutates the input.
std::vector<std::string> validate_item(const EvalItem& item);

}  // namespace keyfind
