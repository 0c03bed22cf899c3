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

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "keyfind/core.hpp"

namespace keyfind {

/// Per-option synonym surface forms. `canonical` is the option letter for
/// alphabet items and the candidate string otherwise. `forms` are matched
/// case-insensitively except single bare letters, which stay case-sensitive
/// so articles like "A dog" do not resolve to option A.
struct SynonymEntry {
  std::string canonical;
  std::vector<std::string> forms;
};

struct SynonymMap {
  std::vector<SynonymEntry> options;
};

/// Answer-framing templates; every template contains exactly one
/// "<final answer>" slot. List order is significant: earlier templates win
/// when spans collide.
struct WrapperPatternSet {
  std::vector<std::string> templates;
};

inline constexpr std::string_view kFinalAnswerSlot = "<final answer>";

/// Declarative restatement of a question with an answer slot. `question_part`
/// selects items whose question text contains it.
struct RestatementRule {
  std::string question_part;
  std::string declarative_template;  // contains one <final answer> slot
};

struct RestatementRules {
  std::vector<RestatementRule> rules;
};

enum class CandidateKind { kDirect, kPromptWrapped, kQuestionWrapped };

/// A candidate key answer sentence: a byte span of the response plus the
/// option (or math token) it resolves to.
struct KeySentence {
  size_t begin = 0;
  size_t end = 0;
  CandidateKind kind = CandidateKind::kDirect;
  std::string resolved;  // canonical option, or normalized math token
};

/// Wrapper templates, CoT markers, extra synonyms and restatement rules,
/// loadable from a JSON config and order-significant for wrappers.
struct SentenceRules {
  WrapperPatternSet wrappers;
  std::vector<std::string> cot_markers;
  std::vector<std::string> conclusion_connectives;
  std::map<std::string, std::vector<std::string>> static_synonyms;
  RestatementRules restatements;

  static const SentenceRules& defaults();
  static SentenceRules load(const std::string& path);
  static SentenceRules from_json_text(std::string_view text);

  /// Throws when a wrapper has no slot, more than one slot, or repeats.
  void validate() const;
};

/// Mechanically generated synonym map for an item: letter variants,
/// ordinal phrases and option contents for alphabet items, the candidate
/// strings otherwise. Forms claimed by two options are dropped from both.
SynonymMap make_synonym_map(const EvalItem& item,
                            const std::map<std::string, std::vector<std::string>>&
                                static_synonyms = {});

/// Occurrences of synonym forms in text, longest match winning where spans
/// collide.
struct SynonymMatch {
  size_t begin = 0;
  size_t end = 0;
  std::string canonical;
};
std::vector<SynonymMatch> find_option_mentions(std::string_view text,
                                               const SynonymMap& synonyms);

/// All S1/S2/S3 matches in document order. Direct matches inside a wrapped
/// match span are suppressed, so a wrapped answer is not double counted.
std::vector<KeySentence> find_candidates(const EvalItem& item,
                                         const ModelResponse& response,
                                         const SynonymMap& synonyms,
                                         const WrapperPatternSet& wrappers,
                                         const RestatementRules& restatements = {});

/// True when multi-step reasoning markers precede the final candidate:
/// configured marker phrases, enumerated steps, arithmetic chains, or a
/// conclusion connective opening a non-initial sentence.
bool detect_cot(const ModelResponse& response,
                const SentenceRules& rules = SentenceRules::defaults());

/// Key-answer resolution: no candidate -> NoValidAnswer; one candidate or
/// several agreeing candidates -> that answer; several disagreeing
/// candidates -> the last one if a CoT process is present, otherwise
/// NoValidAnswer.
ExtractedKey resolve(const EvalItem& item, const std::vector<KeySentence>& candidates,
                     bool cot);

/// Same rule, also reporting which candidate won (nullptr when none).
struct Resolution {
  ExtractedKey key;
  const KeySentence* winner = nullptr;
};
Resolution resolve_detailed(const EvalItem& item,
                            const std::vector<KeySentence>& candidates, bool cot);

/// Locates wrapper occurrences in free text without option context; used by
/// the wrapper-substitution augmentation. Returns the template index, the
/// full match span and the slot span.
struct WrapperMatch {
  size_t template_index = 0;
  size_t begin = 0;
  size_t end = 0;
  size_t slot_begin = 0;
  size_t slot_end = 0;
};
std::optional<WrapperMatch> find_wrapper_match(std::string_view text,
                                               const WrapperPatternSet& wrappers);

}  // namespace keyfind
