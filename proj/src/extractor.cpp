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

#include "keyfind/extractor.hpp"

#include <algorithm>

#include "keyfind/util.hpp"

namespace keyfind {

std::vector<Extraction> Extractor::extract_batch(
    const std::vector<std::pair<EvalItem, ModelResponse>>& pairs) {
  std::vector<Extraction> out;
  out.reserve(pairs.size());
  for (const auto& [item, response] : pairs) {
    out.push_back({item.id, extract(item, response)});
  }
  return out;
}

RuleExtractor::RuleExtractor(SentenceRules rules, NormalizationProfile profile,
                             std::string id)
    : id_(std::move(id)), rules_(std::move(rules)), profile_(profile) {
  rules_.validate();
}

std::optional<ExtractedKey> RuleExtractor::extract(const EvalItem& item,
                                                   const ModelResponse& response) {
  if (util::trim(response.text).empty()) return ExtractedKey::no_valid_answer();

  SynonymMap synonyms = make_synonym_map(item, rules_.static_synonyms);
  std::vector<KeySentence> candidates =
      find_candidates(item, response, synonyms, rules_.wrappers, rules_.restatements);
  bool cot = detect_cot(response, rules_);
  Resolution res = resolve_detailed(item, candidates, cot);
  if (!res.key.has_value()) return res.key;

  if (item.task_type == TaskType::kAlphabetOption && res.winner != nullptr) {
    // Agreement rule: a sentence naming both an option letter and an option
    // content that belong to different options yields no valid answer.
    std::string_view text = response.text;
    auto sentences = util::split_sentences(text);
    size_t si = util::sentence_index_at(sentences, res.winner->begin);
    if (si != static_cast<size_t>(-1)) {
      std::string_view sentence =
          text.substr(sentences[si].begin, sentences[si].end - sentences[si].begin);

      SynonymMap letter_forms;
      SynonymMap content_forms;
      for (const auto& option : item.answer_range.pair_list()) {
        letter_forms.options.push_back(
            {option.letter,
             {option.letter, "(" + option.letter + ")", option.letter + ")",
              option.letter + ".", "option " + option.letter, "choice " + option.letter}});
        std::string content = util::trim(option.content);
        while (!content.empty() && content.back() == '.') content.pop_back();
        if (!content.empty()) content_forms.options.push_back({option.letter, {content}});
      }
      auto letters = find_option_mentions(sentence, letter_forms);
      auto contents = find_option_mentions(sentence, content_forms);
      if (!letters.empty() && !contents.empty()) {
        bool agree = false;
        for (const auto& letter : letters) {
          for (const auto& content : contents) {
            if (letter.canonical == content.canonical) agree = true;
          }
        }
        if (!agree) return ExtractedKey::no_valid_answer();
      }
    }
    if (item.answer_range.find_letter(res.key.value()) == nullptr)
      return ExtractedKey::no_valid_answer();
  }

  if (item.task_type == TaskType::kMath) {
    return ExtractedKey::key(normalize(res.key.value(), TaskType::kMath, profile_));
  }
  return res.key;
}

}  // namespace keyfind
