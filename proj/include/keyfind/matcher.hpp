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

#include "keyfind/core.hpp"

namespace keyfind {

/// Per-task-type normalization switches. The defaults transcribe the KAF
/// annotation rules: uppercase bare letters, exact candidate strings,
/// comma-free and currency-free math labels with LaTeX kept verbatim.
struct NormalizationProfile {
  bool letter_uppercase = true;
  bool strip_brackets_and_period = true;
  bool collapse_whitespace = true;
  bool math_strip_commas = true;
  bool math_strip_currency_outside_latex = true;
  bool categorical_case_sensitive = true;

  static NormalizationProfile defaults() { return {}; }

  /// Reads a JSON object with any subset of the switch names.
  static NormalizationProfile load(const std::string& path);
  static NormalizationProfile from_json_text(std::string_view text);
};

/// Normalizes a raw answer surface form for comparison. Idempotent.
std::string normalize(std::string_view raw, TaskType type,
                      const NormalizationProfile& profile = {});

/// Letter/content agreement rule for alphabet option items: true when no
/// content is mentioned or the mentioned content is the chosen letter's
/// paired content. A letter outside the range is never consistent.
bool check_letter_content_consistency(const EvalItem& item, std::string_view letter,
                                      std::optional<std::string_view> content_mention,
                                      const NormalizationProfile& profile = {});

/// Correct iff the serialized extraction equals the normalized gold answer,
/// including the NoValidAnswer == NoValidAnswer case. The extraction is
/// expected to be normalized already.
Judgment judge(const EvalItem& item, const ExtractedKey& extracted,
               const NormalizationProfile& profile = {});

/// Exact agreement between an extraction and the human gold extraction.
bool score_extraction(const ExtractedKey& extracted, const ExtractedKey& gold_extraction);

}  // namespace keyfind
