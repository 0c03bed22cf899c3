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

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "keyfind/core.hpp"

namespace keyfind {

struct QaPair {
  std::string question;
  std::string answer;
};

/// Renders the prompt families from data-file templates: the eight
/// response-generation configurations, the two auto-label forms, the two
/// judge prompts, and the key-answer extraction prompt.
///
/// Templates use {slot} markers (names may contain spaces); "{{" and "}}"
/// escape literal braces. Rendering is pure and byte-deterministic.
class PromptLibrary {
 public:
  /// Loads *.txt templates and question_prompt.json from a directory.
  /// One trailing newline per template file is stripped.
  static PromptLibrary load(const std::filesystem::path& dir);

  /// KEYFIND_DATA_DIR/templates when the variable is set, otherwise the
  /// compiled-in data directory.
  static std::filesystem::path default_dir();

  /// One of the 8 configurations. 5-shot requires exactly 5 demos, 0-shot
  /// none; a mismatch throws. The restrict sentence precedes the CoT
  /// sentence when both are requested.
  std::string render_question_prompt(const EvalItem& item, const PromptConfig& config,
                                     const std::vector<QaPair>& demos,
                                     const std::string& expertise) const;

  struct AutolabelForms {
    std::string normal;
    std::string xml;
  };
  AutolabelForms render_autolabel_prompts(const EvalItem& item,
                                          const ModelResponse& response) const;

  std::string render_judge_prompt(const std::string& question, const std::string& reference,
                                  const std::string& answer, bool cot) const;

  /// The extraction prompt sent to a remote key-answer extractor. The answer
  /// range is serialized in the standard_answer_range form for the item's
  /// type and the output ends with "Key extracted answer:".
  std::string render_extraction_prompt(const EvalItem& item,
                                       const ModelResponse& response) const;

  /// Generic slot filling against a loaded template. Throws when the
  /// template references a slot that is not provided.
  std::string render(const std::string& template_id,
                     const std::map<std::string, std::string>& slots) const;

  bool has_template(const std::string& template_id) const {
    return templates_.count(template_id) != 0;
  }

 private:
  std::map<std::string, std::string> templates_;  // id -> body
  // question-prompt scaffolding
  std::string system_alphabet_;
  std::string system_default_;
  std::string separator_;
  std::string demo_start_;
  std::string demo_end_;
  std::string question_prefix_;
  std::string answer_prefix_;
  std::string restrict_sentence_;
  std::string cot_sentence_;
};

/// Fills {slot} markers; returns the rendered text. Throws std::runtime_error
/// on a slot name missing from `slots`.
std::string fill_slots(std::string_view tmpl,
                       const std::map<std::string, std::string>& slots);

/// Deterministic seeded demonstration sampler over a training pool.
std::vector<QaPair> sample_demos(const std::vector<QaPair>& pool, size_t count,
                                 uint64_t seed);

}  // namespace keyfind
