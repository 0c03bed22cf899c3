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

#include <set>
#include <string>
#include <vector>

#include "keyfind/extractor.hpp"

namespace keyfind {

/// What the first capture group of a pattern means.
enum class CaptureRole {
  kOptionLetter,    // first in-range option letter
  kTrailingAnswer,  // tail after an answer phrase, checked against the range
  kLastNumber,      // last numeric match in the response
};

std::string_view to_string(CaptureRole role);

struct RegexRule {
  std::string pattern;  // ECMAScript source, compiled case-sensitively
  CaptureRole role = CaptureRole::kOptionLetter;
  std::set<TaskType> task_types;
};

/// An ordered pattern list emulating a RegEx-based harness extractor.
/// Rule order is semantic: the first rule that yields an in-range value
/// wins, so suites are versioned by content hash in reports.
struct RegexSuite {
  std::string name;
  std::vector<RegexRule> rules;

  std::string content_hash() const;

  static RegexSuite load(const std::string& path);
  static RegexSuite from_json_text(std::string_view text, std::string default_name);

  /// Built-in emulations of the compared extraction styles.
  static RegexSuite opencompass_style();
  static RegexSuite lmeval_style();
  static RegexSuite ultraeval_style();
};

class RegexSuiteExtractor : public Extractor {
 public:
  explicit RegexSuiteExtractor(RegexSuite suite, NormalizationProfile profile = {});

  const std::string& id() const override { return id_; }
  std::optional<ExtractedKey> extract(const EvalItem& item,
                                      const ModelResponse& response) override;

  const RegexSuite& suite() const { return suite_; }

 private:
  std::string id_;
  RegexSuite suite_;
  NormalizationProfile profile_;
};

}  // namespace keyfind
