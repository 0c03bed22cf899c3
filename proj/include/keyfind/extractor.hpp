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

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "keyfind/core.hpp"
#include "keyfind/matcher.hpp"
#include "keyfind/sentence.hpp"

namespace keyfind {

/// Result of one extraction attempt. `key` is empty (nullopt) only for the
/// remote extractor when transport fails after the retry budget; local
/// extractors are total.
struct Extraction {
  std::string item_id;
  std::optional<ExtractedKey> key;

  bool unavailable() const { return !key.has_value(); }
};

class Extractor {
 public:
  virtual ~Extractor() = default;

  virtual const std::string& id() const = 0;

  /// Total over messy text: every input yields Key or NoValidAnswer (or,
  /// remote only, nullopt for transport failure).
  virtual std::optional<ExtractedKey> extract(const EvalItem& item,
                                              const ModelResponse& response) = 0;

  /// Output order equals input order; one failure never aborts the batch.
  virtual std::vector<Extraction> extract_batch(
      const std::vector<std::pair<EvalItem, ModelResponse>>& pairs);
};

/// The rule-based reference extractor: synonym candidates, wrapper and
/// restatement matching, CoT-aware resolution, and the letter/content
/// agreement check before an alphabet key is emitted.
class RuleExtractor : public Extractor {
 public:
  explicit RuleExtractor(SentenceRules rules = SentenceRules::defaults(),
                         NormalizationProfile profile = {},
                         std::string id = "reference-rules");

  const std::string& id() const override { return id_; }
  std::optional<ExtractedKey> extract(const EvalItem& item,
                                      const ModelResponse& response) override;

  const SentenceRules& rules() const { return rules_; }

 private:
  std::string id_;
  SentenceRules rules_;
  NormalizationProfile profile_;
};

}  // namespace keyfind
