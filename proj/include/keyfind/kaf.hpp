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

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "keyfind/core.hpp"
#include "keyfind/sentence.hpp"

namespace keyfind {

/// One line of a KAF file, field names as printed in the dataset. Optional
/// extended fields carry the correct answer and ground-truth judgment where
/// a source provides them. `raw` keeps the original JSON object so valid
/// records round-trip losslessly.
struct KafRecord {
  std::string key_answer_type;
  std::string question;
  std::string llm_output;
  std::string standard_answer_range;
  std::string gold_label;
  std::optional<std::string> xfinder_output;
  std::optional<std::string> producer_model;
  std::optional<std::string> prompt_config;
  std::optional<std::string> correct_answer;
  std::optional<std::string> ground_truth_judgment;  // "Correct" / "Wrong"
  std::string raw;
};

/// One loaded record: the (item, response, gold extraction) triple plus the
/// record it came from.
struct LoadedItem {
  EvalItem item;
  ModelResponse response;
  ExtractedKey gold_extraction;
  std::optional<Judgment> ground_truth_judgment;
  KafRecord record;
};

struct ParseFailure {
  size_t line_number = 0;  // 1-based
  std::string message;
};

struct LoadResult {
  std::vector<LoadedItem> items;
  std::vector<ParseFailure> failures;
};

/// Loads line-delimited KAF records. An unreadable file throws; a malformed
/// line is collected as a failure and loading continues. Item ids default to
/// "<source>#<index>" when records carry none.
LoadResult load_kaf(const std::string& path);
LoadResult load_kaf_stream(std::istream& in, const std::string& source_name);

/// Serializes a loaded item back to one KAF JSON line (the retained raw
/// object for unmodified records).
std::string to_kaf_line(const LoadedItem& loaded);

struct LabelPair {
  std::string item_id;
  ExtractedKey label_run_a;
  ExtractedKey label_run_b;
};

enum class FlagReason { kDisagreement, kMath };

struct DiscrepancyFlag {
  std::string item_id;
  FlagReason reason = FlagReason::kDisagreement;
};

/// Items needing human re-annotation: every id where the two label runs
/// disagree, plus every math item. Order follows the inputs; no duplicates.
/// A pair naming an unknown item id throws.
std::vector<DiscrepancyFlag> flag_discrepancies(const std::vector<LabelPair>& pairs,
                                                const std::vector<EvalItem>& items);

enum class AugmentOp { kAddOptions, kRemoveOption, kSkip, kRewriteWrapper };

std::string_view to_string(AugmentOp op);

struct AugmentAction {
  std::string item_id;
  AugmentOp op = AugmentOp::kSkip;
  std::string detail;
};

struct OptionAugmentResult {
  std::vector<EvalItem> items;   // input order, unperturbed items unchanged
  std::vector<AugmentAction> manifest;
  size_t selected = 0;           // floor(fraction * eligible)
  size_t perturbed = 0;
  size_t skipped = 0;
};

/// Perturbs a seeded sample of floor(fraction * eligible) alphabet option
/// items: with equal probability add one or two distractor options (drawn
/// from other items of the same source dataset) or remove one non-gold
/// option. Letters are reassigned in order after removal and the gold letter
/// is remapped; the gold option's content is never altered. Items whose
/// perturbation is impossible are skipped and counted.
OptionAugmentResult augment_options(const std::vector<EvalItem>& items, double fraction,
                                    uint64_t seed);

struct WrapperAugmentResult {
  std::vector<ModelResponse> responses;
  std::vector<AugmentAction> manifest;
  size_t eligible = 0;
  size_t rewritten = 0;
};

/// Substitutes the detected answer wrapper in a seeded sample of eligible
/// responses (those containing a prompt-wrapped key sentence) with a
/// different wrapper from the set, keeping the slot content. Throws when the
/// wrapper set has fewer than two templates.
WrapperAugmentResult augment_wrappers(const std::vector<ModelResponse>& responses,
                                      double fraction, const WrapperPatternSet& wrapper_set,
                                      uint64_t seed);

struct SplitStats {
  std::map<std::string, size_t> by_type;
  std::map<std::string, size_t> by_producer;
  std::map<std::string, size_t> by_prompt_config;
  size_t total = 0;
};

SplitStats split_stats(const std::vector<KafRecord>& records);

}  // namespace keyfind
