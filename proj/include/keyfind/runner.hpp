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

#include <string>
#include <vector>

#include "keyfind/extractor.hpp"
#include "keyfind/kaf.hpp"
#include "keyfind/metrics.hpp"

#include "json.hpp"

namespace keyfind {

struct RunnerOptions {
  NormalizationProfile profile;
  size_t workers = 0;  // 0 = hardware concurrency
};

/// Combines one extraction with the item's gold data. The ground-truth
/// judgment comes from the record when present, otherwise it is derived by
/// judging the human gold extraction against the correct answer.
Verdict make_verdict(const LoadedItem& loaded, const std::string& extractor_id,
                     const std::optional<ExtractedKey>& extracted,
                     const NormalizationProfile& profile);

/// Extracts and judges the whole corpus with one extractor. Local extractors
/// run item-parallel with bounded workers; the remote extractor's own
/// in-flight bound applies instead. Output order equals input order.
std::vector<Verdict> run_extractor(Extractor& extractor,
                                   const std::vector<LoadedItem>& corpus,
                                   const RunnerOptions& options = {});

// --- report serialization (stable field and column order) -------------------

nlohmann::ordered_json slice_to_json(const SliceCounts& slice);
nlohmann::ordered_json report_to_json(const MetricReport& report);
nlohmann::ordered_json verdict_to_json(const Verdict& verdict);

/// Columns: extractor,task_type,n_items,n_unavailable,extraction_scored,
/// extraction_correct,extraction_accuracy,judgment_scored,judgment_correct,
/// judgment_accuracy,accuracy_gap
std::string reports_to_csv(const std::vector<MetricReport>& reports);

/// Columns: task,model,extractor,score,rank
std::string bump_rows_to_csv(const std::vector<BumpRow>& rows);

/// Columns: task,extractor_a,extractor_b,kendall_tau_b with a final (mean)
/// row.
std::string stability_to_csv(const std::string& extractor_a, const std::string& extractor_b,
                             const StabilityReport& report);

/// Columns: extractor,delta_acc,delta_acc_per_billion
std::string delta_rows_to_csv(const std::vector<DeltaRow>& rows);

std::string csv_escape(const std::string& field);
std::string format_accuracy(double value);

/// SHA-256 of a file's bytes; throws when unreadable.
std::string file_digest(const std::string& path);

}  // namespace keyfind
