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
#include <tuple>
#include <vector>

#include "keyfind/core.hpp"

namespace keyfind {

/// Counting slice for one task type (or overall). Unavailable extractions
/// are excluded from numerator and denominator alike; the counts stay
/// visible so the exclusion is auditable.
struct SliceCounts {
  size_t n_items = 0;
  size_t n_unavailable = 0;
  size_t extraction_scored = 0;
  size_t extraction_correct = 0;
  size_t judgment_scored = 0;
  size_t judgment_correct = 0;

  std::optional<double> extraction_accuracy() const;
  std::optional<double> judgment_accuracy() const;
  /// judgment accuracy minus extraction accuracy; absent when either is.
  std::optional<double> accuracy_gap() const;
};

struct MetricReport {
  std::string extractor_id;
  SliceCounts overall;
  std::map<TaskType, SliceCounts> per_type;
};

/// Aggregates verdicts for a single extractor; mixed extractor ids throw.
/// Zero scorable items leaves the accuracy accessors empty rather than
/// dividing by zero.
MetricReport compute_report(const std::vector<Verdict>& verdicts);

/// Accuracy pair used for gap and delta arithmetic. Obtainable from a
/// computed report or filled directly with published values.
struct AccuracySummary {
  std::string extractor_id;
  std::optional<double> extraction_accuracy;
  std::optional<double> judgment_accuracy;

  std::optional<double> accuracy_gap() const;
};

AccuracySummary summarize(const MetricReport& report);

struct DeltaRow {
  std::string extractor_id;
  double delta_acc = 0.0;
  std::optional<double> delta_acc_per_billion;
};

/// Delta of each extractor's extraction accuracy over the minimum across
/// the input, and that delta divided by the parameter count in billions
/// where one is provided. The minimizing row reports exactly zero.
std::vector<DeltaRow> compute_delta_acc(const std::vector<AccuracySummary>& summaries,
                                        const std::map<std::string, double>& params_billion);
std::vector<DeltaRow> compute_delta_acc(const std::vector<MetricReport>& reports,
                                        const std::map<std::string, double>& params_billion);

// ---------------------------------------------------------------------------
// Cross-extractor ranking.

struct ScoreRow {
  std::string extractor;
  std::string model;
  std::string task;
  double score = 0.0;
};

struct RankEntry {
  std::string model;
  double score = 0.0;
  int rank = 0;  // descending score; ties share the smaller rank (1, 1, 3)
};

struct RankTable {
  std::string task;
  std::vector<std::string> extractors;  // first-appearance order
  std::map<std::string, std::vector<RankEntry>> by_extractor;
};

/// (extractor, model, task) triples missing from a full cross product per
/// task; empty means every extractor covers the same model set.
std::vector<std::tuple<std::string, std::string, std::string>> find_coverage_gaps(
    const std::vector<ScoreRow>& rows);

/// One table per task. Throws when coverage gaps exist, listing them.
std::vector<RankTable> build_rank_tables(const std::vector<ScoreRow>& rows);

/// Flat bump-chart rows: (task, model, extractor, score, rank).
struct BumpRow {
  std::string task;
  std::string model;
  std::string extractor;
  double score = 0.0;
  int rank = 0;
};
std::vector<BumpRow> bump_rows(const std::vector<RankTable>& tables);

/// Kendall tau-b with tie adjustment; NaN when either vector is entirely
/// tied (the statistic is undefined there).
double kendall_tau_b(const std::vector<double>& x, const std::vector<double>& y);

struct StabilityReport {
  std::vector<std::pair<std::string, double>> per_task;
  std::vector<std::string> skipped_tasks;  // under 2 models or degenerate ties
  std::optional<double> mean;
};

/// Rank correlation between two extractors per task plus the mean. A table
/// missing either extractor throws.
StabilityReport rank_stability(const std::vector<RankTable>& tables,
                               const std::string& extractor_a,
                               const std::string& extractor_b);

}  // namespace keyfind
