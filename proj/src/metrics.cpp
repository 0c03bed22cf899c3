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

#include "keyfind/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

namespace keyfind {

std::optional<double> SliceCounts::extraction_accuracy() const {
  if (extraction_scored == 0) return std::nullopt;
  return static_cast<double>(extraction_correct) / static_cast<double>(extraction_scored);
}

std::optional<double> SliceCounts::judgment_accuracy() const {
  if (judgment_scored == 0) return std::nullopt;
  return static_cast<double>(judgment_correct) / static_cast<double>(judgment_scored);
}

std::optional<double> SliceCounts::accuracy_gap() const {
  auto e = extraction_accuracy();
  auto j = judgment_accuracy();
  if (!e || !j) return std::nullopt;
  return *j - *e;
}

namespace {

void tally(SliceCounts& slice, const Verdict& verdict) {
  ++slice.n_items;
  if (verdict.unavailable) {
    ++slice.n_unavailable;
    return;
  }
  if (verdict.extraction_known) {
    ++slice.extraction_scored;
    if (verdict.extraction_correct) ++slice.extraction_correct;
  }
  if (verdict.judgment_known) {
    ++slice.judgment_scored;
    if (verdict.judgment_correct) ++slice.judgment_correct;
  }
}

}  // namespace

MetricReport compute_report(const std::vector<Verdict>& verdicts) {
  MetricReport report;
  for (const auto& verdict : verdicts) {
    if (report.extractor_id.empty()) {
      report.extractor_id = verdict.extractor_id;
    } else if (report.extractor_id != verdict.extractor_id) {
      throw std::invalid_argument("compute_report requires a single extractor id, got '" +
                                  report.extractor_id + "' and '" + verdict.extractor_id + "'");
    }
    tally(report.overall, verdict);
    tally(report.per_type[verdict.task_type], verdict);
  }
  return report;
}

std::optional<double> AccuracySummary::accuracy_gap() const {
  if (!extraction_accuracy || !judgment_accuracy) return std::nullopt;
  return *judgment_accuracy - *extraction_accuracy;
}

AccuracySummary summarize(const MetricReport& report) {
  return {report.extractor_id, report.overall.extraction_accuracy(),
          report.overall.judgment_accuracy()};
}

std::vector<DeltaRow> compute_delta_acc(const std::vector<AccuracySummary>& summaries,
                                        const std::map<std::string, double>& params_billion) {
  if (summaries.empty()) throw std::invalid_argument("compute_delta_acc needs at least one report");
  double minimum = std::numeric_limits<double>::infinity();
  for (const auto& s : summaries) {
    if (!s.extraction_accuracy)
      throw std::invalid_argument("report without extraction accuracy: " + s.extractor_id);
    minimum = std::min(minimum, *s.extraction_accuracy);
  }
  std::vector<DeltaRow> rows;
  rows.reserve(summaries.size());
  for (const auto& s : summaries) {
    DeltaRow row;
    row.extractor_id = s.extractor_id;
    row.delta_acc = *s.extraction_accuracy - minimum;
    auto it = params_billion.find(s.extractor_id);
    if (it != params_billion.end()) {
      if (it->second <= 0)
        throw std::invalid_argument("parameter count must be positive for " + s.extractor_id);
      row.delta_acc_per_billion = row.delta_acc / it->second;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<DeltaRow> compute_delta_acc(const std::vector<MetricReport>& reports,
                                        const std::map<std::string, double>& params_billion) {
  std::vector<AccuracySummary> summaries;
  summaries.reserve(reports.size());
  for (const auto& r : reports) summaries.push_back(summarize(r));
  return compute_delta_acc(summaries, params_billion);
}

// ---------------------------------------------------------------------------

std::vector<std::tuple<std::string, std::string, std::string>> find_coverage_gaps(
    const std::vector<ScoreRow>& rows) {
  std::map<std::string, std::set<std::string>> models_per_task;
  std::map<std::string, std::vector<std::string>> extractors_per_task;
  std::map<std::string, std::set<std::pair<std::string, std::string>>> present;
  for (const auto& row : rows) {
    models_per_task[row.task].insert(row.model);
    auto& ex = extractors_per_task[row.task];
    if (std::find(ex.begin(), ex.end(), row.extractor) == ex.end()) ex.push_back(row.extractor);
    present[row.task].insert({row.extractor, row.model});
  }
  std::vector<std::tuple<std::string, std::string, std::string>> gaps;
  for (const auto& [task, models] : models_per_task) {
    for (const auto& extractor : extractors_per_task[task]) {
      for (const auto& model : models) {
        if (!present[task].count({extractor, model})) gaps.emplace_back(extractor, model, task);
      }
    }
  }
  return gaps;
}

std::vector<RankTable> build_rank_tables(const std::vector<ScoreRow>& rows) {
  auto gaps = find_coverage_gaps(rows);
  if (!gaps.empty()) {
    std::string message = "inconsistent model coverage; missing:";
    for (const auto& [extractor, model, task] : gaps) {
      message += " (" + extractor + ", " + model + ", " + task + ")";
    }
    throw std::runtime_error(message);
  }

  std::vector<RankTable> tables;
  std::map<std::string, size_t> table_index;
  for (const auto& row : rows) {
    if (!table_index.count(row.task)) {
      table_index[row.task] = tables.size();
      tables.push_back({row.task, {}, {}});
    }
    RankTable& table = tables[table_index[row.task]];
    if (std::find(table.extractors.begin(), table.extractors.end(), row.extractor) ==
        table.extractors.end()) {
      table.extractors.push_back(row.extractor);
    }
    table.by_extractor[row.extractor].push_back({row.model, row.score, 0});
  }

  for (auto& table : tables) {
    for (auto& [extractor, entries] : table.by_extractor) {
      std::sort(entries.begin(), entries.end(), [](const RankEntry& a, const RankEntry& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.model < b.model;
      });
      for (size_t i = 0; i < entries.size(); ++i) {
        if (i > 0 && entries[i].score == entries[i - 1].score) {
          entries[i].rank = entries[i - 1].rank;
        } else {
          entries[i].rank = static_cast<int>(i) + 1;
        }
      }
    }
  }
  return tables;
}

std::vector<BumpRow> bump_rows(const std::vector<RankTable>& tables) {
  std::vector<BumpRow> rows;
  for (const auto& table : tables) {
    for (const auto& extractor : table.extractors) {
      for (const auto& entry : table.by_extractor.at(extractor)) {
        rows.push_back({table.task, entry.model, extractor, entry.score, entry.rank});
      }
    }
  }
  return rows;
}

namespace {

// Inversion count via merge sort: pairs i < j with values[i] > values[j].
uint64_t count_inversions(std::vector<double>& values, std::vector<double>& scratch,
                          size_t begin, size_t end) {
  if (end - begin < 2) return 0;
  size_t mid = begin + (end - begin) / 2;
  uint64_t count = count_inversions(values, scratch, begin, mid) +
                   count_inversions(values, scratch, mid, end);
  size_t left = begin;
  size_t right = mid;
  size_t out = begin;
  while (left < mid && right < end) {
    if (values[left] <= values[right]) {
      scratch[out++] = values[left++];
    } else {
      count += mid - left;
      scratch[out++] = values[right++];
    }
  }
  while (left < mid) scratch[out++] = values[left++];
  while (right < end) scratch[out++] = values[right++];
  std::copy(scratch.begin() + static_cast<long>(begin), scratch.begin() + static_cast<long>(end),
            values.begin() + static_cast<long>(begin));
  return count;
}

uint64_t tie_pairs(std::vector<double> sorted) {
  std::sort(sorted.begin(), sorted.end());
  uint64_t pairs = 0;
  size_t i = 0;
  while (i < sorted.size()) {
    size_t j = i;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    uint64_t t = j - i;
    pairs += t * (t - 1) / 2;
    i = j;
  }
  return pairs;
}

}  // namespace

double kendall_tau_b(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw std::invalid_argument("kendall_tau_b: length mismatch");
  size_t n = x.size();
  if (n < 2) return std::numeric_limits<double>::quiet_NaN();

  std::vector<size_t> order(n);
  for (size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    if (x[a] != x[b]) return x[a] < x[b];
    return y[a] < y[b];
  });

  uint64_t n0 = static_cast<uint64_t>(n) * (n - 1) / 2;
  uint64_t n1 = tie_pairs(x);
  uint64_t n2 = tie_pairs(y);

  // Joint ties t(t-1)/2 over (x, y) groups.
  uint64_t n3 = 0;
  {
    size_t i = 0;
    while (i < n) {
      size_t j = i;
      while (j < n && x[order[j]] == x[order[i]] && y[order[j]] == y[order[i]]) ++j;
      uint64_t t = j - i;
      n3 += t * (t - 1) / 2;
      i = j;
    }
  }

  std::vector<double> y_sorted(n);
  for (size_t i = 0; i < n; ++i) y_sorted[i] = y[order[i]];
  std::vector<double> scratch(n);
  uint64_t swaps = count_inversions(y_sorted, scratch, 0, n);

  double numerator = static_cast<double>(n0) - static_cast<double>(n1) -
                     static_cast<double>(n2) + static_cast<double>(n3) -
                     2.0 * static_cast<double>(swaps);
  double denominator = std::sqrt(static_cast<double>(n0 - n1)) *
                       std::sqrt(static_cast<double>(n0 - n2));
  if (denominator == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return numerator / denominator;
}

StabilityReport rank_stability(const std::vector<RankTable>& tables,
                               const std::string& extractor_a,
                               const std::string& extractor_b) {
  StabilityReport report;
  double sum = 0.0;
  size_t counted = 0;
  for (const auto& table : tables) {
    auto a = table.by_extractor.find(extractor_a);
    auto b = table.by_extractor.find(extractor_b);
    if (a == table.by_extractor.end() || b == table.by_extractor.end())
      throw std::invalid_argument("rank table '" + table.task + "' is missing extractor '" +
                                  (a == table.by_extractor.end() ? extractor_a : extractor_b) +
                                  "'");
    if (a->second.size() < 2) {
      report.skipped_tasks.push_back(table.task);
      continue;
    }
    std::map<std::string, double> rank_b;
    for (const auto& entry : b->second) rank_b[entry.model] = entry.rank;
    std::vector<double> ra, rb;
    ra.reserve(a->second.size());
    rb.reserve(a->second.size());
    for (const auto& entry : a->second) {
      ra.push_back(entry.rank);
      rb.push_back(rank_b.at(entry.model));
    }
    double tau = kendall_tau_b(ra, rb);
    if (std::isnan(tau)) {
      report.skipped_tasks.push_back(table.task);
      continue;
    }
    report.per_task.emplace_back(table.task, tau);
    sum += tau;
    ++counted;
  }
  if (counted > 0) report.mean = sum / static_cast<double>(counted);
  return report;
}

}  // namespace keyfind
