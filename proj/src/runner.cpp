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

#include "keyfind/runner.hpp"

#include <atomic>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "keyfind/remote.hpp"
#include "keyfind/util.hpp"

namespace keyfind {

Verdict make_verdict(const LoadedItem& loaded, const std::string& extractor_id,
                     const std::optional<ExtractedKey>& extracted,
                     const NormalizationProfile& profile) {
  Verdict verdict;
  verdict.item_id = loaded.item.id;
  verdict.extractor_id = extractor_id;
  verdict.task_type = loaded.item.task_type;
  if (!extracted) {
    verdict.unavailable = true;
    return verdict;
  }
  verdict.extracted = *extracted;
  verdict.extraction_known = true;
  verdict.extraction_correct = score_extraction(*extracted, loaded.gold_extraction);

  if (loaded.item.gold_answer) {
    verdict.judgment = judge(loaded.item, *extracted, profile);
    std::optional<Judgment> truth = loaded.ground_truth_judgment;
    if (!truth) truth = judge(loaded.item, loaded.gold_extraction, profile);
    verdict.judgment_known = true;
    verdict.judgment_correct = verdict.judgment == *truth;
  } else if (loaded.ground_truth_judgment) {
    // No correct answer on file; the judgment itself cannot be computed.
    verdict.judgment_known = false;
  }
  return verdict;
}

std::vector<Verdict> run_extractor(Extractor& extractor,
                                   const std::vector<LoadedItem>& corpus,
                                   const RunnerOptions& options) {
  std::vector<Verdict> verdicts(corpus.size());

  if (auto* remote = dynamic_cast<RemoteExtractor*>(&extractor)) {
    std::vector<std::pair<EvalItem, ModelResponse>> pairs;
    pairs.reserve(corpus.size());
    for (const auto& loaded : corpus) pairs.emplace_back(loaded.item, loaded.response);
    std::vector<Extraction> extractions = remote->extract_batch(pairs);
    for (size_t i = 0; i < corpus.size(); ++i) {
      verdicts[i] = make_verdict(corpus[i], extractor.id(), extractions[i].key, options.profile);
    }
    return verdicts;
  }

  size_t workers = options.workers > 0 ? options.workers
                                       : std::max<size_t>(1, std::thread::hardware_concurrency());
  workers = std::min(workers, corpus.size());
  if (workers <= 1) {
    for (size_t i = 0; i < corpus.size(); ++i) {
      verdicts[i] = make_verdict(corpus[i], extractor.id(),
                                 extractor.extract(corpus[i].item, corpus[i].response),
                                 options.profile);
    }
    return verdicts;
  }

  std::atomic<size_t> next{0};
  std::vector<std::thread> threads;
  threads.reserve(workers);
  for (size_t w = 0; w < workers; ++w) {
    threads.emplace_back([&] {
      while (true) {
        size_t i = next.fetch_add(1);
        if (i >= corpus.size()) return;
        verdicts[i] = make_verdict(corpus[i], extractor.id(),
                                   extractor.extract(corpus[i].item, corpus[i].response),
                                   options.profile);
      }
    });
  }
  for (auto& t : threads) t.join();
  return verdicts;
}

// ---------------------------------------------------------------------------

std::string format_accuracy(double value) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.6f", value);
  return buffer;
}

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out += "\"";
  return out;
}

nlohmann::ordered_json slice_to_json(const SliceCounts& slice) {
  nlohmann::ordered_json j;
  j["n_items"] = slice.n_items;
  j["n_unavailable"] = slice.n_unavailable;
  j["extraction_scored"] = slice.extraction_scored;
  j["extraction_correct"] = slice.extraction_correct;
  if (auto a = slice.extraction_accuracy()) j["extraction_accuracy"] = *a;
  else j["extraction_accuracy"] = nullptr;
  j["judgment_scored"] = slice.judgment_scored;
  j["judgment_correct"] = slice.judgment_correct;
  if (auto a = slice.judgment_accuracy()) j["judgment_accuracy"] = *a;
  else j["judgment_accuracy"] = nullptr;
  if (auto g = slice.accuracy_gap()) j["accuracy_gap"] = *g;
  else j["accuracy_gap"] = nullptr;
  return j;
}

nlohmann::ordered_json report_to_json(const MetricReport& report) {
  nlohmann::ordered_json j;
  j["extractor_id"] = report.extractor_id;
  j["overall"] = slice_to_json(report.overall);
  nlohmann::ordered_json per_type = nlohmann::ordered_json::object();
  for (const auto& [type, slice] : report.per_type) {
    per_type[std::string(to_string(type))] = slice_to_json(slice);
  }
  j["per_type"] = per_type;
  return j;
}

nlohmann::ordered_json verdict_to_json(const Verdict& verdict) {
  nlohmann::ordered_json j;
  j["item_id"] = verdict.item_id;
  j["extractor_id"] = verdict.extractor_id;
  j["task_type"] = std::string(to_string(verdict.task_type));
  if (verdict.unavailable) {
    j["status"] = "unavailable";
    return j;
  }
  j["status"] = "ok";
  j["extracted"] = verdict.extracted.serialize();
  if (verdict.extraction_known) j["extraction_correct"] = verdict.extraction_correct;
  if (verdict.judgment_known) {
    j["judgment"] = std::string(to_string(verdict.judgment));
    j["judgment_correct"] = verdict.judgment_correct;
  }
  return j;
}

namespace {

void append_slice_row(std::string& csv, const std::string& extractor,
                      const std::string& task_type, const SliceCounts& slice) {
  csv += csv_escape(extractor) + "," + csv_escape(task_type) + ",";
  csv += std::to_string(slice.n_items) + "," + std::to_string(slice.n_unavailable) + ",";
  csv += std::to_string(slice.extraction_scored) + "," +
         std::to_string(slice.extraction_correct) + ",";
  if (auto a = slice.extraction_accuracy()) csv += format_accuracy(*a);
  csv += ",";
  csv += std::to_string(slice.judgment_scored) + "," + std::to_string(slice.judgment_correct) +
         ",";
  if (auto a = slice.judgment_accuracy()) csv += format_accuracy(*a);
  csv += ",";
  if (auto g = slice.accuracy_gap()) csv += format_accuracy(*g);
  csv += "\n";
}

}  // namespace

std::string reports_to_csv(const std::vector<MetricReport>& reports) {
  std::string csv =
      "extractor,task_type,n_items,n_unavailable,extraction_scored,extraction_correct,"
      "extraction_accuracy,judgment_scored,judgment_correct,judgment_accuracy,accuracy_gap\n";
  for (const auto& report : reports) {
    append_slice_row(csv, report.extractor_id, "overall", report.overall);
    for (const auto& [type, slice] : report.per_type) {
      append_slice_row(csv, report.extractor_id, std::string(to_string(type)), slice);
    }
  }
  return csv;
}

std::string bump_rows_to_csv(const std::vector<BumpRow>& rows) {
  std::string csv = "task,model,extractor,score,rank\n";
  for (const auto& row : rows) {
    csv += csv_escape(row.task) + "," + csv_escape(row.model) + "," +
           csv_escape(row.extractor) + "," + format_accuracy(row.score) + "," +
           std::to_string(row.rank) + "\n";
  }
  return csv;
}

std::string stability_to_csv(const std::string& extractor_a, const std::string& extractor_b,
                             const StabilityReport& report) {
  std::string csv = "task,extractor_a,extractor_b,kendall_tau_b\n";
  for (const auto& [task, tau] : report.per_task) {
    csv += csv_escape(task) + "," + csv_escape(extractor_a) + "," + csv_escape(extractor_b) +
           "," + format_accuracy(tau) + "\n";
  }
  if (report.mean) {
    csv += "(mean)," + csv_escape(extractor_a) + "," + csv_escape(extractor_b) + "," +
           format_accuracy(*report.mean) + "\n";
  }
  return csv;
}

std::string delta_rows_to_csv(const std::vector<DeltaRow>& rows) {
  std::string csv = "extractor,delta_acc,delta_acc_per_billion\n";
  for (const auto& row : rows) {
    csv += csv_escape(row.extractor_id) + "," + format_accuracy(row.delta_acc) + ",";
    if (row.delta_acc_per_billion) csv += format_accuracy(*row.delta_acc_per_billion);
    csv += "\n";
  }
  return csv;
}

std::string file_digest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read file for digest: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return util::sha256_hex(buf.str());
}

}  // namespace keyfind
