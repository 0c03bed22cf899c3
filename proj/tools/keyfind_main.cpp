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

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "keyfind/kaf.hpp"
#include "keyfind/matcher.hpp"
#include "keyfind/metrics.hpp"
#include "keyfind/prompts.hpp"
#include "keyfind/regex_suite.hpp"
#include "keyfind/remote.hpp"
#include "keyfind/runner.hpp"
#include "keyfind/util.hpp"
#include "keyfind/version.hpp"

#include "CLI11.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitDomain = 1;
constexpr int kExitEnvironment = 2;

struct CommonArgs {
  std::vector<std::string> datasets;
  std::vector<std::string> extractors;
  std::vector<std::string> suite_configs;
  std::string endpoint_config;
  std::string profile_path;
  std::string rules_path;
  std::string templates_dir;
  std::optional<uint64_t> seed;
  std::optional<size_t> limit;
  std::string out_dir = ".";
  std::string format;  // "", "csv" or "records"
  size_t workers = 0;
};

void add_common_flags(CLI::App* cmd, CommonArgs& args, bool with_extractors) {
  cmd->add_option("--dataset", args.datasets, "KAF dataset file (repeatable)");
  if (with_extractors) {
    cmd->add_option("--extractor", args.extractors,
                    "Extractor id: reference-rules, regex:opencompass-style, "
                    "regex:lmeval-style, regex:ultraeval-style, regex:<suite name>, "
                    "remote:<endpoint name> (repeatable)");
    cmd->add_option("--suite-config", args.suite_configs, "Regex suite JSON file (repeatable)");
    cmd->add_option("--endpoint-config", args.endpoint_config, "Remote endpoint JSON file");
  }
  cmd->add_option("--profile", args.profile_path, "Normalization profile JSON file");
  cmd->add_option("--rules", args.rules_path, "Sentence rules JSON file");
  cmd->add_option("--templates", args.templates_dir, "Prompt template directory");
  cmd->add_option("--seed", args.seed, "Seed for any sampled operation");
  cmd->add_option("--limit", args.limit, "Keep the first N items after a stable sort by id");
  cmd->add_option("--out", args.out_dir, "Output directory");
  cmd->add_option("--format", args.format, "Report format")
      ->check(CLI::IsMember({"csv", "records"}));
  cmd->add_option("--workers", args.workers, "Worker threads for local extraction");
}

void write_file(const fs::path& path, const std::string& content) {
  if (!path.parent_path().empty()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
}

std::string sanitize(const std::string& id) {
  std::string out;
  for (char c : id) {
    out.push_back(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' ? c : '-');
  }
  return out;
}

struct Corpus {
  std::vector<keyfind::LoadedItem> items;
  std::vector<std::pair<std::string, keyfind::ParseFailure>> failures;  // (source, failure)
  ordered_json input_digests = ordered_json::object();
};

Corpus load_corpus(const CommonArgs& args) {
  if (args.datasets.empty()) throw std::runtime_error("--dataset is required");
  Corpus corpus;
  for (const auto& path : args.datasets) {
    corpus.input_digests[path] = keyfind::file_digest(path);
    keyfind::LoadResult result = keyfind::load_kaf(path);
    for (auto& item : result.items) corpus.items.push_back(std::move(item));
    for (auto& failure : result.failures) corpus.failures.emplace_back(path, failure);
  }
  std::stable_sort(corpus.items.begin(), corpus.items.end(),
                   [](const keyfind::LoadedItem& a, const keyfind::LoadedItem& b) {
                     return a.item.id < b.item.id;
                   });
  if (args.limit && corpus.items.size() > *args.limit) corpus.items.resize(*args.limit);
  return corpus;
}

keyfind::NormalizationProfile load_profile(const CommonArgs& args) {
  if (args.profile_path.empty()) return {};
  return keyfind::NormalizationProfile::load(args.profile_path);
}

keyfind::SentenceRules load_rules(const CommonArgs& args) {
  if (args.rules_path.empty()) return keyfind::SentenceRules::defaults();
  return keyfind::SentenceRules::load(args.rules_path);
}

const keyfind::PromptLibrary& prompt_library(const CommonArgs& args) {
  static std::unique_ptr<keyfind::PromptLibrary> library;
  if (!library) {
    fs::path dir = args.templates_dir.empty() ? keyfind::PromptLibrary::default_dir()
                                              : fs::path(args.templates_dir);
    library = std::make_unique<keyfind::PromptLibrary>(keyfind::PromptLibrary::load(dir));
  }
  return *library;
}

struct ExtractorSet {
  std::vector<std::unique_ptr<keyfind::Extractor>> extractors;
  ordered_json suite_hashes = ordered_json::object();
  std::map<std::string, std::string> skipped;  // id -> reason
};

ExtractorSet build_extractors(const CommonArgs& args,
                              const keyfind::NormalizationProfile& profile) {
  ExtractorSet set;
  std::map<std::string, keyfind::RegexSuite> file_suites;
  for (const auto& path : args.suite_configs) {
    keyfind::RegexSuite suite = keyfind::RegexSuite::load(path);
    file_suites[suite.name] = suite;
  }

  std::vector<std::string> names = args.extractors;
  if (names.empty()) names.push_back("reference-rules");

  for (const auto& name : names) {
    if (name == "reference-rules") {
      set.extractors.push_back(
          std::make_unique<keyfind::RuleExtractor>(load_rules(args), profile));
    } else if (name == "regex:opencompass-style") {
      set.extractors.push_back(std::make_unique<keyfind::RegexSuiteExtractor>(
          keyfind::RegexSuite::opencompass_style(), profile));
    } else if (name == "regex:lmeval-style") {
      set.extractors.push_back(std::make_unique<keyfind::RegexSuiteExtractor>(
          keyfind::RegexSuite::lmeval_style(), profile));
    } else if (name == "regex:ultraeval-style") {
      set.extractors.push_back(std::make_unique<keyfind::RegexSuiteExtractor>(
          keyfind::RegexSuite::ultraeval_style(), profile));
    } else if (file_suites.count(name)) {
      set.extractors.push_back(
          std::make_unique<keyfind::RegexSuiteExtractor>(file_suites.at(name), profile));
    } else if (name.rfind("remote:", 0) == 0) {
      if (args.endpoint_config.empty())
        throw std::runtime_error("extractor '" + name + "' needs --endpoint-config");
      keyfind::RemoteEndpoint endpoint = keyfind::RemoteEndpoint::load(args.endpoint_config);
      auto remote = std::make_unique<keyfind::RemoteExtractor>(endpoint, prompt_library(args),
                                                               profile);
      if (remote->id() != name)
        throw std::runtime_error("endpoint config names '" + remote->id() + "', not '" + name +
                                 "'");
      set.extractors.push_back(std::move(remote));
    } else {
      throw std::runtime_error("unknown extractor '" + name + "'");
    }
  }

  std::set<std::string> ids;
  for (const auto& e : set.extractors) {
    if (!ids.insert(e->id()).second)
      throw std::runtime_error("duplicate extractor id '" + e->id() + "'");
    if (auto* rx = dynamic_cast<keyfind::RegexSuiteExtractor*>(e.get())) {
      set.suite_hashes[rx->id()] = rx->suite().content_hash();
    }
  }
  return set;
}

ordered_json run_metadata(const CommonArgs& args, const Corpus& corpus,
                          const ExtractorSet& extractors) {
  ordered_json config;
  config["datasets"] = args.datasets;
  config["extractors"] = args.extractors;
  config["suite_configs"] = args.suite_configs;
  config["endpoint_config"] = args.endpoint_config;
  config["profile"] = args.profile_path;
  config["rules"] = args.rules_path;
  if (args.seed) config["seed"] = *args.seed;
  if (args.limit) config["limit"] = *args.limit;
  config["format"] = args.format;

  ordered_json meta;
  meta["tool_version"] = keyfind::kVersion;
  meta["config_hash"] = keyfind::util::sha256_hex(config.dump());
  meta["config"] = config;
  meta["inputs"] = corpus.input_digests;
  meta["suite_hashes"] = extractors.suite_hashes;
  return meta;
}

std::string jsonl(const std::vector<ordered_json>& rows) {
  std::string out;
  for (const auto& row : rows) {
    out += row.dump();
    out += "\n";
  }
  return out;
}

bool want_csv(const CommonArgs& args) { return args.format.empty() || args.format == "csv"; }
bool want_records(const CommonArgs& args) {
  return args.format.empty() || args.format == "records";
}

// ---------------------------------------------------------------------------

int cmd_validate(const CommonArgs& args) {
  Corpus corpus = load_corpus(args);
  std::vector<ordered_json> violations;
  for (const auto& [source, failure] : corpus.failures) {
    ordered_json row;
    row["source"] = source;
    row["line"] = failure.line_number;
    row["violation"] = "parse failure: " + failure.message;
    violations.push_back(row);
  }
  for (const auto& loaded : corpus.items) {
    for (const auto& violation : keyfind::validate_item(loaded.item)) {
      ordered_json row;
      row["item_id"] = loaded.item.id;
      row["violation"] = violation;
      violations.push_back(row);
    }
    // Gold extractions must stay inside the answer range for alphabet
    // items; surfaced here rather than failing the load.
    if (loaded.item.task_type == keyfind::TaskType::kAlphabetOption &&
        loaded.gold_extraction.has_value() &&
        loaded.item.answer_range.find_letter(loaded.gold_extraction.value()) == nullptr) {
      ordered_json row;
      row["item_id"] = loaded.item.id;
      row["violation"] = "gold_label '" + loaded.gold_extraction.value() +
                         "' is not an option letter of the answer range";
      violations.push_back(row);
    }
  }
  std::string report = jsonl(violations);
  if (args.out_dir != "." && !args.out_dir.empty()) {
    write_file(fs::path(args.out_dir) / "violations.jsonl", report);
  }
  std::cout << report;
  std::cerr << "validate: " << corpus.items.size() << " items, " << violations.size()
            << " violations\n";
  return violations.empty() ? kExitOk : kExitDomain;
}

int cmd_extract(const CommonArgs& args) {
  Corpus corpus = load_corpus(args);
  keyfind::NormalizationProfile profile = load_profile(args);
  ExtractorSet set = build_extractors(args, profile);
  keyfind::RunnerOptions options{profile, args.workers};

  fs::create_directories(args.out_dir);
  for (auto& extractor : set.extractors) {
    std::vector<keyfind::Verdict> verdicts =
        keyfind::run_extractor(*extractor, corpus.items, options);
    std::vector<ordered_json> rows;
    rows.reserve(verdicts.size());
    for (const auto& verdict : verdicts) {
      ordered_json row;
      row["item_id"] = verdict.item_id;
      row["extractor_id"] = verdict.extractor_id;
      if (verdict.unavailable) {
        row["status"] = "unavailable";
      } else {
        row["status"] = "ok";
        row["extracted"] = verdict.extracted.serialize();
      }
      rows.push_back(row);
    }
    write_file(fs::path(args.out_dir) / ("extractions_" + sanitize(extractor->id()) + ".jsonl"),
               jsonl(rows));
  }
  return kExitOk;
}

int cmd_judge(const CommonArgs& args) {
  Corpus corpus = load_corpus(args);
  keyfind::NormalizationProfile profile = load_profile(args);
  ExtractorSet set = build_extractors(args, profile);
  keyfind::RunnerOptions options{profile, args.workers};

  fs::create_directories(args.out_dir);
  for (auto& extractor : set.extractors) {
    std::vector<keyfind::Verdict> verdicts =
        keyfind::run_extractor(*extractor, corpus.items, options);
    std::vector<ordered_json> rows;
    rows.reserve(verdicts.size());
    for (const auto& verdict : verdicts) rows.push_back(keyfind::verdict_to_json(verdict));
    write_file(fs::path(args.out_dir) / ("verdicts_" + sanitize(extractor->id()) + ".jsonl"),
               jsonl(rows));
  }
  return kExitOk;
}

int cmd_evaluate(const CommonArgs& args) {
  Corpus corpus = load_corpus(args);
  keyfind::NormalizationProfile profile = load_profile(args);
  ExtractorSet set = build_extractors(args, profile);
  keyfind::RunnerOptions options{profile, args.workers};
  ordered_json meta = run_metadata(args, corpus, set);

  fs::create_directories(args.out_dir);
  std::vector<keyfind::MetricReport> reports;
  for (auto& extractor : set.extractors) {
    if (auto* remote = dynamic_cast<keyfind::RemoteExtractor*>(extractor.get())) {
      if (!remote->reachable()) {
        set.skipped[remote->id()] = "endpoint unreachable at start";
        std::cerr << "evaluate: skipping " << remote->id() << " (unreachable)\n";
        continue;
      }
    }
    std::vector<keyfind::Verdict> verdicts =
        keyfind::run_extractor(*extractor, corpus.items, options);
    std::sort(verdicts.begin(), verdicts.end(),
              [](const keyfind::Verdict& a, const keyfind::Verdict& b) {
                if (a.item_id != b.item_id) return a.item_id < b.item_id;
                return a.extractor_id < b.extractor_id;
              });
    keyfind::MetricReport report = keyfind::compute_report(verdicts);
    reports.push_back(report);

    std::string stem = sanitize(extractor->id());
    if (want_records(args)) {
      ordered_json doc = meta;
      doc["report"] = keyfind::report_to_json(report);
      write_file(fs::path(args.out_dir) / ("report_" + stem + ".json"), doc.dump(2) + "\n");
      std::vector<ordered_json> rows;
      rows.reserve(verdicts.size());
      for (const auto& verdict : verdicts) rows.push_back(keyfind::verdict_to_json(verdict));
      write_file(fs::path(args.out_dir) / ("verdicts_" + stem + ".jsonl"), jsonl(rows));
    }
    if (want_csv(args)) {
      write_file(fs::path(args.out_dir) / ("report_" + stem + ".csv"),
                 keyfind::reports_to_csv({report}));
    }
  }

  ordered_json comparison = meta;
  comparison["skipped"] = ordered_json::object();
  for (const auto& [id, reason] : set.skipped) comparison["skipped"][id] = reason;
  ordered_json report_list = ordered_json::array();
  for (const auto& report : reports) report_list.push_back(keyfind::report_to_json(report));
  comparison["reports"] = report_list;
  if (want_records(args)) {
    write_file(fs::path(args.out_dir) / "comparison.json", comparison.dump(2) + "\n");
  }
  if (want_csv(args)) {
    write_file(fs::path(args.out_dir) / "comparison.csv", keyfind::reports_to_csv(reports));
  }
  std::cerr << "evaluate: " << reports.size() << " report(s) on " << corpus.items.size()
            << " items -> " << args.out_dir << "\n";
  return kExitOk;
}

std::vector<keyfind::ScoreRow> read_score_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read score file: " + path);
  std::vector<keyfind::ScoreRow> rows;
  std::string line;
  bool first = true;
  bool csv = fs::path(path).extension() != ".jsonl";
  while (std::getline(in, line)) {
    if (keyfind::util::trim(line).empty()) continue;
    if (csv) {
      if (first) {
        first = false;
        if (line.rfind("extractor", 0) == 0) continue;  // header
      }
      auto fields = keyfind::util::split(line, ',');
      if (fields.size() < 4)
        throw std::runtime_error("score row needs extractor,model,task,score: " + line);
      rows.push_back({keyfind::util::trim(fields[0]), keyfind::util::trim(fields[1]),
                      keyfind::util::trim(fields[2]), std::stod(fields[3])});
    } else {
      ordered_json j = ordered_json::parse(line);
      rows.push_back({j.at("extractor").get<std::string>(), j.at("model").get<std::string>(),
                      j.at("task").get<std::string>(), j.at("score").get<double>()});
    }
  }
  return rows;
}

int cmd_rank(const CommonArgs& args, const std::vector<std::string>& score_files) {
  std::vector<keyfind::ScoreRow> rows;
  for (const auto& path : score_files) {
    auto part = read_score_file(path);
    rows.insert(rows.end(), part.begin(), part.end());
  }
  if (rows.empty()) throw std::runtime_error("no score rows given (use --scores)");

  auto gaps = keyfind::find_coverage_gaps(rows);
  if (!gaps.empty()) {
    std::cerr << "rank: inconsistent coverage; missing (extractor, model, task):\n";
    for (const auto& [extractor, model, task] : gaps) {
      std::cerr << "  " << extractor << ", " << model << ", " << task << "\n";
    }
    return kExitDomain;
  }

  std::vector<keyfind::RankTable> tables = keyfind::build_rank_tables(rows);
  fs::create_directories(args.out_dir);
  if (want_csv(args)) {
    write_file(fs::path(args.out_dir) / "bump.csv",
               keyfind::bump_rows_to_csv(keyfind::bump_rows(tables)));
  }

  // Pairwise stability over every extractor pair present in the tables.
  std::vector<std::string> extractors;
  if (!tables.empty()) extractors = tables.front().extractors;
  std::string stability_csv = "task,extractor_a,extractor_b,kendall_tau_b\n";
  ordered_json stability_json = ordered_json::array();
  for (size_t a = 0; a < extractors.size(); ++a) {
    for (size_t b = a + 1; b < extractors.size(); ++b) {
      keyfind::StabilityReport stability =
          keyfind::rank_stability(tables, extractors[a], extractors[b]);
      std::string block = keyfind::stability_to_csv(extractors[a], extractors[b], stability);
      stability_csv += block.substr(block.find('\n') + 1);  // drop the repeated header
      ordered_json entry;
      entry["extractor_a"] = extractors[a];
      entry["extractor_b"] = extractors[b];
      ordered_json per_task = ordered_json::array();
      for (const auto& [task, tau] : stability.per_task) {
        per_task.push_back({{"task", task}, {"kendall_tau_b", tau}});
      }
      entry["per_task"] = per_task;
      entry["skipped_tasks"] = stability.skipped_tasks;
      if (stability.mean) entry["mean"] = *stability.mean;
      stability_json.push_back(entry);
    }
  }
  if (want_csv(args)) {
    write_file(fs::path(args.out_dir) / "stability.csv", stability_csv);
  }
  if (want_records(args)) {
    ordered_json doc;
    doc["tool_version"] = keyfind::kVersion;
    ordered_json table_json = ordered_json::array();
    for (const auto& row : keyfind::bump_rows(tables)) {
      table_json.push_back({{"task", row.task},
                            {"model", row.model},
                            {"extractor", row.extractor},
                            {"score", row.score},
                            {"rank", row.rank}});
    }
    doc["rank_rows"] = table_json;
    doc["stability"] = stability_json;
    write_file(fs::path(args.out_dir) / "rank.json", doc.dump(2) + "\n");
  }
  std::cerr << "rank: " << tables.size() << " task table(s) -> " << args.out_dir << "\n";
  return kExitOk;
}

int cmd_augment(const CommonArgs& args, const std::string& mode, double fraction) {
  if (!args.seed) throw std::runtime_error("--seed is required for augmentation");
  Corpus corpus = load_corpus(args);
  fs::create_directories(args.out_dir);

  std::vector<ordered_json> manifest_rows;
  std::string augmented;

  if (mode == "options") {
    std::vector<keyfind::EvalItem> items;
    items.reserve(corpus.items.size());
    for (auto& loaded : corpus.items) {
      keyfind::EvalItem item = loaded.item;
      // The letter whose option must survive perturbation: the correct
      // answer when the record carries one, else a letter-valued gold label.
      if (!item.gold_answer && loaded.item.task_type == keyfind::TaskType::kAlphabetOption &&
          loaded.gold_extraction.has_value() && loaded.gold_extraction.value().size() == 1) {
        item.gold_answer = loaded.gold_extraction.value();
      }
      items.push_back(std::move(item));
    }
    keyfind::OptionAugmentResult result = keyfind::augment_options(items, fraction, *args.seed);

    std::map<std::string, const keyfind::AugmentAction*> by_id;
    for (const auto& action : result.manifest) by_id[action.item_id] = &action;

    for (size_t i = 0; i < corpus.items.size(); ++i) {
      const keyfind::LoadedItem& loaded = corpus.items[i];
      auto action = by_id.find(loaded.item.id);
      bool perturbed = action != by_id.end() && action->second->op != keyfind::AugmentOp::kSkip;
      if (!perturbed) {
        augmented += loaded.record.raw + "\n";
        continue;
      }
      ordered_json record = ordered_json::parse(loaded.record.raw);
      record["standard_answer_range"] = result.items[i].answer_range.serialize();
      if (action->second->op == keyfind::AugmentOp::kRemoveOption) {
        ordered_json detail = ordered_json::parse(action->second->detail);
        const ordered_json& letter_map = detail.at("letter_map");
        auto remap = [&](const std::string& value) -> std::string {
          if (letter_map.contains(value)) return letter_map.at(value).get<std::string>();
          return value;
        };
        if (record.contains("gold_label"))
          record["gold_label"] = remap(record["gold_label"].get<std::string>());
        if (record.contains("correct_answer"))
          record["correct_answer"] = remap(record["correct_answer"].get<std::string>());
      }
      augmented += record.dump() + "\n";
    }
    for (const auto& action : result.manifest) {
      ordered_json row;
      row["item_id"] = action.item_id;
      row["op"] = std::string(keyfind::to_string(action.op));
      row["detail"] = action.detail;
      manifest_rows.push_back(row);
    }
    std::cerr << "augment: " << result.perturbed << " perturbed, " << result.skipped
              << " skipped of " << result.selected << " selected\n";
  } else {
    keyfind::SentenceRules rules = load_rules(args);
    std::vector<keyfind::ModelResponse> responses;
    responses.reserve(corpus.items.size());
    for (const auto& loaded : corpus.items) responses.push_back(loaded.response);
    keyfind::WrapperAugmentResult result =
        keyfind::augment_wrappers(responses, fraction, rules.wrappers, *args.seed);
    std::set<std::string> rewritten;
    for (const auto& action : result.manifest) rewritten.insert(action.item_id);
    for (size_t i = 0; i < corpus.items.size(); ++i) {
      if (!rewritten.count(corpus.items[i].item.id)) {
        augmented += corpus.items[i].record.raw + "\n";
        continue;
      }
      ordered_json record = ordered_json::parse(corpus.items[i].record.raw);
      record["llm_output"] = result.responses[i].text;
      augmented += record.dump() + "\n";
    }
    for (const auto& action : result.manifest) {
      ordered_json row;
      row["item_id"] = action.item_id;
      row["op"] = std::string(keyfind::to_string(action.op));
      row["detail"] = action.detail;
      manifest_rows.push_back(row);
    }
    std::cerr << "augment: " << result.rewritten << " wrapper rewrites over " << result.eligible
              << " eligible responses\n";
  }

  write_file(fs::path(args.out_dir) / "augmented.jsonl", augmented);
  write_file(fs::path(args.out_dir) / "manifest.jsonl", jsonl(manifest_rows));
  return kExitOk;
}

// Reads one extraction run (the output of `extract`) keyed by item id.
std::map<std::string, keyfind::ExtractedKey> read_label_run(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read label file: " + path);
  std::map<std::string, keyfind::ExtractedKey> labels;
  std::string line;
  while (std::getline(in, line)) {
    if (keyfind::util::trim(line).empty()) continue;
    ordered_json j = ordered_json::parse(line);
    std::string id = j.contains("item_id") ? j.at("item_id").get<std::string>()
                                           : j.at("id").get<std::string>();
    std::string value = j.contains("extracted") ? j.at("extracted").get<std::string>()
                                                : j.at("label").get<std::string>();
    labels.emplace(id, keyfind::ExtractedKey::parse(value));
  }
  return labels;
}

int cmd_flag(const CommonArgs& args, const std::string& labels_a_path,
             const std::string& labels_b_path) {
  Corpus corpus = load_corpus(args);
  auto labels_a = read_label_run(labels_a_path);
  auto labels_b = read_label_run(labels_b_path);

  std::vector<keyfind::EvalItem> items;
  items.reserve(corpus.items.size());
  for (const auto& loaded : corpus.items) items.push_back(loaded.item);

  std::vector<keyfind::LabelPair> pairs;
  for (const auto& loaded : corpus.items) {
    auto a = labels_a.find(loaded.item.id);
    auto b = labels_b.find(loaded.item.id);
    if (a == labels_a.end() || b == labels_b.end()) continue;
    pairs.push_back({loaded.item.id, a->second, b->second});
  }

  auto flags = keyfind::flag_discrepancies(pairs, items);
  std::vector<ordered_json> rows;
  rows.reserve(flags.size());
  for (const auto& flag : flags) {
    ordered_json row;
    row["item_id"] = flag.item_id;
    row["reason"] =
        flag.reason == keyfind::FlagReason::kDisagreement ? "disagreement" : "math";
    rows.push_back(row);
  }
  fs::create_directories(args.out_dir);
  write_file(fs::path(args.out_dir) / "flags.jsonl", jsonl(rows));
  std::cerr << "flag: " << flags.size() << " item(s) need re-annotation\n";
  return kExitOk;
}

int cmd_gen_prompts(const CommonArgs& args, const std::string& config_name,
                    const std::string& demo_file, const std::string& expertise) {
  auto config = keyfind::PromptConfig::from_name(config_name);
  if (!config) throw std::runtime_error("unknown prompt configuration '" + config_name + "'");

  Corpus corpus = load_corpus(args);
  const keyfind::PromptLibrary& library = prompt_library(args);

  std::vector<keyfind::QaPair> demos;
  if (config->shots > 0) {
    if (demo_file.empty())
      throw std::runtime_error("--demos is required for a 5-shot configuration");
    std::ifstream in(demo_file);
    if (!in) throw std::runtime_error("cannot read demo file: " + demo_file);
    std::vector<keyfind::QaPair> pool;
    std::string line;
    while (std::getline(in, line)) {
      if (keyfind::util::trim(line).empty()) continue;
      ordered_json j = ordered_json::parse(line);
      pool.push_back({j.at("question").get<std::string>(), j.at("answer").get<std::string>()});
    }
    if (pool.size() == 5) {
      demos = pool;
    } else {
      if (!args.seed)
        throw std::runtime_error("--seed is required to sample 5 demos from a larger pool");
      demos = keyfind::sample_demos(pool, 5, *args.seed);
    }
  }

  std::vector<ordered_json> rows;
  for (const auto& loaded : corpus.items) {
    ordered_json row;
    row["item_id"] = loaded.item.id;
    row["config"] = config->name();
    row["prompt"] = library.render_question_prompt(loaded.item, *config, demos, expertise);
    rows.push_back(row);
  }
  fs::create_directories(args.out_dir);
  write_file(fs::path(args.out_dir) / ("prompts_" + sanitize(config->name()) + ".jsonl"),
             jsonl(rows));
  return kExitOk;
}

int cmd_compare(const CommonArgs& args, const std::vector<std::string>& report_files,
                const std::string& params_file) {
  std::vector<keyfind::AccuracySummary> summaries;
  for (const auto& path : report_files) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read report file: " + path);
    ordered_json j = ordered_json::parse(in);
    ordered_json body = j.contains("report") ? j["report"] : j;
    keyfind::AccuracySummary summary;
    summary.extractor_id = body.at("extractor_id").get<std::string>();
    const ordered_json& overall = body.contains("overall") ? body["overall"] : body;
    if (overall.contains("extraction_accuracy") && !overall["extraction_accuracy"].is_null())
      summary.extraction_accuracy = overall["extraction_accuracy"].get<double>();
    if (overall.contains("judgment_accuracy") && !overall["judgment_accuracy"].is_null())
      summary.judgment_accuracy = overall["judgment_accuracy"].get<double>();
    summaries.push_back(std::move(summary));
  }

  std::map<std::string, double> params;
  if (!params_file.empty()) {
    std::ifstream in(params_file);
    if (!in) throw std::runtime_error("cannot read params file: " + params_file);
    ordered_json j = ordered_json::parse(in);
    for (auto it = j.begin(); it != j.end(); ++it) params[it.key()] = it.value().get<double>();
  }

  std::vector<keyfind::DeltaRow> rows = keyfind::compute_delta_acc(summaries, params);
  fs::create_directories(args.out_dir);
  if (want_csv(args)) {
    write_file(fs::path(args.out_dir) / "delta.csv", keyfind::delta_rows_to_csv(rows));
    std::string gaps = "extractor,extraction_accuracy,judgment_accuracy,accuracy_gap\n";
    for (const auto& summary : summaries) {
      gaps += keyfind::csv_escape(summary.extractor_id) + ",";
      if (summary.extraction_accuracy)
        gaps += keyfind::format_accuracy(*summary.extraction_accuracy);
      gaps += ",";
      if (summary.judgment_accuracy) gaps += keyfind::format_accuracy(*summary.judgment_accuracy);
      gaps += ",";
      if (auto g = summary.accuracy_gap()) gaps += keyfind::format_accuracy(*g);
      gaps += "\n";
    }
    write_file(fs::path(args.out_dir) / "gaps.csv", gaps);
  }
  if (want_records(args)) {
    ordered_json doc;
    doc["tool_version"] = keyfind::kVersion;
    ordered_json delta = ordered_json::array();
    for (const auto& row : rows) {
      ordered_json r;
      r["extractor_id"] = row.extractor_id;
      r["delta_acc"] = row.delta_acc;
      if (row.delta_acc_per_billion) r["delta_acc_per_billion"] = *row.delta_acc_per_billion;
      delta.push_back(r);
    }
    doc["delta"] = delta;
    write_file(fs::path(args.out_dir) / "delta.json", doc.dump(2) + "\n");
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Key answer extraction, matching, and evaluation metrics"};
  app.set_version_flag("--version", keyfind::kVersion);
  app.require_subcommand(1);

  CommonArgs args;

  CLI::App* validate = app.add_subcommand("validate", "Check a dataset for invariant violations");
  add_common_flags(validate, args, false);

  CLI::App* extract = app.add_subcommand("extract", "Extract key answers");
  add_common_flags(extract, args, true);

  CLI::App* judge_cmd = app.add_subcommand("judge", "Extract and judge responses");
  add_common_flags(judge_cmd, args, true);

  CLI::App* evaluate = app.add_subcommand("evaluate", "Full run: extract, judge, report");
  add_common_flags(evaluate, args, true);

  CLI::App* rank = app.add_subcommand("rank", "Rank tables and stability from score files");
  std::vector<std::string> score_files;
  rank->add_option("--scores", score_files, "Score file (csv or jsonl, repeatable)")->required();
  add_common_flags(rank, args, false);

  CLI::App* augment = app.add_subcommand("augment", "Augment a dataset");
  std::string mode = "options";
  double fraction = 0.5;
  augment->add_option("--mode", mode, "options or wrappers")
      ->check(CLI::IsMember({"options", "wrappers"}));
  augment->add_option("--fraction", fraction, "Fraction of eligible items to perturb");
  add_common_flags(augment, args, false);

  CLI::App* flag = app.add_subcommand("flag", "Flag items needing human re-annotation");
  std::string labels_a, labels_b;
  flag->add_option("--labels-a", labels_a, "First annotation run (extractions jsonl)")
      ->required();
  flag->add_option("--labels-b", labels_b, "Second annotation run (extractions jsonl)")
      ->required();
  add_common_flags(flag, args, false);

  CLI::App* gen = app.add_subcommand("gen-prompts", "Render question prompts");
  std::string config_name = "random-0-shot";
  std::string demo_file;
  std::string expertise = "commonsense reasoning";
  gen->add_option("--config", config_name, "Prompt configuration name");
  gen->add_option("--demos", demo_file, "Demo pool (jsonl with question/answer)");
  gen->add_option("--expertise", expertise, "System prompt expertise phrase");
  add_common_flags(gen, args, false);

  CLI::App* compare = app.add_subcommand("compare", "Gap and delta tables from reports");
  std::vector<std::string> report_files;
  std::string params_file;
  compare->add_option("--report", report_files, "Report JSON (repeatable)")->required();
  compare->add_option("--params", params_file, "Extractor parameter counts (billions), JSON");
  add_common_flags(compare, args, false);

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand(validate)) return cmd_validate(args);
    if (app.got_subcommand(extract)) return cmd_extract(args);
    if (app.got_subcommand(judge_cmd)) return cmd_judge(args);
    if (app.got_subcommand(evaluate)) return cmd_evaluate(args);
    if (app.got_subcommand(rank)) return cmd_rank(args, score_files);
    if (app.got_subcommand(augment)) return cmd_augment(args, mode, fraction);
    if (app.got_subcommand(flag)) return cmd_flag(args, labels_a, labels_b);
    if (app.got_subcommand(gen)) return cmd_gen_prompts(args, config_name, demo_file, expertise);
    if (app.got_subcommand(compare)) return cmd_compare(args, report_files, params_file);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDomain;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitEnvironment;
  }
  return kExitOk;
}
