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

#include "keyfind/kaf.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <istream>
#include <random>
#include <set>
#include <stdexcept>

#include "keyfind/matcher.hpp"
#include "keyfind/util.hpp"
#include "json.hpp"

namespace keyfind {

namespace {

std::optional<std::string> opt_string(const nlohmann::json& j, const char* name) {
  auto it = j.find(name);
  if (it == j.end() || !it->is_string()) return std::nullopt;
  return it->get<std::string>();
}

std::string require_string(const nlohmann::json& j, std::initializer_list<const char*> names) {
  for (const char* name : names) {
    auto v = opt_string(j, name);
    if (v) return *v;
  }
  throw std::runtime_error(std::string("missing field '") + *names.begin() + "'");
}

AnswerRange build_range(const nlohmann::json& field, TaskType type, std::string* raw_text) {
  std::string text;
  if (field.is_string()) {
    text = field.get<std::string>();
  } else if (field.is_array()) {
    // Tolerate ranges stored as real JSON arrays; reserialize for the record.
    if (!field.empty() && field.front().is_array()) {
      std::vector<std::pair<std::string, std::string>> pairs;
      for (const auto& p : field) pairs.emplace_back(p.at(0).get<std::string>(), p.at(1).get<std::string>());
      text = util::render_pair_list(pairs);
    } else {
      std::vector<std::string> flat;
      for (const auto& c : field) flat.push_back(c.get<std::string>());
      text = util::render_flat_list(flat);
    }
  } else {
    throw std::runtime_error("standard_answer_range must be a string or list");
  }
  *raw_text = text;

  if (type == TaskType::kMath) return AnswerRange::math_domain(text);

  auto parsed = util::parse_list_literal(text);
  if (!parsed) throw std::runtime_error("standard_answer_range is not a list literal");
  if (type == TaskType::kAlphabetOption) {
    if (!parsed->nested)
      throw std::runtime_error("alphabet option range must use the [[letter, content], ...] form");
    std::vector<OptionPair> options;
    for (auto& [letter, content] : parsed->pairs) options.push_back({letter, content});
    return AnswerRange::pairs(std::move(options));
  }
  if (parsed->nested)
    throw std::runtime_error("flat answer range expected for this key answer type");
  return AnswerRange::flat(parsed->flat);
}

std::optional<Judgment> parse_judgment(const std::optional<std::string>& text) {
  if (!text) return std::nullopt;
  std::string t = util::to_lower(util::trim(*text));
  if (t == "correct" || t == "right" || t == "true") return Judgment::kCorrect;
  if (t == "wrong" || t == "incorrect" || t == "false") return Judgment::kWrong;
  return std::nullopt;
}

ExtractedKey parse_gold_extraction(const std::string& text, TaskType type) {
  if (text == kNoValidAnswerLiteral) return ExtractedKey::no_valid_answer();
  if (type == TaskType::kAlphabetOption)
    return ExtractedKey::key(normalize(text, TaskType::kAlphabetOption));
  return ExtractedKey::key(text);
}

}  // namespace

LoadResult load_kaf_stream(std::istream& in, const std::string& source_name) {
  LoadResult result;
  std::string line;
  size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (util::trim(line).empty()) continue;
    try {
      nlohmann::json j = nlohmann::json::parse(line);
      if (!j.is_object()) throw std::runtime_error("record is not an object");

      KafRecord record;
      record.key_answer_type = require_string(j, {"key_answer_type"});
      record.question = require_string(j, {"question"});
      record.llm_output = require_string(j, {"llm_output", "tested_llm_output"});
      record.gold_label = require_string(j, {"gold_label", "correct_key_answer"});
      record.xfinder_output = opt_string(j, "xFinder_output");
      record.producer_model = opt_string(j, "producer_model");
      record.prompt_config = opt_string(j, "prompt_config");
      record.correct_answer = opt_string(j, "correct_answer");
      record.ground_truth_judgment = opt_string(j, "is_tested_llm_output_right");
      record.raw = line;

      auto type = task_type_from_string(record.key_answer_type);
      if (!type)
        throw std::runtime_error("unknown key_answer_type '" + record.key_answer_type + "'");

      auto range_field = j.find("standard_answer_range");
      if (range_field == j.end()) throw std::runtime_error("missing field 'standard_answer_range'");

      LoadedItem loaded;
      loaded.item.task_type = *type;
      loaded.item.answer_range = build_range(*range_field, *type, &record.standard_answer_range);
      loaded.item.question = record.question;
      loaded.item.source_dataset = source_name;
      auto id = opt_string(j, "id");
      loaded.item.id = id ? *id : source_name + "#" + std::to_string(line_number);
      if (record.correct_answer) {
        loaded.item.gold_answer = *type == TaskType::kAlphabetOption &&
                                          *record.correct_answer != kNoValidAnswerLiteral
                                      ? normalize(*record.correct_answer, *type)
                                      : *record.correct_answer;
      }
      if (record.prompt_config) loaded.item.prompt_config = PromptConfig::from_name(*record.prompt_config);

      loaded.response.item_id = loaded.item.id;
      loaded.response.producer_model = record.producer_model.value_or("unknown");
      loaded.response.text = record.llm_output;

      loaded.gold_extraction = parse_gold_extraction(record.gold_label, *type);
      loaded.ground_truth_judgment = parse_judgment(record.ground_truth_judgment);
      loaded.record = std::move(record);
      result.items.push_back(std::move(loaded));
    } catch (const std::exception& e) {
      result.failures.push_back({line_number, e.what()});
    }
  }
  return result;
}

LoadResult load_kaf(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read dataset file: " + path);
  std::string stem = std::filesystem::path(path).stem().string();
  return load_kaf_stream(in, stem.empty() ? path : stem);
}

std::string to_kaf_line(const LoadedItem& loaded) { return loaded.record.raw; }

std::vector<DiscrepancyFlag> flag_discrepancies(const std::vector<LabelPair>& pairs,
                                                const std::vector<EvalItem>& items) {
  std::map<std::string, const EvalItem*> by_id;
  for (const auto& item : items) by_id.emplace(item.id, &item);

  std::vector<DiscrepancyFlag> flags;
  std::set<std::string> flagged;
  for (const auto& pair : pairs) {
    auto it = by_id.find(pair.item_id);
    if (it == by_id.end())
      throw std::runtime_error("label pair references unknown item id: " + pair.item_id);
    if (!(pair.label_run_a == pair.label_run_b) && flagged.insert(pair.item_id).second) {
      flags.push_back({pair.item_id, FlagReason::kDisagreement});
    }
  }
  for (const auto& item : items) {
    if (item.task_type == TaskType::kMath && flagged.insert(item.id).second) {
      flags.push_back({item.id, FlagReason::kMath});
    }
  }
  return flags;
}

std::string_view to_string(AugmentOp op) {
  switch (op) {
    case AugmentOp::kAddOptions: return "add_options";
    case AugmentOp::kRemoveOption: return "remove_option";
    case AugmentOp::kSkip: return "skip";
    case AugmentOp::kRewriteWrapper: return "rewrite_wrapper";
  }
  return "unknown";
}

namespace {

// Seeded selection of floor(fraction * n) indices, returned ascending. The
// draw happens before any per-item randomness so parallel callers see the
// same sample.
std::vector<size_t> select_sample(size_t n, double fraction, std::mt19937_64& rng) {
  size_t take = static_cast<size_t>(fraction * static_cast<double>(n));
  take = std::min(take, n);
  std::vector<size_t> indices(n);
  for (size_t i = 0; i < n; ++i) indices[i] = i;
  for (size_t i = 0; i < take; ++i) {
    size_t j = i + util::pick_index(rng, indices.size() - i);
    std::swap(indices[i], indices[j]);
  }
  indices.resize(take);
  std::sort(indices.begin(), indices.end());
  return indices;
}

nlohmann::ordered_json letter_map_json(const std::vector<std::pair<std::string, std::string>>& map) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& [from, to] : map) j[from] = to;
  return j;
}

}  // namespace

OptionAugmentResult augment_options(const std::vector<EvalItem>& items, double fraction,
                                    uint64_t seed) {
  if (fraction < 0.0 || fraction > 1.0)
    throw std::invalid_argument("augmentation fraction must lie in [0, 1]");

  OptionAugmentResult result;
  result.items = items;

  std::vector<size_t> eligible;
  for (size_t i = 0; i < items.size(); ++i) {
    if (items[i].task_type == TaskType::kAlphabetOption) eligible.push_back(i);
  }

  // Distractor pools: option contents of other items in the same source
  // dataset, first-seen order, deduplicated.
  std::map<std::string, std::vector<std::string>> pools;
  std::map<std::string, std::set<std::string>> pool_seen;
  for (size_t i : eligible) {
    for (const auto& option : items[i].answer_range.pair_list()) {
      if (pool_seen[items[i].source_dataset].insert(option.content).second) {
        pools[items[i].source_dataset].push_back(option.content);
      }
    }
  }

  std::mt19937_64 rng(seed);
  std::vector<size_t> selected = select_sample(eligible.size(), fraction, rng);
  result.selected = selected.size();

  for (size_t s : selected) {
    size_t index = eligible[s];
    EvalItem& item = result.items[index];
    const auto& options = item.answer_range.pair_list();
    bool add = util::pick_index(rng, 2) == 0;

    if (add) {
      size_t count = 1 + util::pick_index(rng, 2);
      std::set<std::string> own;
      for (const auto& o : options) own.insert(o.content);
      std::vector<std::string> available;
      for (const auto& content : pools[item.source_dataset]) {
        if (!own.count(content)) available.push_back(content);
      }
      if (available.empty()) {
        result.manifest.push_back({item.id, AugmentOp::kSkip, "empty distractor pool"});
        ++result.skipped;
        continue;
      }
      count = std::min(count, available.size());
      char last = options.empty() ? 'A' - 1 : options.back().letter[0];
      if (last + static_cast<int>(count) > 'Z') {
        result.manifest.push_back({item.id, AugmentOp::kSkip, "letter sequence exhausted"});
        ++result.skipped;
        continue;
      }
      std::vector<OptionPair> updated(options.begin(), options.end());
      nlohmann::ordered_json added = nlohmann::ordered_json::array();
      for (size_t k = 0; k < count; ++k) {
        size_t pick = util::pick_index(rng, available.size());
        std::string content = available[pick];
        available.erase(available.begin() + static_cast<long>(pick));
        std::string letter(1, static_cast<char>(last + 1 + static_cast<int>(k)));
        updated.push_back({letter, content});
        added.push_back({{"letter", letter}, {"content", content}});
      }
      item.answer_range = AnswerRange::pairs(std::move(updated));
      nlohmann::ordered_json detail;
      detail["added"] = added;
      result.manifest.push_back({item.id, AugmentOp::kAddOptions, detail.dump()});
      ++result.perturbed;
    } else {
      if (options.size() <= 2) {
        result.manifest.push_back(
            {item.id, AugmentOp::kSkip, "removal would leave a degenerate question"});
        ++result.skipped;
        continue;
      }
      std::string gold_letter;
      if (item.gold_answer && *item.gold_answer != kNoValidAnswerLiteral)
        gold_letter = *item.gold_answer;
      std::vector<size_t> removable;
      for (size_t k = 0; k < options.size(); ++k) {
        if (options[k].letter != gold_letter) removable.push_back(k);
      }
      if (removable.empty()) {
        result.manifest.push_back({item.id, AugmentOp::kSkip, "no non-gold option to remove"});
        ++result.skipped;
        continue;
      }
      size_t removed_index = removable[util::pick_index(rng, removable.size())];
      std::string removed_letter = options[removed_index].letter;

      std::vector<OptionPair> updated;
      std::vector<std::pair<std::string, std::string>> letter_map;
      char next = 'A';
      for (size_t k = 0; k < options.size(); ++k) {
        if (k == removed_index) continue;
        std::string new_letter(1, next++);
        letter_map.emplace_back(options[k].letter, new_letter);
        updated.push_back({new_letter, options[k].content});
      }
      item.answer_range = AnswerRange::pairs(std::move(updated));
      if (!gold_letter.empty()) {
        for (const auto& [from, to] : letter_map) {
          if (from == gold_letter) {
            item.gold_answer = to;
            break;
          }
        }
      }
      nlohmann::ordered_json detail;
      detail["removed"] = removed_letter;
      detail["letter_map"] = letter_map_json(letter_map);
      result.manifest.push_back({item.id, AugmentOp::kRemoveOption, detail.dump()});
      ++result.perturbed;
    }
  }
  return result;
}

WrapperAugmentResult augment_wrappers(const std::vector<ModelResponse>& responses,
                                      double fraction, const WrapperPatternSet& wrapper_set,
                                      uint64_t seed) {
  if (wrapper_set.templates.size() < 2)
    throw std::invalid_argument("wrapper substitution needs at least two wrapper templates");
  if (fraction < 0.0 || fraction > 1.0)
    throw std::invalid_argument("augmentation fraction must lie in [0, 1]");

  WrapperAugmentResult result;
  result.responses = responses;

  std::vector<std::pair<size_t, WrapperMatch>> eligible;
  for (size_t i = 0; i < responses.size(); ++i) {
    auto match = find_wrapper_match(responses[i].text, wrapper_set);
    if (match) eligible.emplace_back(i, *match);
  }
  result.eligible = eligible.size();

  std::mt19937_64 rng(seed);
  std::vector<size_t> selected = select_sample(eligible.size(), fraction, rng);

  for (size_t s : selected) {
    auto [index, match] = eligible[s];
    ModelResponse& response = result.responses[index];
    const std::string& text = response.text;

    size_t other = util::pick_index(rng, wrapper_set.templates.size() - 1);
    if (other >= match.template_index) ++other;

    std::string slot = text.substr(match.slot_begin, match.slot_end - match.slot_begin);
    std::string rendered = wrapper_set.templates[other];
    size_t slot_pos = rendered.find(kFinalAnswerSlot);
    rendered.replace(slot_pos, kFinalAnswerSlot.size(), slot);

    size_t cut_end = match.end;
    if (!rendered.empty() && rendered.back() == '.' && cut_end < text.size() &&
        text[cut_end] == '.') {
      ++cut_end;  // avoid a doubled period at the splice seam
    }
    response.text = text.substr(0, match.begin) + rendered + text.substr(cut_end);

    nlohmann::ordered_json detail;
    detail["from_template"] = wrapper_set.templates[match.template_index];
    detail["to_template"] = wrapper_set.templates[other];
    result.manifest.push_back(
        {response.item_id, AugmentOp::kRewriteWrapper, detail.dump()});
    ++result.rewritten;
  }
  return result;
}

SplitStats split_stats(const std::vector<KafRecord>& records) {
  SplitStats stats;
  for (const auto& record : records) {
    ++stats.by_type[record.key_answer_type];
    ++stats.by_producer[record.producer_model.value_or("unknown")];
    ++stats.by_prompt_config[record.prompt_config.value_or("unknown")];
    ++stats.total;
  }
  return stats;
}

}  // namespace keyfind
