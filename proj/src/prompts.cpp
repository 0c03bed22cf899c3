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

#include "keyfind/prompts.hpp"

#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "keyfind/util.hpp"
#include "json.hpp"

#ifndef KEYFIND_DEFAULT_DATA_DIR
#define KEYFIND_DEFAULT_DATA_DIR ""
#endif

namespace keyfind {

namespace {

bool slot_name_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == ' ' || c == '_';
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read template file: " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  std::string body = buf.str();
  if (!body.empty() && body.back() == '\n') body.pop_back();
  return body;
}

}  // namespace

std::string fill_slots(std::string_view tmpl,
                       const std::map<std::string, std::string>& slots) {
  std::string out;
  out.reserve(tmpl.size());
  size_t i = 0;
  while (i < tmpl.size()) {
    char c = tmpl[i];
    if (c == '{' && i + 1 < tmpl.size() && tmpl[i + 1] == '{') {
      out.push_back('{');
      i += 2;
      continue;
    }
    if (c == '}' && i + 1 < tmpl.size() && tmpl[i + 1] == '}') {
      out.push_back('}');
      i += 2;
      continue;
    }
    if (c == '{') {
      size_t close = i + 1;
      while (close < tmpl.size() && slot_name_char(tmpl[close])) ++close;
      if (close < tmpl.size() && tmpl[close] == '}' && close > i + 1) {
        std::string name(tmpl.substr(i + 1, close - i - 1));
        auto it = slots.find(name);
        if (it == slots.end())
          throw std::runtime_error("template references unknown slot {" + name + "}");
        out += it->second;
        i = close + 1;
        continue;
      }
    }
    out.push_back(c);
    ++i;
  }
  return out;
}

std::filesystem::path PromptLibrary::default_dir() {
  if (const char* env = std::getenv("KEYFIND_DATA_DIR")) {
    return std::filesystem::path(env) / "templates";
  }
  return std::filesystem::path(KEYFIND_DEFAULT_DATA_DIR) / "templates";
}

PromptLibrary PromptLibrary::load(const std::filesystem::path& dir) {
  PromptLibrary lib;
  if (!std::filesystem::is_directory(dir))
    throw std::runtime_error("template directory not found: " + dir.string());
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".txt") continue;
    lib.templates_[entry.path().stem().string()] = read_file(entry.path());
  }
  std::filesystem::path scaffold = dir / "question_prompt.json";
  nlohmann::json j = nlohmann::json::parse(read_file(scaffold));
  lib.system_alphabet_ = j.at("system_alphabet").get<std::string>();
  lib.system_default_ = j.at("system_default").get<std::string>();
  lib.separator_ = j.at("separator").get<std::string>();
  lib.demo_start_ = j.at("demo_start").get<std::string>();
  lib.demo_end_ = j.at("demo_end").get<std::string>();
  lib.question_prefix_ = j.at("question_prefix").get<std::string>();
  lib.answer_prefix_ = j.at("answer_prefix").get<std::string>();
  lib.restrict_sentence_ = j.at("restrict_sentence").get<std::string>();
  lib.cot_sentence_ = j.at("cot_sentence").get<std::string>();
  return lib;
}

std::string PromptLibrary::render(const std::string& template_id,
                                  const std::map<std::string, std::string>& slots) const {
  auto it = templates_.find(template_id);
  if (it == templates_.end())
    throw std::runtime_error("unknown prompt template: " + template_id);
  return fill_slots(it->second, slots);
}

std::string PromptLibrary::render_question_prompt(const EvalItem& item,
                                                  const PromptConfig& config,
                                                  const std::vector<QaPair>& demos,
                                                  const std::string& expertise) const {
  if (config.shots == 0 && !demos.empty())
    throw std::invalid_argument("0-shot prompt rendered with demonstrations");
  if (config.shots == 5 && demos.size() != 5)
    throw std::invalid_argument("5-shot prompt requires exactly 5 demonstrations, got " +
                                std::to_string(demos.size()));

  std::string system;
  if (item.task_type == TaskType::kAlphabetOption && !item.answer_range.pair_list().empty()) {
    const auto& pairs = item.answer_range.pair_list();
    system = fill_slots(system_alphabet_, {{"expertise", expertise},
                                           {"first letter", pairs.front().letter},
                                           {"last letter", pairs.back().letter}});
  } else {
    system = fill_slots(system_default_, {{"expertise", expertise}});
  }

  std::string out = system + "\n\n" + separator_ + "\n";
  if (!demos.empty()) {
    out += demo_start_ + "\n";
    for (const auto& demo : demos) {
      out += question_prefix_ + demo.question + "\n";
      out += answer_prefix_ + demo.answer + "\n";
    }
    out += demo_end_ + "\n\n" + separator_ + "\n";
  }
  out += question_prefix_ + item.question + "\n";
  out += answer_prefix_;
  if (config.restrict_format) out += "\n\n" + restrict_sentence_;
  if (config.cot) out += "\n\n" + cot_sentence_;
  return out;
}

namespace {

std::map<std::string, std::string> extraction_slots(const EvalItem& item,
                                                    const ModelResponse& response) {
  return {{"question", item.question},
          {"LLM response", response.text},
          {"key answer type", std::string(to_string(item.task_type))},
          {"answer range", item.answer_range.serialize()}};
}

}  // namespace

PromptLibrary::AutolabelForms PromptLibrary::render_autolabel_prompts(
    const EvalItem& item, const ModelResponse& response) const {
  auto slots = extraction_slots(item, response);
  return {render("autolabel_normal", slots), render("autolabel_xml", slots)};
}

std::string PromptLibrary::render_judge_prompt(const std::string& question,
                                               const std::string& reference,
                                               const std::string& answer, bool cot) const {
  return render(cot ? "judge_cot" : "judge",
                {{"question", question}, {"reference", reference}, {"answer", answer}});
}

std::string PromptLibrary::render_extraction_prompt(const EvalItem& item,
                                                    const ModelResponse& response) const {
  auto it = templates_.find("xfinder_extraction");
  if (it == templates_.end())
    throw std::runtime_error("unknown prompt template: xfinder_extraction");
  for (const char* required : {"question", "LLM response", "key answer type", "answer range"}) {
    if (it->second.find("{" + std::string(required) + "}") == std::string::npos)
      throw std::runtime_error(std::string("extraction template is missing the {") + required +
                               "} slot");
  }
  return fill_slots(it->second, extraction_slots(item, response));
}

std::vector<QaPair> sample_demos(const std::vector<QaPair>& pool, size_t count,
                                 uint64_t seed) {
  if (pool.size() < count)
    throw std::invalid_argument("demonstration pool smaller than requested sample");
  std::vector<size_t> indices(pool.size());
  for (size_t i = 0; i < indices.size(); ++i) indices[i] = i;
  std::mt19937_64 rng(seed);
  for (size_t i = 0; i < count; ++i) {
    size_t j = i + util::pick_index(rng, indices.size() - i);
    std::swap(indices[i], indices[j]);
  }
  std::vector<QaPair> out;
  out.reserve(count);
  for (size_t i = 0; i < count; ++i) out.push_back(pool[indices[i]]);
  return out;
}

}  // namespace keyfind
