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

#include "keyfind/regex_suite.hpp"

#include <fstream>
#include <regex>
#include <sstream>
#include <stdexcept>

#include "keyfind/util.hpp"
#include "json.hpp"

namespace keyfind {

std::string_view to_string(CaptureRole role) {
  switch (role) {
    case CaptureRole::kOptionLetter: return "option letter";
    case CaptureRole::kTrailingAnswer: return "trailing answer";
    case CaptureRole::kLastNumber: return "last number";
  }
  return "unknown";
}

namespace {

CaptureRole role_from_string(const std::string& name) {
  if (name == "option letter") return CaptureRole::kOptionLetter;
  if (name == "trailing answer") return CaptureRole::kTrailingAnswer;
  if (name == "last number") return CaptureRole::kLastNumber;
  throw std::runtime_error("unknown capture role: " + name);
}

std::string first_group(const std::smatch& m) {
  for (size_t g = 1; g < m.size(); ++g) {
    if (m[g].matched) return m[g].str();
  }
  return m.str();
}

// Reduces an answer tail to an option letter; empty when none fits.
std::string tail_to_letter(const std::string& tail, const EvalItem& item,
                           const NormalizationProfile& profile) {
  std::string whole = normalize(tail, TaskType::kAlphabetOption, profile);
  if (whole.size() == 1 && item.answer_range.find_letter(whole) != nullptr) return whole;
  static const std::regex paren(R"(\(([A-Za-z])\))");
  std::smatch m;
  if (std::regex_search(tail, m, paren)) {
    std::string letter = normalize(m[1].str(), TaskType::kAlphabetOption, profile);
    if (item.answer_range.find_letter(letter) != nullptr) return letter;
  }
  std::string first_word;
  for (char c : util::trim(tail)) {
    if (std::isspace(static_cast<unsigned char>(c))) break;
    first_word.push_back(c);
  }
  std::string letter = normalize(first_word, TaskType::kAlphabetOption, profile);
  if (letter.size() == 1 && item.answer_range.find_letter(letter) != nullptr) return letter;
  return {};
}

std::string first_math_token(const std::string& text, const NormalizationProfile& profile) {
  static const std::regex number(R"((-?\$?\d[\d,]*(?:\.\d+)?))");
  std::smatch m;
  if (std::regex_search(text, m, number)) {
    return normalize(m[1].str(), TaskType::kMath, profile);
  }
  std::string trimmed = util::trim(text);
  if (trimmed.find('\\') != std::string::npos) {
    return normalize(trimmed, TaskType::kMath, profile);
  }
  return {};
}

}  // namespace

std::string RegexSuite::content_hash() const {
  std::string blob = name;
  for (const auto& rule : rules) {
    blob += '\n';
    blob += rule.pattern;
    blob += '\x1f';
    blob += to_string(rule.role);
    blob += '\x1f';
    for (TaskType t : kAllTaskTypes) {
      if (rule.task_types.count(t)) {
        blob += to_string(t);
        blob += ',';
      }
    }
  }
  return util::sha256_hex(blob);
}

RegexSuite RegexSuite::from_json_text(std::string_view text, std::string default_name) {
  nlohmann::json j = nlohmann::json::parse(text);
  RegexSuite suite;
  suite.name = j.value("name", default_name);
  for (const auto& entry : j.at("rules")) {
    RegexRule rule;
    rule.pattern = entry.at("pattern").get<std::string>();
    rule.role = role_from_string(entry.at("role").get<std::string>());
    for (const auto& t : entry.at("task_types")) {
      auto type = task_type_from_string(t.get<std::string>());
      if (!type) throw std::runtime_error("unknown task type in suite: " + t.get<std::string>());
      rule.task_types.insert(*type);
    }
    std::regex probe(rule.pattern);  // throws std::regex_error when invalid
    suite.rules.push_back(std::move(rule));
  }
  if (suite.rules.empty()) throw std::runtime_error("regex suite has no rules");
  return suite;
}

RegexSuite RegexSuite::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read regex suite: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  std::string stem = path;
  size_t slash = stem.find_last_of('/');
  if (slash != std::string::npos) stem = stem.substr(slash + 1);
  size_t dot = stem.find_last_of('.');
  if (dot != std::string::npos) stem = stem.substr(0, dot);
  return from_json_text(buf.str(), "regex:" + stem);
}

RegexSuite RegexSuite::opencompass_style() {
  RegexSuite suite;
  suite.name = "regex:opencompass-style";
  suite.rules = {
      {R"(\(([A-Za-z])\))", CaptureRole::kOptionLetter, {TaskType::kAlphabetOption}},
      {R"(\b([A-Z])\b)", CaptureRole::kOptionLetter, {TaskType::kAlphabetOption}},
      {R"((-?\$?\d[\d,]*(?:\.\d+)?))", CaptureRole::kLastNumber, {TaskType::kMath}},
  };
  return suite;
}

RegexSuite RegexSuite::lmeval_style() {
  RegexSuite suite;
  suite.name = "regex:lmeval-style";
  suite.rules = {
      {R"([Tt]he answer is:?\s*([^\n]*))",
       CaptureRole::kTrailingAnswer,
       {TaskType::kAlphabetOption, TaskType::kShortText, TaskType::kCategoricalLabel,
        TaskType::kMath}},
      {R"([Aa]nswer:\s*([^\n]*))",
       CaptureRole::kTrailingAnswer,
       {TaskType::kAlphabetOption, TaskType::kShortText, TaskType::kCategoricalLabel,
        TaskType::kMath}},
  };
  return suite;
}

RegexSuite RegexSuite::ultraeval_style() {
  RegexSuite suite;
  suite.name = "regex:ultraeval-style";
  // Strict restrict-format capture only: the exact sentence the restrict
  // prompt asks for, uppercase T, nothing looser.
  suite.rules = {
      {R"(The answer is\s*([^\n.]*))",
       CaptureRole::kTrailingAnswer,
       {TaskType::kAlphabetOption, TaskType::kShortText, TaskType::kCategoricalLabel,
        TaskType::kMath}},
  };
  return suite;
}

RegexSuiteExtractor::RegexSuiteExtractor(RegexSuite suite, NormalizationProfile profile)
    : id_(suite.name), suite_(std::move(suite)), profile_(profile) {}

std::optional<ExtractedKey> RegexSuiteExtractor::extract(const EvalItem& item,
                                                         const ModelResponse& response) {
  const std::string& text = response.text;
  if (util::trim(text).empty()) return ExtractedKey::no_valid_answer();

  for (const auto& rule : suite_.rules) {
    if (!rule.task_types.count(item.task_type)) continue;
    std::regex re;
    try {
      re = std::regex(rule.pattern);
    } catch (const std::regex_error&) {
      continue;  // a broken pattern in a user suite must not abort extraction
    }

    switch (rule.role) {
      case CaptureRole::kOptionLetter: {
        for (auto it = std::sregex_iterator(text.begin(), text.end(), re);
             it != std::sregex_iterator(); ++it) {
          std::string letter =
              normalize(first_group(*it), TaskType::kAlphabetOption, profile_);
          if (item.answer_range.find_letter(letter) != nullptr)
            return ExtractedKey::key(letter);
        }
        break;
      }
      case CaptureRole::kTrailingAnswer: {
        std::smatch m;
        if (!std::regex_search(text, m, re)) break;
        std::string tail = util::trim(first_group(m));
        switch (item.task_type) {
          case TaskType::kAlphabetOption: {
            std::string letter = tail_to_letter(tail, item, profile_);
            if (!letter.empty()) return ExtractedKey::key(letter);
            break;
          }
          case TaskType::kShortText:
          case TaskType::kCategoricalLabel: {
            std::string cleaned = util::trim(tail);
            while (!cleaned.empty() && (cleaned.back() == '.' || cleaned.back() == '!'))
              cleaned.pop_back();
            cleaned = normalize(cleaned, item.task_type, profile_);
            for (const auto& candidate : item.answer_range.flat_list()) {
              if (candidate == cleaned || util::iequals(candidate, cleaned))
                return ExtractedKey::key(candidate);
            }
            break;
          }
          case TaskType::kMath: {
            std::string token = first_math_token(tail, profile_);
            if (!token.empty()) return ExtractedKey::key(token);
            break;
          }
        }
        break;
      }
      case CaptureRole::kLastNumber: {
        std::string last;
        for (auto it = std::sregex_iterator(text.begin(), text.end(), re);
             it != std::sregex_iterator(); ++it) {
          last = first_group(*it);
        }
        if (!last.empty()) {
          std::string token = normalize(last, TaskType::kMath, profile_);
          if (!token.empty()) return ExtractedKey::key(token);
        }
        break;
      }
    }
  }
  return ExtractedKey::no_valid_answer();
}

}  // namespace keyfind
