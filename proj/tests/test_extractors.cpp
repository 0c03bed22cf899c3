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

#include <random>

#include "doctest.h"
#include "keyfind/extractor.hpp"
#include "keyfind/regex_suite.hpp"

using namespace keyfind;

namespace {

EvalItem d1_item() {
  EvalItem item;
  item.id = "d1";
  item.question =
      "Which pair don't reproduce the same way? Answer Choices: (A) dog and wolf (B) rose and "
      "tulip (C) cat and catfish (D) caterpillar and butterfly";
  item.task_type = TaskType::kAlphabetOption;
  item.answer_range = AnswerRange::pairs({{"A", "dog and wolf"},
                                          {"B", "rose and tulip"},
                                          {"C", "cat and catfish"},
                                          {"D", "caterpillar and butterfly"}});
  item.gold_answer = "C";
  return item;
}

const char* kD1Response =
    "(A) is not the answer... So the correct answer is (D) Caterpillar and butterfly ...";

EvalItem grape_item() {
  EvalItem item;
  item.id = "grape";
  item.question = "If you really wanted a grape, where would you go to get it?";
  item.task_type = TaskType::kShortText;
  item.answer_range = AnswerRange::flat({"winery", "fruit stand", "field", "kitchen", "food"});
  item.gold_answer = "winery";
  return item;
}

}  // namespace

TEST_CASE("reference rules and the opencompass emulation disagree on the worked example") {
  EvalItem item = d1_item();
  ModelResponse response{"d1", "m", kD1Response};

  RuleExtractor reference;
  auto ref = reference.extract(item, response);
  REQUIRE(ref.has_value());
  CHECK(ref->serialize() == "D");

  RegexSuiteExtractor opencompass(RegexSuite::opencompass_style());
  auto oc = opencompass.extract(item, response);
  REQUIRE(oc.has_value());
  CHECK(oc->serialize() == "A");  // anchors the first parenthesized letter
}

TEST_CASE("every extractor maps an empty response to no valid answer") {
  EvalItem item = d1_item();
  ModelResponse empty{"d1", "m", ""};
  RuleExtractor reference;
  RegexSuiteExtractor opencompass(RegexSuite::opencompass_style());
  RegexSuiteExtractor lmeval(RegexSuite::lmeval_style());
  RegexSuiteExtractor ultraeval(RegexSuite::ultraeval_style());
  for (Extractor* e :
       std::initializer_list<Extractor*>{&reference, &opencompass, &lmeval, &ultraeval}) {
    auto key = e->extract(item, empty);
    REQUIRE(key.has_value());
    CHECK(*key == ExtractedKey::no_valid_answer());
  }
}

TEST_CASE("lmeval-style trailing capture checks range membership") {
  RegexSuiteExtractor lmeval(RegexSuite::lmeval_style());
  EvalItem item = grape_item();
  auto key = lmeval.extract(item, {"grape", "m", "The answer is winery."});
  REQUIRE(key.has_value());
  CHECK(key->serialize() == "winery");

  auto miss = lmeval.extract(item, {"grape", "m", "The answer is vineyard."});
  REQUIRE(miss.has_value());
  CHECK(*miss == ExtractedKey::no_valid_answer());
}

TEST_CASE("opencompass-style takes the last number on math items") {
  RegexSuiteExtractor opencompass(RegexSuite::opencompass_style());
  EvalItem item;
  item.id = "m";
  item.task_type = TaskType::kMath;
  item.answer_range = AnswerRange::math_domain("a(n) number");
  auto key = opencompass.extract(item, {"m", "m", "3 + 4 = 7. So the result is 7"});
  REQUIRE(key.has_value());
  CHECK(key->serialize() == "7");

  auto comma = opencompass.extract(item, {"m", "m", "It comes to $10,000."});
  REQUIRE(comma.has_value());
  CHECK(comma->serialize() == "10000");
}

TEST_CASE("ultraeval-style accepts only the strict restrict format") {
  RegexSuiteExtractor ultraeval(RegexSuite::ultraeval_style());
  EvalItem item = d1_item();
  auto strict = ultraeval.extract(item, {"d1", "m", "The answer is (C)."});
  REQUIRE(strict.has_value());
  CHECK(strict->serialize() == "C");

  auto loose = ultraeval.extract(item, {"d1", "m", "the answer is (C)."});
  REQUIRE(loose.has_value());
  CHECK(*loose == ExtractedKey::no_valid_answer());
}

TEST_CASE("reference extractor reproduces the dataset examples") {
  RuleExtractor reference;

  EvalItem hella;
  hella.id = "hs";
  hella.question = "A man is seen playing guitar on a stage.";
  hella.task_type = TaskType::kAlphabetOption;
  hella.answer_range = AnswerRange::pairs(
      {{"A", "strums the guitar in the end."}, {"B", "waves to the crowd."},
       {"C", "gives a stuffed toy away."}, {"D", "stops playing."}});
  auto a = reference.extract(hella, {"hs", "m", "Option A is the correct choice as it "
                                               "describes the scene."});
  REQUIRE(a.has_value());
  CHECK(a->serialize() == "A");

  EvalItem trec;
  trec.id = "trec";
  trec.question = "How tall is the Sears Building?";
  trec.task_type = TaskType::kCategoricalLabel;
  trec.answer_range = AnswerRange::flat(
      {"Abbreviation", "Entity", "Description", "Person", "Location", "Number"});
  auto loc = reference.extract(
      trec, {"trec", "m",
             "The Sears Building is a specific structure, so the answer would be a Location "
             "..."});
  REQUIRE(loc.has_value());
  CHECK(loc->serialize() == "Location");
}

TEST_CASE("local extractors are total over messy text") {
  std::mt19937_64 rng(31);
  const std::string alphabet = "aA bB(){}[].,$\\19 '\"x=\nSo?";
  RuleExtractor reference;
  RegexSuiteExtractor lmeval(RegexSuite::lmeval_style());
  EvalItem items[] = {d1_item(), grape_item()};
  for (int i = 0; i < 300; ++i) {
    std::string text;
    size_t len = rng() % 60;
    for (size_t k = 0; k < len; ++k) text.push_back(alphabet[rng() % alphabet.size()]);
    for (const auto& item : items) {
      auto r1 = reference.extract(item, {item.id, "m", text});
      auto r2 = lmeval.extract(item, {item.id, "m", text});
      CHECK(r1.has_value());  // local extractors never report unavailable
      CHECK(r2.has_value());
    }
  }
}

TEST_CASE("batch extraction preserves order and splits cleanly") {
  RuleExtractor reference;
  CHECK(reference.extract_batch({}).empty());

  std::vector<std::pair<EvalItem, ModelResponse>> pairs;
  EvalItem item = d1_item();
  for (int i = 0; i < 8; ++i) {
    EvalItem copy = item;
    copy.id = "item-" + std::to_string(i);
    ModelResponse response{copy.id, "m",
                           i % 2 == 0 ? "The answer is (C)." : std::string(kD1Response)};
    pairs.emplace_back(copy, response);
  }
  auto whole = reference.extract_batch(pairs);
  REQUIRE(whole.size() == pairs.size());
  for (size_t i = 0; i < whole.size(); ++i) CHECK(whole[i].item_id == pairs[i].first.id);

  std::vector<std::pair<EvalItem, ModelResponse>> front(pairs.begin(), pairs.begin() + 3);
  std::vector<std::pair<EvalItem, ModelResponse>> back(pairs.begin() + 3, pairs.end());
  auto part1 = reference.extract_batch(front);
  auto part2 = reference.extract_batch(back);
  part1.insert(part1.end(), part2.begin(), part2.end());
  REQUIRE(part1.size() == whole.size());
  for (size_t i = 0; i < whole.size(); ++i) {
    CHECK(part1[i].item_id == whole[i].item_id);
    CHECK(part1[i].key == whole[i].key);
  }
}

TEST_CASE("suite order is semantic and hashed") {
  RegexSuite suite = RegexSuite::opencompass_style();
  std::string before = suite.content_hash();
  std::swap(suite.rules[0], suite.rules[1]);
  CHECK(suite.content_hash() != before);
}

TEST_CASE("suites load from json config") {
  RegexSuite suite = RegexSuite::from_json_text(R"json({
    "name": "regex:custom",
    "rules": [
      {"pattern": "FINAL: ([A-Z])", "role": "option letter", "task_types": ["alphabet option"]}
    ]
  })json",
                                                "regex:fallback");
  RegexSuiteExtractor extractor(suite);
  CHECK(extractor.id() == "regex:custom");
  auto key = extractor.extract(d1_item(), {"d1", "m", "FINAL: B"});
  REQUIRE(key.has_value());
  CHECK(key->serialize() == "B");

  CHECK_THROWS(RegexSuite::from_json_text(R"({"rules": []})", "x"));
  CHECK_THROWS(RegexSuite::from_json_text(
      R"({"rules": [{"pattern": "(", "role": "option letter", "task_types": ["math"]}]})", "x"));
}
