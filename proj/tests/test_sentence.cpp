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
#include "keyfind/sentence.hpp"

using namespace keyfind;

namespace {

EvalItem four_options() {
  EvalItem item;
  item.id = "q1";
  item.question = "Which pair don't reproduce the same way?";
  item.task_type = TaskType::kAlphabetOption;
  item.answer_range = AnswerRange::pairs({{"A", "dog and wolf"},
                                          {"B", "rose and tulip"},
                                          {"C", "cat and catfish"},
                                          {"D", "caterpillar and butterfly"}});
  item.gold_answer = "C";
  return item;
}

ModelResponse respond(const std::string& text) { return {"q1", "m", text}; }

std::vector<KeySentence> candidates_for(const EvalItem& item, const std::string& text,
                                        const RestatementRules& restatements = {}) {
  SynonymMap synonyms = make_synonym_map(item);
  return find_candidates(item, respond(text), synonyms,
                         SentenceRules::defaults().wrappers, restatements);
}

}  // namespace

TEST_CASE("synonym map carries letter variants, ordinals, and contents") {
  SynonymMap map = make_synonym_map(four_options());
  REQUIRE(map.options.size() == 4);
  const auto& a = map.options.front();
  CHECK(a.canonical == "A");
  auto has = [&](const std::string& form) {
    return std::find(a.forms.begin(), a.forms.end(), form) != a.forms.end();
  };
  CHECK(has("A"));
  CHECK(has("(A)"));
  CHECK(has("option A"));
  CHECK(has("the first option"));
  CHECK(has("dog and wolf"));
}

TEST_CASE("forms claimed by two options identify neither") {
  EvalItem item;
  item.task_type = TaskType::kAlphabetOption;
  item.answer_range = AnswerRange::pairs({{"A", "Yes"}, {"B", "yes"}});
  SynonymMap map = make_synonym_map(item);
  for (const auto& entry : map.options) {
    for (const auto& form : entry.forms) {
      CHECK(form != "Yes");
      CHECK(form != "yes");
    }
  }
}

TEST_CASE("a canonical wrapper yields one wrapped candidate") {
  auto candidates = candidates_for(four_options(), "The answer is (C).");
  REQUIRE(candidates.size() == 1);
  CHECK(candidates[0].kind == CandidateKind::kPromptWrapped);
  CHECK(candidates[0].resolved == "C");
}

TEST_CASE("an option mention resolves directly") {
  auto candidates =
      candidates_for(four_options(), "Option A is the correct choice as it describes things.");
  REQUIRE(candidates.size() == 1);
  CHECK(candidates[0].kind == CandidateKind::kDirect);
  CHECK(candidates[0].resolved == "A");
}

TEST_CASE("articles do not resolve to option letters") {
  auto candidates = candidates_for(four_options(), "A cat is an animal and so is a dog.");
  CHECK(candidates.empty());
}

TEST_CASE("restatement rules produce question-wrapped candidates") {
  EvalItem item;
  item.id = "mark";
  item.question = "What is the age of Mark 10 years later?";
  item.task_type = TaskType::kMath;
  item.answer_range = AnswerRange::math_domain("a(n) number");
  RestatementRules rules;
  rules.rules.push_back(
      {"age of Mark", "Mark will be <final answer> years old in 10 years"});
  SynonymMap synonyms = make_synonym_map(item);
  auto candidates = find_candidates(item, {"mark", "m", "Mark will be 20 years old in 10 years"},
                                    synonyms, SentenceRules::defaults().wrappers, rules);
  REQUIRE(candidates.size() == 1);
  CHECK(candidates[0].kind == CandidateKind::kQuestionWrapped);
  CHECK(candidates[0].resolved == "20");
}

TEST_CASE("cot detection") {
  CHECK(detect_cot(respond("To find out: let's calculate.\n\n$45 / $5 = 9\n\nSo, Mike could "
                           "buy 9 games.")));
  CHECK(!detect_cot(respond("The answer is B.")));
  CHECK(detect_cot(respond("(A) is not the answer... So the correct answer is (D) "
                           "Caterpillar and butterfly ...")));
  CHECK(detect_cot(respond("Let's think step by step.")));
  CHECK(detect_cot(respond("1. Read the question. 2. Compare the options. The answer is A.")));
  CHECK(!detect_cot(respond("Paris is the capital of France.")));
}

TEST_CASE("resolution rules") {
  EvalItem item = four_options();
  CHECK(resolve(item, {}, false) == ExtractedKey::no_valid_answer());
  CHECK(resolve(item, {}, true) == ExtractedKey::no_valid_answer());

  KeySentence a{0, 3, CandidateKind::kDirect, "A"};
  KeySentence d1{10, 20, CandidateKind::kPromptWrapped, "D"};
  KeySentence d2{30, 40, CandidateKind::kDirect, "D"};

  CHECK(resolve(item, {a}, false) == ExtractedKey::key("A"));
  CHECK(resolve(item, {a, d1, d2}, true) == ExtractedKey::key("D"));
  CHECK(resolve(item, {a, d1}, false) == ExtractedKey::no_valid_answer());
  // identical answers are not a fluctuation
  CHECK(resolve(item, {d1, d2}, false) == ExtractedKey::key("D"));
  CHECK(resolve(item, {d1, d2}, false) == resolve(item, {d1}, false));
}

TEST_CASE("listing every candidate resolves to no valid answer") {
  EvalItem item;
  item.id = "grape";
  item.question = "If you really wanted a grape, where would you go to get it?";
  item.task_type = TaskType::kShortText;
  item.answer_range = AnswerRange::flat({"winery", "fruit stand", "field", "kitchen", "food"});
  SynonymMap synonyms = make_synonym_map(item);
  ModelResponse response{"grape", "m",
                         "The answer is winery / fruit stand / field / kitchen / food ..."};
  auto candidates =
      find_candidates(item, response, synonyms, SentenceRules::defaults().wrappers, {});
  CHECK(candidates.size() == 5);
  CHECK(resolve(item, candidates, detect_cot(response)) == ExtractedKey::no_valid_answer());
}

TEST_CASE("appending matchless text does not change the result") {
  std::mt19937_64 rng(23);
  EvalItem item = four_options();
  SynonymMap synonyms = make_synonym_map(item);
  const std::vector<std::string> bodies = {
      "The answer is (B).",
      "Option C is right.",
      "(A) is not it... So the correct answer is (D).",
      "I pick the second option.",
      "Nothing to see here.",
  };
  for (int i = 0; i < 40; ++i) {
    const std::string& body = bodies[rng() % bodies.size()];
    std::string appended = body + ". Lorem ipsum dolor sit amet and nothing more";
    ModelResponse before = respond(body);
    ModelResponse after = respond(appended);
    bool cot = detect_cot(before);
    CHECK(detect_cot(after) == cot);
    auto k1 = resolve(item, find_candidates(item, before, synonyms,
                                            SentenceRules::defaults().wrappers, {}),
                      cot);
    auto k2 = resolve(item, find_candidates(item, after, synonyms,
                                            SentenceRules::defaults().wrappers, {}),
                      cot);
    CHECK(k1 == k2);
  }
}

TEST_CASE("direct matches inside a wrapped span are not double counted") {
  auto candidates = candidates_for(four_options(), "I think the answer is (C). Maybe.");
  REQUIRE(candidates.size() == 1);
  CHECK(candidates[0].kind == CandidateKind::kPromptWrapped);
}

TEST_CASE("wrapper templates are validated") {
  SentenceRules rules = SentenceRules::defaults();
  rules.wrappers.templates.push_back("no slot here");
  CHECK_THROWS(rules.validate());

  SentenceRules doubled = SentenceRules::defaults();
  doubled.wrappers.templates.push_back("<final answer> and <final answer>");
  CHECK_THROWS(doubled.validate());

  SentenceRules duplicate = SentenceRules::defaults();
  duplicate.wrappers.templates.push_back(duplicate.wrappers.templates.front());
  CHECK_THROWS(duplicate.validate());
}

TEST_CASE("find_wrapper_match locates the wrapper and its slot") {
  WrapperPatternSet set;
  set.templates = {"The final answer is <final answer>",
                   "Based on the context of the question, <final answer> is the most likely "
                   "answer."};
  auto match = find_wrapper_match("Let me think. The final answer is A.", set);
  REQUIRE(match.has_value());
  CHECK(match->template_index == 0);
  std::string slot = std::string("Let me think. The final answer is A.")
                         .substr(match->slot_begin, match->slot_end - match->slot_begin);
  CHECK(slot == "A");
  CHECK(!find_wrapper_match("No wrappers here.", set).has_value());
}

TEST_CASE("sentence rules load from json") {
  SentenceRules rules = SentenceRules::from_json_text(R"({
    "wrappers": ["My answer: <final answer>."],
    "cot_markers": ["chain of thought"],
    "restatements": [{"question": "age of Mark", "template": "Mark is <final answer>"}]
  })");
  CHECK(rules.wrappers.templates.size() == 1);
  CHECK(rules.restatements.rules.size() == 1);
  CHECK(detect_cot({"x", "m", "some Chain of Thought here"}, rules));
}

TEST_CASE("math candidates follow equations and concluding sentences") {
  EvalItem item;
  item.id = "mike";
  item.task_type = TaskType::kMath;
  item.answer_range = AnswerRange::math_domain("a(n) number");
  SynonymMap synonyms = make_synonym_map(item);
  ModelResponse response{"mike", "m",
                         "To find out how many 5 dollar games he can buy, divide.\n\n$45 / $5 = "
                         "9\n\nSo, Mike could buy 9 5 dollar games with the money he had left."};
  auto candidates =
      find_candidates(item, response, synonyms, SentenceRules::defaults().wrappers, {});
  REQUIRE(!candidates.empty());
  for (const auto& c : candidates) CHECK(c.resolved == "9");
  CHECK(resolve(item, candidates, detect_cot(response)) == ExtractedKey::key("9"));
}
