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

#include <chrono>
#include <thread>

#include "doctest.h"
#include "httplib.h"
#include "json.hpp"
#include "keyfind/remote.hpp"
#include "stub_server.hpp"

using namespace keyfind;

namespace {

const PromptLibrary& library() {
  static PromptLibrary lib = PromptLibrary::load(KEYFIND_TEMPLATE_DIR);
  return lib;
}

RemoteEndpoint endpoint_for(const keyfind::testing::StubServer& stub, double timeout_seconds = 1.0,
                            int max_in_flight = 4, int retries = 1) {
  RemoteEndpoint e;
  e.name = "stub";
  e.base_url = stub.base_url();
  e.timeout_seconds = timeout_seconds;
  e.max_in_flight = max_in_flight;
  e.retries = retries;
  return e;
}

EvalItem trec_item() {
  EvalItem item;
  item.id = "trec";
  item.question = "How tall is the Sears Building?";
  item.task_type = TaskType::kCategoricalLabel;
  item.answer_range = AnswerRange::flat(
      {"Abbreviation", "Entity", "Description", "Person", "Location", "Number"});
  return item;
}

EvalItem abcd_item(const std::string& id = "abcd") {
  EvalItem item;
  item.id = id;
  item.question = "pick one";
  item.task_type = TaskType::kAlphabetOption;
  item.answer_range =
      AnswerRange::pairs({{"A", "one"}, {"B", "two"}, {"C", "three"}, {"D", "four"}});
  return item;
}

}  // namespace

TEST_CASE("the rendered request fills every slot and ends with the capture cue") {
  EvalItem item = trec_item();
  ModelResponse response{"trec", "m", "so the answer would be a Location"};
  std::string prompt = render_remote_request(item, response, library());
  CHECK(prompt.find("Question: How tall is the Sears Building?") != std::string::npos);
  CHECK(prompt.find("Key answer type: categorical label") != std::string::npos);
  CHECK(prompt.find("Answer range: ['Abbreviation', 'Entity', 'Description', 'Person', "
                    "'Location', 'Number']") != std::string::npos);
  const std::string tail = "Key extracted answer:";
  CHECK(prompt.substr(prompt.size() - tail.size()) == tail);

  EvalItem alphabet = abcd_item();
  std::string nested = render_remote_request(alphabet, {"abcd", "m", "x"}, library());
  CHECK(nested.find("[['A', 'one'], ['B', 'two'], ['C', 'three'], ['D', 'four']]") !=
        std::string::npos);

  CHECK_THROWS(render_remote_request(item, response, library(), "judge"));  // missing slots
}

TEST_CASE("reply parsing normalizes and checks the answer range") {
  CHECK(parse_remote_reply("Location", trec_item()) == ExtractedKey::key("Location"));
  CHECK(parse_remote_reply("[No valid answer]", trec_item()) ==
        ExtractedKey::no_valid_answer());
  CHECK(parse_remote_reply("E", abcd_item()) == ExtractedKey::no_valid_answer());
  CHECK(parse_remote_reply(" (a). ", abcd_item()) == ExtractedKey::key("A"));
  CHECK(parse_remote_reply("Location\nextra chatter", trec_item()) ==
        ExtractedKey::key("Location"));
  CHECK(parse_remote_reply("", trec_item()) == ExtractedKey::no_valid_answer());

  EvalItem math;
  math.task_type = TaskType::kMath;
  math.answer_range = AnswerRange::math_domain("a(n) number");
  CHECK(parse_remote_reply("$10,000.", math) == ExtractedKey::key("10000"));
}

TEST_CASE("endpoint configs validate") {
  RemoteEndpoint bad;
  bad.base_url = "http://127.0.0.1:1";
  bad.timeout_seconds = 0;
  CHECK_THROWS(bad.validate());
  bad.timeout_seconds = 1;
  bad.max_in_flight = 0;
  CHECK_THROWS(bad.validate());

  RemoteEndpoint parsed = RemoteEndpoint::from_json_text(
      R"({"name": "svc", "base_url": "http://127.0.0.1:9", "timeout_seconds": 2.5,
          "max_in_flight": 8, "retries": 0, "reply_pointer": "/choices/0/text"})");
  CHECK(parsed.name == "svc");
  CHECK(parsed.max_in_flight == 8);
}

TEST_CASE("remote extraction against the stub") {
  keyfind::testing::StubServer stub;
  RemoteExtractor extractor(endpoint_for(stub), library());
  CHECK(extractor.id() == "remote:stub");
  CHECK(extractor.reachable());

  SUBCASE("a clean reply maps through the matcher") {
    auto key = extractor.extract(trec_item(), {"trec", "m", "REPLY[Location]"});
    REQUIRE(key.has_value());
    CHECK(*key == ExtractedKey::key("Location"));
  }

  SUBCASE("the sentinel literal maps to no valid answer, not unavailable") {
    auto key = extractor.extract(trec_item(), {"trec", "m", "REPLY[[No valid answer]]"});
    REQUIRE(key.has_value());
    CHECK(*key == ExtractedKey::no_valid_answer());
  }

  SUBCASE("an out-of-range reply maps to no valid answer") {
    auto key = extractor.extract(abcd_item(), {"abcd", "m", "REPLY[E]"});
    REQUIRE(key.has_value());
    CHECK(*key == ExtractedKey::no_valid_answer());
  }

  SUBCASE("timeouts become unavailable, never no-valid-answer") {
    RemoteExtractor impatient(endpoint_for(stub, 0.5, 1, 0), library());
    auto key = impatient.extract(trec_item(), {"trec", "m", "TIMEOUT"});
    CHECK(!key.has_value());
  }

  SUBCASE("server errors exhaust the retry budget and become unavailable") {
    auto key = extractor.extract(trec_item(), {"trec", "m", "STATUS500"});
    CHECK(!key.has_value());
  }

  SUBCASE("batches preserve order under concurrency") {
    RemoteExtractor wide(endpoint_for(stub, 2.0, 8, 0), library());
    std::vector<std::pair<EvalItem, ModelResponse>> pairs;
    const char* letters[] = {"A", "B", "C", "D"};
    for (int i = 0; i < 24; ++i) {
      EvalItem item = abcd_item("item-" + std::to_string(i));
      std::string text = "SLOW[" + std::to_string((i * 7) % 40) + "] REPLY[" +
                         letters[i % 4] + "]";
      pairs.emplace_back(item, ModelResponse{item.id, "m", text});
    }
    auto results = wide.extract_batch(pairs);
    REQUIRE(results.size() == pairs.size());
    for (size_t i = 0; i < results.size(); ++i) {
      CHECK(results[i].item_id == pairs[i].first.id);
      REQUIRE(results[i].key.has_value());
      CHECK(results[i].key->serialize() == letters[i % 4]);
    }
  }

  SUBCASE("one failure never aborts the batch") {
    std::vector<std::pair<EvalItem, ModelResponse>> pairs;
    EvalItem item = abcd_item("ok-1");
    pairs.emplace_back(item, ModelResponse{"ok-1", "m", "REPLY[A]"});
    EvalItem broken = abcd_item("broken");
    pairs.emplace_back(broken, ModelResponse{"broken", "m", "STATUS500"});
    EvalItem item2 = abcd_item("ok-2");
    pairs.emplace_back(item2, ModelResponse{"ok-2", "m", "REPLY[B]"});

    RemoteExtractor wide(endpoint_for(stub, 2.0, 8, 0), library());
    auto results = wide.extract_batch(pairs);
    REQUIRE(results.size() == 3);
    CHECK(results[0].key.has_value());
    CHECK(!results[1].key.has_value());
    CHECK(results[2].key.has_value());
    CHECK(results[1].item_id == "broken");
  }
}

TEST_CASE("an unreachable endpoint reports as such") {
  RemoteEndpoint nowhere;
  nowhere.name = "nowhere";
  nowhere.base_url = "http://127.0.0.1:1";
  nowhere.timeout_seconds = 0.5;
  nowhere.retries = 0;
  RemoteExtractor extractor(nowhere, library());
  CHECK(!extractor.reachable());
  auto key = extractor.extract(abcd_item(), {"abcd", "m", "REPLY[A]"});
  CHECK(!key.has_value());
}
