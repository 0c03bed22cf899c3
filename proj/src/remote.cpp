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

#include "keyfind/remote.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "keyfind/util.hpp"
#include "httplib.h"
#include "json.hpp"

namespace keyfind {

RemoteEndpoint RemoteEndpoint::from_json_text(std::string_view text) {
  nlohmann::json j = nlohmann::json::parse(text);
  RemoteEndpoint e;
  e.name = j.value("name", e.name);
  e.base_url = j.at("base_url").get<std::string>();
  e.path = j.value("path", e.path);
  e.timeout_seconds = j.value("timeout_seconds", e.timeout_seconds);
  e.max_in_flight = j.value("max_in_flight", e.max_in_flight);
  e.retries = j.value("retries", e.retries);
  e.template_id = j.value("template_id", e.template_id);
  e.prompt_field = j.value("prompt_field", e.prompt_field);
  e.reply_pointer = j.value("reply_pointer", e.reply_pointer);
  if (j.contains("extra_body")) e.extra_body_json = j["extra_body"].dump();
  e.validate();
  return e;
}

RemoteEndpoint RemoteEndpoint::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read endpoint config: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return from_json_text(buf.str());
}

void RemoteEndpoint::validate() const {
  if (timeout_seconds <= 0) throw std::runtime_error("endpoint timeout must be positive");
  if (max_in_flight < 1) throw std::runtime_error("endpoint max_in_flight must be at least 1");
  if (retries < 0) throw std::runtime_error("endpoint retry budget must be non-negative");
  if (base_url.empty()) throw std::runtime_error("endpoint base_url is required");
}

std::string render_remote_request(const EvalItem& item, const ModelResponse& response,
                                  const PromptLibrary& library,
                                  const std::string& template_id) {
  if (template_id == "xfinder_extraction")
    return library.render_extraction_prompt(item, response);
  return library.render(template_id,
                        {{"question", item.question},
                         {"LLM response", response.text},
                         {"key answer type", std::string(to_string(item.task_type))},
                         {"answer range", item.answer_range.serialize()}});
}

ExtractedKey parse_remote_reply(std::string_view reply, const EvalItem& item,
                                const NormalizationProfile& profile) {
  std::string trimmed = util::trim(reply);
  size_t newline = trimmed.find('\n');
  if (newline != std::string::npos) trimmed = util::trim(trimmed.substr(0, newline));
  if (trimmed.empty() || trimmed == kNoValidAnswerLiteral)
    return ExtractedKey::no_valid_answer();

  std::string value = normalize(trimmed, item.task_type, profile);
  switch (item.task_type) {
    case TaskType::kAlphabetOption:
      if (value.size() != 1 || item.answer_range.find_letter(value) == nullptr)
        return ExtractedKey::no_valid_answer();
      return ExtractedKey::key(value);
    case TaskType::kShortText:
    case TaskType::kCategoricalLabel: {
      for (const auto& candidate : item.answer_range.flat_list()) {
        if (normalize(candidate, item.task_type, profile) == value)
          return ExtractedKey::key(candidate);
      }
      return ExtractedKey::no_valid_answer();
    }
    case TaskType::kMath:
      return value.empty() ? ExtractedKey::no_valid_answer() : ExtractedKey::key(value);
  }
  return ExtractedKey::no_valid_answer();
}

RemoteExtractor::RemoteExtractor(RemoteEndpoint endpoint, const PromptLibrary& library,
                                 NormalizationProfile profile)
    : id_("remote:" + endpoint.name),
      endpoint_(std::move(endpoint)),
      library_(library),
      profile_(profile) {
  endpoint_.validate();
}

std::optional<std::string> RemoteExtractor::post_completion(const std::string& body) const {
  for (int attempt = 0; attempt <= endpoint_.retries; ++attempt) {
    httplib::Client client(endpoint_.base_url);
    auto whole = std::lround(endpoint_.timeout_seconds);
    auto frac = std::lround((endpoint_.timeout_seconds - static_cast<double>(whole)) * 1e6);
    client.set_connection_timeout(whole, frac);
    client.set_read_timeout(whole, frac);
    client.set_write_timeout(whole, frac);
    if (const char* key = std::getenv("KEYFIND_API_KEY")) {
      client.set_default_headers({{"Authorization", std::string("Bearer ") + key}});
    }
    auto res = client.Post(endpoint_.path, body, "application/json");
    if (res && res->status < 400) return res->body;
  }
  return std::nullopt;
}

std::optional<ExtractedKey> RemoteExtractor::extract(const EvalItem& item,
                                                     const ModelResponse& response) {
  std::string prompt = render_remote_request(item, response, library_, endpoint_.template_id);
  nlohmann::json body = nlohmann::json::parse(endpoint_.extra_body_json);
  body[endpoint_.prompt_field] = prompt;
  // Retries reuse the same serialized body, so a retried request is
  // byte-identical to the original.
  std::optional<std::string> reply = post_completion(body.dump());
  if (!reply) return std::nullopt;

  std::string text;
  try {
    nlohmann::json parsed = nlohmann::json::parse(*reply);
    nlohmann::json::json_pointer ptr(endpoint_.reply_pointer);
    if (!parsed.contains(ptr)) return std::nullopt;
    const nlohmann::json& at = parsed.at(ptr);
    text = at.is_string() ? at.get<std::string>() : at.dump();
  } catch (const nlohmann::json::exception&) {
    // A non-JSON body is treated as the raw completion text.
    text = *reply;
  }
  return parse_remote_reply(text, item, profile_);
}

std::vector<Extraction> RemoteExtractor::extract_batch(
    const std::vector<std::pair<EvalItem, ModelResponse>>& pairs) {
  std::vector<Extraction> out(pairs.size());
  std::atomic<size_t> next{0};
  size_t workers = std::min<size_t>(static_cast<size_t>(endpoint_.max_in_flight), pairs.size());
  if (workers <= 1) return Extractor::extract_batch(pairs);

  std::vector<std::thread> threads;
  threads.reserve(workers);
  for (size_t w = 0; w < workers; ++w) {
    threads.emplace_back([&] {
      while (true) {
        size_t i = next.fetch_add(1);
        if (i >= pairs.size()) return;
        out[i] = Extraction{pairs[i].first.id, extract(pairs[i].first, pairs[i].second)};
      }
    });
  }
  for (auto& t : threads) t.join();
  return out;
}

bool RemoteExtractor::reachable() const {
  httplib::Client client(endpoint_.base_url);
  client.set_connection_timeout(2, 0);
  client.set_read_timeout(2, 0);
  auto res = client.Options(endpoint_.path);
  if (res) return true;
  // Some servers reject OPTIONS outright; any HTTP response at all counts.
  auto get = client.Get("/");
  return static_cast<bool>(get);
}

}  // namespace keyfind
