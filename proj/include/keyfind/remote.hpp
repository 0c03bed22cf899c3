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

#pragma once

#include <string>

#include "keyfind/extractor.hpp"
#include "keyfind/prompts.hpp"

namespace keyfind {

/// Remote inference endpoint: a single text-in/text-out completion call.
/// The request body shape is a small mapping so any inference server fits:
/// the rendered prompt goes into `prompt_field`, `extra_body_json` is merged
/// in verbatim, and the generated text is read back through `reply_pointer`
/// (a JSON pointer, e.g. "/choices/0/text").
struct RemoteEndpoint {
  std::string name = "endpoint";
  std::string base_url;                    // scheme://host:port
  std::string path = "/v1/completions";
  double timeout_seconds = 30.0;
  int max_in_flight = 4;
  int retries = 2;                         // attempts after the first
  std::string template_id = "xfinder_extraction";
  std::string prompt_field = "prompt";
  std::string reply_pointer = "/text";
  std::string extra_body_json = "{}";

  static RemoteEndpoint load(const std::string& path);
  static RemoteEndpoint from_json_text(std::string_view text);

  /// Throws on a non-positive timeout or concurrency below 1.
  void validate() const;
};

/// Fills the extraction template's four slots for one (item, response) pair.
/// The answer range is serialized in the standard_answer_range form for the
/// item's type. Throws when the template lacks a required slot.
std::string render_remote_request(const EvalItem& item, const ModelResponse& response,
                                  const PromptLibrary& library,
                                  const std::string& template_id = "xfinder_extraction");

/// Interprets a remote reply: trimmed first line; the exact sentinel literal
/// maps to NoValidAnswer; anything else is normalized for the item's type
/// and, for non-math items, checked against the answer range.
ExtractedKey parse_remote_reply(std::string_view reply, const EvalItem& item,
                                const NormalizationProfile& profile = {});

/// Extractor backed by a remote completion endpoint. Transport failure after
/// the retry budget is reported as an unavailable extraction, distinct from
/// NoValidAnswer, so infrastructure failure never masquerades as model error.
class RemoteExtractor : public Extractor {
 public:
  RemoteExtractor(RemoteEndpoint endpoint, const PromptLibrary& library,
                  NormalizationProfile profile = {});

  const std::string& id() const override { return id_; }
  std::optional<ExtractedKey> extract(const EvalItem& item,
                                      const ModelResponse& response) override;

  /// Joins results in input order with at most max_in_flight concurrent
  /// requests.
  std::vector<Extraction> extract_batch(
      const std::vector<std::pair<EvalItem, ModelResponse>>& pairs) override;

  /// Cheap connectivity probe used to skip an unreachable endpoint up front.
  bool reachable() const;

  const RemoteEndpoint& endpoint() const { return endpoint_; }

 private:
  std::optional<std::string> post_completion(const std::string& body) const;

  std::string id_;
  RemoteEndpoint endpoint_;
  const PromptLibrary& library_;
  NormalizationProfile profile_;
};

}  // namespace keyfind
