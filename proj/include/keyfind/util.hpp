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

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace keyfind::util {

/// Uniform index draw that does not depend on distribution internals, so
/// seeded runs reproduce across standard libraries.
uint64_t pick_index(std::mt19937_64& rng, uint64_t n);

std::string trim(std::string_view s);
std::string to_lower(std::string_view s);
std::string to_upper(std::string_view s);
std::string collapse_whitespace(std::string_view s);

bool iequals(std::string_view a, std::string_view b);

/// Case-insensitive substring search; npos when absent.
size_t ifind(std::string_view haystack, std::string_view needle, size_t from = 0);

bool is_word_char(char c);

/// True when [begin, end) is not glued to adjacent word characters.
bool at_word_boundary(std::string_view text, size_t begin, size_t end);

/// Byte ranges of sentences. Boundaries are newlines and '.', '!', '?'
/// that do not sit between two digits (keeps "3.5" intact).
struct Span {
  size_t begin = 0;
  size_t end = 0;
};
std::vector<Span> split_sentences(std::string_view text);

/// Index of the sentence containing byte `pos`, or npos.
size_t sentence_index_at(const std::vector<Span>& sentences, size_t pos);

std::vector<std::string> split(std::string_view s, char sep);

std::string sha256_hex(std::string_view bytes);

/// Parses the textual list forms used by standard_answer_range:
/// a flat list of strings or a list of [letter, content] pairs, written
/// with either single or double quotes. Returns nullopt when the text is
/// not a well-formed list literal.
struct ParsedList {
  bool nested = false;
  std::vector<std::string> flat;                             // nested == false
  std::vector<std::pair<std::string, std::string>> pairs;    // nested == true
};
std::optional<ParsedList> parse_list_literal(std::string_view text);

/// Single-quoted Python-style list rendering with backslash escapes.
std::string render_flat_list(const std::vector<std::string>& items);
std::string render_pair_list(
    const std::vector<std::pair<std::string, std::string>>& pairs);

}  // namespace keyfind::util
