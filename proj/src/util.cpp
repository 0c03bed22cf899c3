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

#include "keyfind/util.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cstring>
#include <limits>

namespace keyfind::util {

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

char lower(char c) { return static_cast<char>(std::tolower(static_cast<unsigned char>(c))); }

bool is_digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }

}  // namespace

uint64_t pick_index(std::mt19937_64& rng, uint64_t n) {
  if (n == 0) return 0;
  uint64_t limit = std::numeric_limits<uint64_t>::max() - std::numeric_limits<uint64_t>::max() % n;
  uint64_t v = rng();
  while (v >= limit) v = rng();
  return v % n;
}

std::string trim(std::string_view s) {
  size_t b = 0;
  size_t e = s.size();
  while (b < e && is_space(s[b])) ++b;
  while (e > b && is_space(s[e - 1])) --e;
  return std::string(s.substr(b, e - b));
}

std::string to_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string to_upper(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  return out;
}

std::string collapse_whitespace(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool in_ws = false;
  for (char c : s) {
    if (is_space(c)) {
      in_ws = true;
      continue;
    }
    if (in_ws && !out.empty()) out.push_back(' ');
    in_ws = false;
    out.push_back(c);
  }
  return out;
}

bool iequals(std::string_view a, std::string_view b) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i) {
    if (lower(a[i]) != lower(b[i])) return false;
  }
  return true;
}

size_t ifind(std::string_view haystack, std::string_view needle, size_t from) {
  if (needle.empty()) return from <= haystack.size() ? from : std::string_view::npos;
  if (needle.size() > haystack.size()) return std::string_view::npos;
  for (size_t i = from; i + needle.size() <= haystack.size(); ++i) {
    size_t j = 0;
    while (j < needle.size() && lower(haystack[i + j]) == lower(needle[j])) ++j;
    if (j == needle.size()) return i;
  }
  return std::string_view::npos;
}

bool is_word_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_';
}

bool at_word_boundary(std::string_view text, size_t begin, size_t end) {
  if (begin > 0 && is_word_char(text[begin - 1]) && is_word_char(text[begin])) return false;
  if (end < text.size() && end > 0 && is_word_char(text[end - 1]) && is_word_char(text[end]))
    return false;
  return true;
}

std::vector<Span> split_sentences(std::string_view text) {
  std::vector<Span> out;
  size_t start = 0;
  size_t i = 0;
  auto flush = [&](size_t end_excl, size_t next_start) {
    // Skip spans that hold no visible characters.
    bool visible = false;
    for (size_t k = start; k < end_excl; ++k) {
      if (!is_space(text[k])) {
        visible = true;
        break;
      }
    }
    if (visible) out.push_back({start, end_excl});
    start = next_start;
  };
  while (i < text.size()) {
    char c = text[i];
    if (c == '\n') {
      flush(i, i + 1);
      ++i;
      continue;
    }
    if (c == '.' || c == '!' || c == '?') {
      bool decimal_dot = c == '.' && i > 0 && i + 1 < text.size() && is_digit(text[i - 1]) &&
                         is_digit(text[i + 1]);
      if (!decimal_dot) {
        size_t j = i;
        while (j + 1 < text.size() && (text[j + 1] == '.' || text[j + 1] == '!' || text[j + 1] == '?'))
          ++j;  // swallow "..." and "?!"
        flush(j + 1, j + 1);
        i = j + 1;
        continue;
      }
    }
    ++i;
  }
  flush(text.size(), text.size());
  return out;
}

size_t sentence_index_at(const std::vector<Span>& sentences, size_t pos) {
  for (size_t i = 0; i < sentences.size(); ++i) {
    if (pos >= sentences[i].begin && pos < sentences[i].end) return i;
  }
  return static_cast<size_t>(-1);
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  size_t start = 0;
  for (size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == sep) {
      out.emplace_back(s.substr(start, i - start));
      start = i + 1;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// SHA-256 (FIPS 180-4), self-contained so reports need no crypto dependency.

namespace {

constexpr std::array<uint32_t, 64> kSha256K = {
    0x428a2f98, 0x71374491, 0xb5c0fbcf, 0xe9b5dba5, 0x3956c25b, 0x59f111f1, 0x923f82a4,
    0xab1c5ed5, 0xd807aa98, 0x12835b01, 0x243185be, 0x550c7dc3, 0x72be5d74, 0x80deb1fe,
    0x9bdc06a7, 0xc19bf174, 0xe49b69c1, 0xefbe4786, 0x0fc19dc6, 0x240ca1cc, 0x2de92c6f,
    0x4a7484aa, 0x5cb0a9dc, 0x76f988da, 0x983e5152, 0xa831c66d, 0xb00327c8, 0xbf597fc7,
    0xc6e00bf3, 0xd5a79147, 0x06ca6351, 0x14292967, 0x27b70a85, 0x2e1b2138, 0x4d2c6dfc,
    0x53380d13, 0x650a7354, 0x766a0abb, 0x81c2c92e, 0x92722c85, 0xa2bfe8a1, 0xa81a664b,
    0xc24b8b70, 0xc76c51a3, 0xd192e819, 0xd6990624, 0xf40e3585, 0x106aa070, 0x19a4c116,
    0x1e376c08, 0x2748774c, 0x34b0bcb5, 0x391c0cb3, 0x4ed8aa4a, 0x5b9cca4f, 0x682e6ff3,
    0x748f82ee, 0x78a5636f, 0x84c87814, 0x8cc70208, 0x90befffa, 0xa4506ceb, 0xbef9a3f7,
    0xc67178f2};

uint32_t rotr(uint32_t x, uint32_t n) { return (x >> n) | (x << (32 - n)); }

}  // namespace

std::string sha256_hex(std::string_view bytes) {
  std::array<uint32_t, 8> h = {0x6a09e667, 0xbb67ae85, 0x3c6ef372, 0xa54ff53a,
                               0x510e527f, 0x9b05688c, 0x1f83d9ab, 0x5be0cd19};
  std::string msg(bytes);
  uint64_t bit_len = static_cast<uint64_t>(msg.size()) * 8;
  msg.push_back(static_cast<char>(0x80));
  while (msg.size() % 64 != 56) msg.push_back('\0');
  for (int i = 7; i >= 0; --i) msg.push_back(static_cast<char>((bit_len >> (8 * i)) & 0xff));

  for (size_t block = 0; block < msg.size(); block += 64) {
    std::array<uint32_t, 64> w{};
    for (int t = 0; t < 16; ++t) {
      w[t] = (static_cast<uint32_t>(static_cast<unsigned char>(msg[block + 4 * t])) << 24) |
             (static_cast<uint32_t>(static_cast<unsigned char>(msg[block + 4 * t + 1])) << 16) |
             (static_cast<uint32_t>(static_cast<unsigned char>(msg[block + 4 * t + 2])) << 8) |
             static_cast<uint32_t>(static_cast<unsigned char>(msg[block + 4 * t + 3]));
    }
    for (int t = 16; t < 64; ++t) {
      uint32_t s0 = rotr(w[t - 15], 7) ^ rotr(w[t - 15], 18) ^ (w[t - 15] >> 3);
      uint32_t s1 = rotr(w[t - 2], 17) ^ rotr(w[t - 2], 19) ^ (w[t - 2] >> 10);
      w[t] = w[t - 16] + s0 + w[t - 7] + s1;
    }
    uint32_t a = h[0], b = h[1], c = h[2], d = h[3], e = h[4], f = h[5], g = h[6], hh = h[7];
    for (int t = 0; t < 64; ++t) {
      uint32_t s1 = rotr(e, 6) ^ rotr(e, 11) ^ rotr(e, 25);
      uint32_t ch = (e & f) ^ (~e & g);
      uint32_t temp1 = hh + s1 + ch + kSha256K[t] + w[t];
      uint32_t s0 = rotr(a, 2) ^ rotr(a, 13) ^ rotr(a, 22);
      uint32_t maj = (a & b) ^ (a & c) ^ (b & c);
      uint32_t temp2 = s0 + maj;
      hh = g;
      g = f;
      f = e;
      e = d + temp1;
      d = c;
      c = b;
      b = a;
      a = temp1 + temp2;
    }
    h[0] += a;
    h[1] += b;
    h[2] += c;
    h[3] += d;
    h[4] += e;
    h[5] += f;
    h[6] += g;
    h[7] += hh;
  }

  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(64);
  for (uint32_t v : h) {
    for (int i = 7; i >= 0; --i) out.push_back(hex[(v >> (4 * i)) & 0xf]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Minimal list-literal parser for standard_answer_range strings.

namespace {

struct Cursor {
  std::string_view s;
  size_t i = 0;
  void skip_ws() {
    while (i < s.size() && is_space(s[i])) ++i;
  }
  bool eat(char c) {
    skip_ws();
    if (i < s.size() && s[i] == c) {
      ++i;
      return true;
    }
    return false;
  }
  bool peek(char c) {
    skip_ws();
    return i < s.size() && s[i] == c;
  }
};

std::optional<std::string> parse_string(Cursor& cur) {
  cur.skip_ws();
  if (cur.i >= cur.s.size()) return std::nullopt;
  char quote = cur.s[cur.i];
  if (quote != '\'' && quote != '"') return std::nullopt;
  ++cur.i;
  std::string out;
  while (cur.i < cur.s.size()) {
    char c = cur.s[cur.i];
    if (c == '\\' && cur.i + 1 < cur.s.size()) {
      char n = cur.s[cur.i + 1];
      switch (n) {
        case 'n': out.push_back('\n'); break;
        case 't': out.push_back('\t'); break;
        case 'r': out.push_back('\r'); break;
        case '\\': out.push_back('\\'); break;
        case '\'': out.push_back('\''); break;
        case '"': out.push_back('"'); break;
        default:
          out.push_back('\\');
          out.push_back(n);
          break;
      }
      cur.i += 2;
      continue;
    }
    if (c == quote) {
      ++cur.i;
      return out;
    }
    out.push_back(c);
    ++cur.i;
  }
  return std::nullopt;  // unterminated
}

}  // namespace

std::optional<ParsedList> parse_list_literal(std::string_view text) {
  Cursor cur{text};
  if (!cur.eat('[')) return std::nullopt;
  ParsedList result;
  bool first = true;
  bool shape_known = false;
  while (true) {
    cur.skip_ws();
    if (cur.peek(']')) {
      cur.eat(']');
      break;
    }
    if (!first && !cur.eat(',')) return std::nullopt;
    cur.skip_ws();
    if (cur.peek(']')) {  // trailing comma
      cur.eat(']');
      break;
    }
    if (cur.peek('[')) {
      if (shape_known && !result.nested) return std::nullopt;
      result.nested = true;
      shape_known = true;
      cur.eat('[');
      auto letter = parse_string(cur);
      if (!letter || !cur.eat(',')) return std::nullopt;
      auto content = parse_string(cur);
      if (!content || !cur.eat(']')) return std::nullopt;
      result.pairs.emplace_back(std::move(*letter), std::move(*content));
    } else {
      if (shape_known && result.nested) return std::nullopt;
      shape_known = true;
      auto item = parse_string(cur);
      if (!item) return std::nullopt;
      result.flat.push_back(std::move(*item));
    }
    first = false;
  }
  cur.skip_ws();
  if (cur.i != text.size()) return std::nullopt;
  return result;
}

namespace {

std::string quote_single(const std::string& s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\\' || c == '\'') out.push_back('\\');
    out.push_back(c);
  }
  out.push_back('\'');
  return out;
}

}  // namespace

std::string render_flat_list(const std::vector<std::string>& items) {
  std::string out = "[";
  for (size_t i = 0; i < items.size(); ++i) {
    if (i) out += ", ";
    out += quote_single(items[i]);
  }
  out += "]";
  return out;
}

std::string render_pair_list(
    const std::vector<std::pair<std::string, std::string>>& pairs) {
  std::string out = "[";
  for (size_t i = 0; i < pairs.size(); ++i) {
    if (i) out += ", ";
    out += "[";
    out += quote_single(pairs[i].first);
    out += ", ";
    out += quote_single(pairs[i].second);
    out += "]";
  }
  out += "]";
  return out;
}

}  // namespace keyfind::util
