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

#include "keyfind/sentence.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "keyfind/matcher.hpp"
#include "keyfind/util.hpp"
#include "json.hpp"

namespace keyfind {

namespace {

bool is_digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }

struct TemplateParts {
  std::string prefix;
  std::string suffix;
};

TemplateParts split_template(const std::string& tmpl) {
  size_t pos = tmpl.find(kFinalAnswerSlot);
  if (pos == std::string::npos)
    throw std::runtime_error("wrapper template has no <final answer> slot: " + tmpl);
  if (tmpl.find(kFinalAnswerSlot, pos + 1) != std::string::npos)
    throw std::runtime_error("wrapper template has more than one slot: " + tmpl);
  return {tmpl.substr(0, pos), tmpl.substr(pos + kFinalAnswerSlot.size())};
}

struct TextMatch {
  size_t begin = 0;
  size_t end = 0;
  std::string canonical;
};

bool overlaps(size_t b1, size_t e1, size_t b2, size_t e2) { return b1 < e2 && b2 < e1; }

// Bare single letters are accepted only in answer-like positions: preceded
// by ':', '(' or '[', or followed by closing punctuation or end of text.
// This keeps the article in "A dog barks" from resolving to option A.
bool bare_letter_anchored(std::string_view text, size_t begin, size_t end) {
  size_t p = begin;
  while (p > 0 && text[p - 1] == ' ') --p;
  if (p > 0) {
    char prev = text[p - 1];
    if (prev == ':' || prev == '(' || prev == '[') return true;
  }
  size_t n = end;
  while (n < text.size() && text[n] == ' ') ++n;
  if (n >= text.size()) return true;
  char next = text[n];
  return next == '.' || next == ',' || next == ')' || next == ']' || next == ';' ||
         next == '!' || next == '?' || next == ':' || next == '\n' || next == '"' ||
         next == '\'';
}

bool is_bare_letter_form(const std::string& form) {
  return form.size() == 1 && form[0] >= 'A' && form[0] <= 'Z';
}

// All occurrences of one surface form, word bounded. Bare letters match
// case-sensitively and must be anchored; everything else is case-insensitive.
void collect_form_matches(std::string_view text, const std::string& form,
                          const std::string& canonical, std::vector<TextMatch>& out) {
  if (form.empty()) return;
  const bool bare = is_bare_letter_form(form);
  size_t from = 0;
  while (from < text.size()) {
    size_t pos = bare ? text.find(form, from) : util::ifind(text, form, from);
    if (pos == std::string_view::npos) break;
    size_t end = pos + form.size();
    if (util::at_word_boundary(text, pos, end) &&
        (!bare || bare_letter_anchored(text, pos, end))) {
      out.push_back({pos, end, canonical});
    }
    from = pos + 1;
  }
}

std::vector<TextMatch> collect_synonym_matches(std::string_view text,
                                               const SynonymMap& synonyms) {
  std::vector<TextMatch> matches;
  for (const auto& entry : synonyms.options) {
    for (const auto& form : entry.forms) {
      collect_form_matches(text, form, entry.canonical, matches);
    }
  }
  // Longest match wins where spans collide ("fast food" beats "food",
  // "Option A" beats its inner "A").
  std::sort(matches.begin(), matches.end(), [](const TextMatch& a, const TextMatch& b) {
    if (a.begin != b.begin) return a.begin < b.begin;
    return (a.end - a.begin) > (b.end - b.begin);
  });
  std::vector<TextMatch> kept;
  for (const auto& m : matches) {
    bool clash = false;
    for (const auto& k : kept) {
      if (overlaps(m.begin, m.end, k.begin, k.end)) {
        clash = true;
        break;
      }
    }
    if (!clash) kept.push_back(m);
  }
  return kept;
}

// --------------------------------------------------------------------------
// Math tokens: numbers (optionally $-prefixed, with commas and decimals) and
// LaTeX fragments. Spans are scanned left to right.

struct TokenSpan {
  size_t begin = 0;
  size_t end = 0;
};

size_t scan_number_end(std::string_view text, size_t i) {
  size_t j = i;
  if (j < text.size() && text[j] == '$') ++j;
  if (j < text.size() && text[j] == '-') ++j;
  if (j >= text.size() || !is_digit(text[j])) return i;  // no digits: not a number
  while (j < text.size()) {
    char c = text[j];
    if (is_digit(c)) {
      ++j;
    } else if ((c == ',' || c == '.') && j + 1 < text.size() && is_digit(text[j + 1])) {
      ++j;
    } else {
      break;
    }
  }
  return j;
}

size_t scan_latex_end(std::string_view text, size_t i) {
  size_t j = i + 1;  // past '\'
  while (j < text.size() && std::isalpha(static_cast<unsigned char>(text[j]))) ++j;
  int depth = 0;
  while (j < text.size()) {
    char c = text[j];
    if (c == '{') {
      ++depth;
    } else if (c == '}') {
      if (depth == 0) break;
      --depth;
    } else if (depth == 0 && (std::isspace(static_cast<unsigned char>(c)) || c == ',' ||
                              c == '$')) {
      break;
    }
    ++j;
  }
  return j;
}

std::vector<TokenSpan> scan_math_tokens(std::string_view text, size_t begin, size_t end) {
  std::vector<TokenSpan> tokens;
  size_t i = begin;
  while (i < end) {
    char c = text[i];
    if (c == '\\') {
      size_t j = std::min(scan_latex_end(text, i), end);
      if (j > i + 1) tokens.push_back({i, j});
      i = j > i ? j : i + 1;
      continue;
    }
    if (c == '$' && i + 1 < end && text[i + 1] == '\\') {
      // Inline math "$...$": keep the delimiters with the expression.
      size_t close = text.find('$', i + 1);
      if (close != std::string_view::npos && close < end) {
        tokens.push_back({i, close + 1});
        i = close + 1;
        continue;
      }
    }
    if (is_digit(c) || ((c == '$' || c == '-') && scan_number_end(text, i) > i)) {
      if (i > begin && util::is_word_char(text[i - 1])) {
        ++i;  // glued to a word, e.g. "v2"
        continue;
      }
      size_t j = std::min(scan_number_end(text, i), end);
      if (j > i) {
        tokens.push_back({i, j});
        i = j;
        continue;
      }
    }
    ++i;
  }
  return tokens;
}

// --------------------------------------------------------------------------
// Wrapper matching.

struct WrapperHit {
  size_t template_index = 0;
  size_t begin = 0;
  size_t end = 0;
  size_t slot_begin = 0;
  size_t slot_end = 0;
};

bool valid_suffix_at(std::string_view text, size_t pos, const std::string& suffix) {
  if (suffix[0] == '.') {
    // Skip decimal points so "The answer is 3.5." captures the full number.
    if (pos > 0 && pos + 1 < text.size() && is_digit(text[pos - 1]) && is_digit(text[pos + 1]))
      return false;
  }
  return true;
}

size_t sentence_end_after(std::string_view text, size_t pos) {
  auto sentences = util::split_sentences(text);
  for (const auto& s : sentences) {
    if (pos >= s.begin && pos < s.end) {
      size_t e = s.end;
      while (e > pos && (text[e - 1] == '.' || text[e - 1] == '!' || text[e - 1] == '?' ||
                         std::isspace(static_cast<unsigned char>(text[e - 1]))))
        --e;
      return e;
    }
  }
  return text.size();
}

std::vector<WrapperHit> collect_wrapper_hits(std::string_view text,
                                             const WrapperPatternSet& wrappers) {
  std::vector<WrapperHit> hits;
  for (size_t t = 0; t < wrappers.templates.size(); ++t) {
    TemplateParts parts = split_template(wrappers.templates[t]);
    if (parts.prefix.empty()) continue;  // slot-initial templates are not searchable
    size_t from = 0;
    while (from < text.size()) {
      size_t pos = util::ifind(text, parts.prefix, from);
      if (pos == std::string_view::npos) break;
      from = pos + 1;
      if (!util::at_word_boundary(text, pos, pos + parts.prefix.size())) continue;
      size_t slot_begin = pos + parts.prefix.size();
      size_t slot_end;
      size_t match_end;
      if (parts.suffix.empty()) {
        slot_end = sentence_end_after(text, slot_begin);
        match_end = slot_end;
      } else {
        size_t s = slot_begin;
        size_t found = std::string_view::npos;
        while (s < text.size()) {
          size_t cand = util::ifind(text, parts.suffix, s);
          if (cand == std::string_view::npos) break;
          if (valid_suffix_at(text, cand, parts.suffix)) {
            found = cand;
            break;
          }
          s = cand + 1;
        }
        if (found == std::string_view::npos) continue;
        slot_end = found;
        match_end = found + parts.suffix.size();
      }
      while (slot_begin < slot_end &&
             std::isspace(static_cast<unsigned char>(text[slot_begin])))
        ++slot_begin;
      while (slot_end > slot_begin &&
             std::isspace(static_cast<unsigned char>(text[slot_end - 1])))
        --slot_end;
      if (slot_begin >= slot_end) continue;
      bool clash = false;
      for (const auto& h : hits) {
        if (overlaps(pos, match_end, h.begin, h.end)) {
          clash = true;
          break;
        }
      }
      if (!clash) hits.push_back({t, pos, match_end, slot_begin, slot_end});
    }
  }
  std::sort(hits.begin(), hits.end(),
            [](const WrapperHit& a, const WrapperHit& b) { return a.begin < b.begin; });
  return hits;
}

// Resolves a wrapper slot to a single option (or math token); empty when the
// slot mentions no option or several different ones.
std::string resolve_slot(std::string_view text, size_t begin, size_t end,
                         const EvalItem& item, const SynonymMap& synonyms) {
  if (item.task_type == TaskType::kMath) {
    auto tokens = scan_math_tokens(text, begin, end);
    if (tokens.empty()) return {};
    const TokenSpan& last = tokens.back();
    return normalize(text.substr(last.begin, last.end - last.begin), TaskType::kMath);
  }
  std::vector<TextMatch> matches;
  for (const auto& entry : synonyms.options) {
    for (const auto& form : entry.forms) {
      std::vector<TextMatch> local;
      collect_form_matches(text.substr(0, end), form, entry.canonical, local);
      for (const auto& m : local) {
        if (m.begin >= begin) matches.push_back(m);
      }
    }
  }
  std::set<std::string> distinct;
  for (const auto& m : matches) distinct.insert(m.canonical);
  if (distinct.size() == 1) return *distinct.begin();
  return {};
}

std::vector<std::string> default_wrapper_templates() {
  return {
      "The answer is <final answer>.",
      "The answer is <final answer>",
      "The final answer is <final answer>.",
      "The final answer is <final answer>",
      "The correct answer is <final answer>.",
      "The correct answer is <final answer>",
      "The answer would be <final answer>.",
      "The answer would be <final answer>",
      "Based on the context of the question, <final answer> is the most likely answer.",
  };
}

}  // namespace

const SentenceRules& SentenceRules::defaults() {
  static const SentenceRules rules = [] {
    SentenceRules r;
    r.wrappers.templates = default_wrapper_templates();
    r.cot_markers = {"let's think step by step", "think step by step", "step by step",
                     "let's calculate", "let us calculate"};
    r.conclusion_connectives = {"so",    "therefore", "thus",         "hence",
                                "finally", "overall",  "in conclusion", "consequently"};
    r.validate();
    return r;
  }();
  return rules;
}

SentenceRules SentenceRules::from_json_text(std::string_view text) {
  nlohmann::json j = nlohmann::json::parse(text);
  SentenceRules r = defaults();
  if (j.contains("wrappers")) r.wrappers.templates = j["wrappers"].get<std::vector<std::string>>();
  if (j.contains("cot_markers")) r.cot_markers = j["cot_markers"].get<std::vector<std::string>>();
  if (j.contains("conclusion_connectives"))
    r.conclusion_connectives = j["conclusion_connectives"].get<std::vector<std::string>>();
  if (j.contains("synonyms")) {
    r.static_synonyms.clear();
    for (auto it = j["synonyms"].begin(); it != j["synonyms"].end(); ++it) {
      r.static_synonyms[it.key()] = it.value().get<std::vector<std::string>>();
    }
  }
  if (j.contains("restatements")) {
    r.restatements.rules.clear();
    for (const auto& entry : j["restatements"]) {
      r.restatements.rules.push_back(
          {entry.at("question").get<std::string>(), entry.at("template").get<std::string>()});
    }
  }
  r.validate();
  return r;
}

SentenceRules SentenceRules::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read sentence rules: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return from_json_text(buf.str());
}

void SentenceRules::validate() const {
  std::set<std::string> seen;
  for (const auto& tmpl : wrappers.templates) {
    split_template(tmpl);  // throws on slot-count problems
    if (!seen.insert(tmpl).second)
      throw std::runtime_error("duplicate wrapper template: " + tmpl);
  }
  for (const auto& rule : restatements.rules) split_template(rule.declarative_template);
}

SynonymMap make_synonym_map(
    const EvalItem& item,
    const std::map<std::string, std::vector<std::string>>& static_synonyms) {
  static const char* kOrdinals[] = {"first", "second", "third",   "fourth", "fifth",
                                    "sixth", "seventh", "eighth", "ninth",  "tenth"};
  SynonymMap map;
  const AnswerRange& range = item.answer_range;
  if (range.is_pairs()) {
    size_t index = 0;
    for (const auto& option : range.pair_list()) {
      SynonymEntry entry;
      entry.canonical = option.letter;
      entry.forms.push_back(option.letter);
      entry.forms.push_back("(" + option.letter + ")");
      entry.forms.push_back(option.letter + ")");
      entry.forms.push_back(option.letter + ".");
      entry.forms.push_back("option " + option.letter);
      entry.forms.push_back("choice " + option.letter);
      if (index < std::size(kOrdinals)) {
        entry.forms.push_back(std::string("the ") + kOrdinals[index] + " option");
        entry.forms.push_back(std::string(kOrdinals[index]) + " option");
      }
      std::string content = util::trim(option.content);
      while (!content.empty() && content.back() == '.') content.pop_back();
      if (!content.empty()) entry.forms.push_back(content);
      map.options.push_back(std::move(entry));
      ++index;
    }
  } else if (range.is_flat()) {
    for (const auto& candidate : range.flat_list()) {
      SynonymEntry entry;
      entry.canonical = candidate;
      entry.forms.push_back(util::trim(candidate));
      map.options.push_back(std::move(entry));
    }
  }
  for (auto& entry : map.options) {
    auto it = static_synonyms.find(entry.canonical);
    if (it != static_synonyms.end()) {
      entry.forms.insert(entry.forms.end(), it->second.begin(), it->second.end());
    }
  }
  // Disjointness: a surface form claimed by two options identifies neither.
  std::map<std::string, int> owners;
  for (const auto& entry : map.options) {
    std::set<std::string> folded;
    for (const auto& form : entry.forms) folded.insert(util::to_lower(util::collapse_whitespace(form)));
    for (const auto& f : folded) ++owners[f];
  }
  for (auto& entry : map.options) {
    std::erase_if(entry.forms, [&](const std::string& form) {
      return owners[util::to_lower(util::collapse_whitespace(form))] > 1;
    });
  }
  return map;
}

std::vector<SynonymMatch> find_option_mentions(std::string_view text,
                                               const SynonymMap& synonyms) {
  std::vector<SynonymMatch> out;
  for (const auto& m : collect_synonym_matches(text, synonyms)) {
    out.push_back({m.begin, m.end, m.canonical});
  }
  return out;
}

std::vector<KeySentence> find_candidates(const EvalItem& item,
                                         const ModelResponse& response,
                                         const SynonymMap& synonyms,
                                         const WrapperPatternSet& wrappers,
                                         const RestatementRules& restatements) {
  std::string_view text = response.text;
  std::vector<KeySentence> out;
  if (util::trim(text).empty()) return out;

  // S2: prompt-wrapped sentences, then S3 from matching restatement rules.
  std::vector<WrapperHit> hits = collect_wrapper_hits(text, wrappers);
  std::vector<std::pair<WrapperHit, CandidateKind>> wrapped;
  for (const auto& h : hits) wrapped.emplace_back(h, CandidateKind::kPromptWrapped);
  WrapperPatternSet restatement_templates;
  for (const auto& rule : restatements.rules) {
    if (item.question.find(rule.question_part) != std::string::npos)
      restatement_templates.templates.push_back(rule.declarative_template);
  }
  if (!restatement_templates.templates.empty()) {
    for (const auto& h : collect_wrapper_hits(text, restatement_templates)) {
      bool clash = false;
      for (const auto& [existing, kind] : wrapped) {
        if (overlaps(h.begin, h.end, existing.begin, existing.end)) {
          clash = true;
          break;
        }
      }
      if (!clash) wrapped.emplace_back(h, CandidateKind::kQuestionWrapped);
    }
  }

  std::vector<KeySentence> resolved_wrapped;
  for (const auto& [hit, kind] : wrapped) {
    std::string canonical = resolve_slot(text, hit.slot_begin, hit.slot_end, item, synonyms);
    if (!canonical.empty()) resolved_wrapped.push_back({hit.begin, hit.end, kind, canonical});
  }

  auto inside_wrapped = [&](size_t begin, size_t end) {
    for (const auto& w : resolved_wrapped) {
      if (overlaps(begin, end, w.begin, w.end)) return true;
    }
    return false;
  };

  // S1: direct option mentions (synonym matches) outside wrapped spans.
  if (item.task_type != TaskType::kMath) {
    for (const auto& m : collect_synonym_matches(text, synonyms)) {
      if (!inside_wrapped(m.begin, m.end)) {
        out.push_back({m.begin, m.end, CandidateKind::kDirect, m.canonical});
      }
    }
  } else {
    // Direct math candidates: equation results, the first token of a
    // concluding sentence, and a sentence that is nothing but one token.
    std::vector<TokenSpan> spans;
    for (size_t i = 0; i + 1 < text.size(); ++i) {
      if (text[i] != '=') continue;
      size_t l = i;
      while (l > 0 && (text[l - 1] == ' ' || text[l - 1] == '$')) --l;
      if (l == 0 || !is_digit(text[l - 1])) continue;
      size_t r = i + 1;
      while (r < text.size() && (text[r] == ' ' || text[r] == '$')) ++r;
      if (r >= text.size() || !(is_digit(text[r]) || text[r] == '-' || text[r] == '\\'))
        continue;
      auto tokens = scan_math_tokens(text, r, text.size());
      if (!tokens.empty() && tokens.front().begin == r) spans.push_back(tokens.front());
    }
    auto sentences = util::split_sentences(text);
    const SentenceRules& rules = SentenceRules::defaults();
    for (size_t si = 0; si < sentences.size(); ++si) {
      std::string_view sent = text.substr(sentences[si].begin,
                                          sentences[si].end - sentences[si].begin);
      std::string first_word;
      for (char c : sent) {
        if (std::isalpha(static_cast<unsigned char>(c))) {
          first_word.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        } else if (!first_word.empty()) {
          break;
        }
      }
      bool concluding = std::find(rules.conclusion_connectives.begin(),
                                  rules.conclusion_connectives.end(),
                                  first_word) != rules.conclusion_connectives.end() ||
                        util::ifind(sent, "answer") != std::string_view::npos;
      auto tokens = scan_math_tokens(text, sentences[si].begin, sentences[si].end);
      if (concluding && !tokens.empty()) spans.push_back(tokens.front());
      if (tokens.size() == 1) {
        bool only_token = true;
        for (size_t p = sentences[si].begin; p < sentences[si].end; ++p) {
          if (p >= tokens.front().begin && p < tokens.front().end) continue;
          char c = text[p];
          if (!std::isspace(static_cast<unsigned char>(c)) && c != '.' && c != '!' &&
              c != '?' && c != '$' && c != '=') {
            only_token = false;
            break;
          }
        }
        if (only_token) spans.push_back(tokens.front());
      }
    }
    std::sort(spans.begin(), spans.end(),
              [](const TokenSpan& a, const TokenSpan& b) { return a.begin < b.begin; });
    spans.erase(std::unique(spans.begin(), spans.end(),
                            [](const TokenSpan& a, const TokenSpan& b) {
                              return a.begin == b.begin && a.end == b.end;
                            }),
                spans.end());
    for (const auto& s : spans) {
      if (inside_wrapped(s.begin, s.end)) continue;
      std::string token = normalize(text.substr(s.begin, s.end - s.begin), TaskType::kMath);
      if (!token.empty()) out.push_back({s.begin, s.end, CandidateKind::kDirect, token});
    }
  }

  out.insert(out.end(), resolved_wrapped.begin(), resolved_wrapped.end());
  std::sort(out.begin(), out.end(), [](const KeySentence& a, const KeySentence& b) {
    if (a.begin != b.begin) return a.begin < b.begin;
    return a.end < b.end;
  });
  return out;
}

bool detect_cot(const ModelResponse& response, const SentenceRules& rules) {
  std::string_view text = response.text;
  std::string lowered = util::to_lower(text);
  for (const auto& marker : rules.cot_markers) {
    if (lowered.find(util::to_lower(marker)) != std::string::npos) return true;
  }

  // Arithmetic chain: "=" with digits on both sides.
  for (size_t i = 0; i < text.size(); ++i) {
    if (text[i] != '=') continue;
    size_t l = i;
    while (l > 0 && (text[l - 1] == ' ' || text[l - 1] == '$')) --l;
    size_t r = i + 1;
    while (r < text.size() && (text[r] == ' ' || text[r] == '$')) ++r;
    if (l > 0 && is_digit(text[l - 1]) && r < text.size() && is_digit(text[r])) return true;
  }

  auto sentences = util::split_sentences(text);
  int enumerated = 0;
  for (size_t si = 0; si < sentences.size(); ++si) {
    std::string sent = util::trim(text.substr(sentences[si].begin,
                                              sentences[si].end - sentences[si].begin));
    if (sent.empty()) continue;
    size_t d = 0;
    while (d < sent.size() && is_digit(sent[d])) ++d;
    if (d > 0 && d < sent.size() && (sent[d] == '.' || sent[d] == ')' || sent[d] == ':'))
      ++enumerated;
    if (util::ifind(sent, "step ") == 0) ++enumerated;

    if (si > 0) {
      std::string first_word;
      for (char c : sent) {
        if (std::isalpha(static_cast<unsigned char>(c))) {
          first_word.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        } else if (!first_word.empty()) {
          break;
        }
      }
      if (std::find(rules.conclusion_connectives.begin(), rules.conclusion_connectives.end(),
                    first_word) != rules.conclusion_connectives.end()) {
        return true;
      }
    }
  }
  return enumerated >= 2;
}

Resolution resolve_detailed(const EvalItem& item,
                            const std::vector<KeySentence>& candidates, bool cot) {
  (void)item;
  if (candidates.empty()) return {ExtractedKey::no_valid_answer(), nullptr};
  bool all_same = std::all_of(candidates.begin(), candidates.end(), [&](const KeySentence& c) {
    return c.resolved == candidates.front().resolved;
  });
  if (all_same) return {ExtractedKey::key(candidates.front().resolved), &candidates.front()};
  if (!cot) return {ExtractedKey::no_valid_answer(), nullptr};
  const KeySentence& last = candidates.back();
  return {ExtractedKey::key(last.resolved), &last};
}

ExtractedKey resolve(const EvalItem& item, const std::vector<KeySentence>& candidates,
                     bool cot) {
  return resolve_detailed(item, candidates, cot).key;
}

std::optional<WrapperMatch> find_wrapper_match(std::string_view text,
                                               const WrapperPatternSet& wrappers) {
  auto hits = collect_wrapper_hits(text, wrappers);
  if (hits.empty()) return std::nullopt;
  const WrapperHit& h = hits.front();
  return WrapperMatch{h.template_index, h.begin, h.end, h.slot_begin, h.slot_end};
}

}  // namespace keyfind
