// Copyright 2026 The RLK Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "rlk/textproc.h"

#include <algorithm>
#include <cctype>
#include <limits>

#include "rlk/errors.h"

namespace rlk {

namespace {

constexpr std::string_view kAbbreviations[] = {
    "mr",  "mrs", "ms",  "dr",  "prof", "sr",   "jr",     "st",   "vs",
    "e.g", "i.e", "a.m", "p.m", "inc",  "ltd",  "corp",   "fig",  "al",
    "approx", "dept", "mt", "rev", "gen", "col", "lt", "sgt", "u.s", "u.k"};

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)); }

bool is_terminator(char c) { return c == '.' || c == '!' || c == '?'; }

bool is_closer(char c) {
  return c == '"' || c == '\'' || c == ')' || c == ']' || c == '}';
}

bool is_word_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

// The whitespace-delimited word ending right before `period`, with leading
// opening punctuation removed.
std::string_view word_before(std::string_view text, std::size_t begin,
                             std::size_t period) {
  std::size_t start = period;
  while (start > begin && !is_space(text[start - 1])) --start;
  while (start < period && (text[start] == '(' || text[start] == '"' ||
                            text[start] == '\'' || text[start] == '[')) {
    ++start;
  }
  return text.substr(start, period - start);
}

FidSegments pack_units(std::string_view prefix,
                       const std::vector<std::string>& units,
                       const Tokenizer& tokenizer, std::size_t max_tokens,
                       std::size_t segment_count) {
  if (segment_count < 1) throw ConfigError("segment_count must be >= 1");
  std::string prefix_str(prefix);
  std::size_t prefix_tokens = tokenizer.count(prefix_str);
  if (prefix_tokens + 1 > max_tokens) {
    throw ConfigError("max_tokens " + std::to_string(max_tokens) +
                      " cannot hold the question prefix (" +
                      std::to_string(prefix_tokens) + " tokens)");
  }

  auto fits = [&](const std::string& body) {
    return tokenizer.count(prefix_str + body) <= max_tokens;
  };

  FidSegments out;
  out.segment_count = segment_count;
  out.max_tokens_per_segment = max_tokens;
  out.question_prefix = prefix_str;

  std::size_t next = 0;
  while (next < units.size() && out.bodies.size() < segment_count) {
    std::string body;
    std::vector<std::size_t> ids;
    while (next < units.size()) {
      std::string candidate =
          body.empty() ? units[next] : body + " " + units[next];
      if (fits(candidate)) {
        body = std::move(candidate);
        ids.push_back(next++);
        continue;
      }
      if (body.empty()) {
        // A lone sentence over budget: keep its longest token prefix.
        const std::string& unit = units[next];
        std::vector<Token> tokens = tokenizer.tokenize(unit);
        std::size_t lo = 0, hi = tokens.size();
        while (lo < hi) {
          std::size_t mid = (lo + hi + 1) / 2;
          if (fits(unit.substr(0, tokens[mid - 1].end))) {
            lo = mid;
          } else {
            hi = mid - 1;
          }
        }
        if (lo == 0) {
          throw ConfigError("max_tokens " + std::to_string(max_tokens) +
                            " cannot hold one token of sentence " +
                            std::to_string(next));
        }
        body = unit.substr(0, tokens[lo - 1].end);
        ids.push_back(next++);
        out.truncated = true;
      }
      break;
    }
    out.segments.push_back(prefix_str + body);
    out.bodies.push_back(std::move(body));
    out.sentence_ids.push_back(std::move(ids));
  }
  if (next < units.size()) out.truncated = true;
  return out;
}

}  // namespace

std::vector<std::string> SentenceList::texts() const {
  std::vector<std::string> out;
  out.reserve(sentences.size());
  for (const auto& s : sentences) out.push_back(s.text);
  return out;
}

bool is_abbreviation(std::string_view word) {
  if (word.empty() || word.size() > 8) return false;
  std::string lowered;
  for (char c : word) {
    lowered.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return std::find(std::begin(kAbbreviations), std::end(kAbbreviations),
                   lowered) != std::end(kAbbreviations);
}

SentenceList split_sentences(std::string_view passage) {
  SentenceList out;
  const std::size_t n = passage.size();
  std::size_t i = 0;
  auto skip_space = [&] {
    while (i < n && is_space(passage[i])) ++i;
  };
  skip_space();
  std::size_t start = i;
  while (i < n) {
    if (!is_terminator(passage[i])) {
      ++i;
      continue;
    }
    std::size_t run = i;
    std::size_t j = i;
    while (j < n && is_terminator(passage[j])) ++j;
    while (j < n && is_closer(passage[j])) ++j;
    bool boundary = j == n || is_space(passage[j]);
    if (boundary && passage[run] == '.' && j == run + 1 &&
        is_abbreviation(word_before(passage, start, run))) {
      boundary = false;
    }
    if (!boundary) {
      i = j;
      continue;
    }
    out.sentences.push_back(
        {out.sentences.size(), std::string(passage.substr(start, j - start)),
         {start, j}});
    i = j;
    skip_space();
    start = i;
  }
  if (start < n) {
    std::size_t end = n;
    while (end > start && is_space(passage[end - 1])) --end;
    out.sentences.push_back(
        {out.sentences.size(), std::string(passage.substr(start, end - start)),
         {start, end}});
  }
  if (out.sentences.empty()) {
    throw ValidationError("passage has no content to segment");
  }
  return out;
}

std::string sentence_mark(std::size_t index) {
  return "S" + std::to_string(index + 1) + ":";
}

MarkedPassage mark_sentences(const SentenceList& sentences) {
  MarkedPassage out;
  out.source = sentences;
  for (const auto& s : sentences.sentences) {
    out.marked_sentences.push_back(sentence_mark(s.index) + s.text);
    if (!out.rendered.empty()) out.rendered.push_back(' ');
    out.rendered += out.marked_sentences.back();
  }
  return out;
}

std::vector<std::string> strip_marks(std::string_view rendered) {
  std::vector<std::string> texts;
  if (rendered.empty()) return texts;
  std::string first = sentence_mark(0);
  if (rendered.substr(0, first.size()) != first) {
    throw ValidationError("rendered passage does not start with " + first);
  }
  std::size_t pos = first.size();
  for (std::size_t k = 1;; ++k) {
    std::string next = " " + sentence_mark(k);
    std::size_t found = rendered.find(next, pos);
    if (found == std::string_view::npos) {
      texts.emplace_back(rendered.substr(pos));
      break;
    }
    texts.emplace_back(rendered.substr(pos, found - pos));
    pos = found + next.size();
  }
  return texts;
}

FidSegments build_fid_segments(std::string_view question_prefix,
                               const MarkedPassage& marked,
                               const Tokenizer& tokenizer,
                               std::size_t max_tokens,
                               std::size_t segment_count) {
  return pack_units(question_prefix, marked.marked_sentences, tokenizer,
                    max_tokens, segment_count);
}

FidSegments build_fid_segments(std::string_view question_prefix,
                               const SentenceList& sentences,
                               const Tokenizer& tokenizer,
                               std::size_t max_tokens,
                               std::size_t segment_count) {
  return pack_units(question_prefix, sentences.texts(), tokenizer, max_tokens,
                    segment_count);
}

ResolvedRationale resolve_indices(const MarkedPassage& marked,
                                  std::span<const std::uint64_t> generated) {
  ResolvedRationale out;
  const std::size_t n = marked.source.size();
  for (std::uint64_t index : generated) {
    if (index == 0 || index > n) {
      ++out.dropped;
      continue;
    }
    out.indices.push_back(static_cast<std::size_t>(index - 1));
  }
  std::sort(out.indices.begin(), out.indices.end());
  out.indices.erase(std::unique(out.indices.begin(), out.indices.end()),
                    out.indices.end());
  out.text = join_sentences(marked.source, out.indices);
  return out;
}

namespace {

// Scans for the next mark token at or after `from`. Returns its start and
// end, or npos when there is none.
std::pair<std::size_t, std::size_t> next_mark(std::string_view text,
                                              std::size_t from) {
  for (std::size_t i = from; i < text.size(); ++i) {
    if (text[i] != 'S') continue;
    if (i > 0 && is_word_char(text[i - 1])) continue;
    std::size_t j = i + 1;
    while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) {
      ++j;
    }
    if (j == i + 1) continue;
    if (j < text.size() && (std::isalpha(static_cast<unsigned char>(text[j])) ||
                            text[j] == '_')) {
      continue;
    }
    return {i, j};
  }
  return {std::string_view::npos, std::string_view::npos};
}

}  // namespace

std::vector<std::uint64_t> parse_marks(std::string_view text) {
  constexpr std::uint64_t kMax = std::numeric_limits<std::uint64_t>::max();
  std::vector<std::uint64_t> out;
  std::size_t pos = 0;
  while (true) {
    auto [begin, end] = next_mark(text, pos);
    if (begin == std::string_view::npos) break;
    std::uint64_t value = 0;
    for (std::size_t k = begin + 1; k < end; ++k) {
      auto digit = static_cast<std::uint64_t>(text[k] - '0');
      value = value > (kMax - digit) / 10 ? kMax : value * 10 + digit;
    }
    out.push_back(value);
    pos = end;
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::size_t find_first_mark(std::string_view text) {
  return next_mark(text, 0).first;
}

std::string render_mark_target(std::span<const std::size_t> indices) {
  std::vector<std::size_t> sorted(indices.begin(), indices.end());
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  std::string out;
  for (std::size_t index : sorted) {
    if (!out.empty()) out.push_back(' ');
    out += "S" + std::to_string(index + 1);
  }
  return out;
}

std::string join_sentences(const SentenceList& sentences,
                           std::span<const std::size_t> indices) {
  std::vector<std::size_t> sorted(indices.begin(), indices.end());
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  std::string out;
  for (std::size_t index : sorted) {
    if (index >= sentences.size()) continue;
    if (!out.empty()) out.push_back(' ');
    out += sentences[index].text;
  }
  return out;
}

}  // namespace rlk
