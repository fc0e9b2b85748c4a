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

#ifndef RLK_TEXTPROC_H_
#define RLK_TEXTPROC_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rlk/tokenizer.h"

namespace rlk {

// Half-open byte range into a source string.
struct CharRange {
  std::size_t begin = 0;
  std::size_t end = 0;

  bool operator==(const CharRange&) const = default;
};

struct Sentence {
  std::size_t index = 0;
  std::string text;
  CharRange range;

  bool operator==(const Sentence&) const = default;
};

// Sentences of a passage with consecutive 0-based indices. Ranges are
// ordered, disjoint, and cover every non-whitespace byte of the passage.
struct SentenceList {
  std::vector<Sentence> sentences;

  std::size_t size() const { return sentences.size(); }
  bool empty() const { return sentences.empty(); }
  const Sentence& operator[](std::size_t i) const { return sentences[i]; }
  std::vector<std::string> texts() const;
};

// Rule-based splitter: a sentence ends after a run of . ! ? (plus closing
// quotes and brackets) followed by whitespace or end of input, unless the
// word before the period is a known abbreviation. Throws ValidationError on
// a passage with no non-whitespace content.
SentenceList split_sentences(std::string_view passage);

// True if `word` (case-insensitive, without the trailing period) is on the
// abbreviation guard list.
bool is_abbreviation(std::string_view word);

// "S1:", "S2:", ... for 0-based index 0, 1, ...
std::string sentence_mark(std::size_t index);

// Passage rendered with each sentence prefixed by its mark, sentences joined
// by a single space: "S1:A. S2:B."
struct MarkedPassage {
  SentenceList source;
  std::vector<std::string> marked_sentences;
  std::string rendered;
};

MarkedPassage mark_sentences(const SentenceList& sentences);

// Inverse of the rendering: splits at the sequential marks S1:, S2:, ... and
// returns the sentence texts.
std::vector<std::string> strip_marks(std::string_view rendered);

// Sentences packed greedily into at most `segment_count` segments. Each
// entry of `segments` is question_prefix + body and fits the token budget.
struct FidSegments {
  std::vector<std::string> segments;
  std::vector<std::string> bodies;
  // 0-based sentence indices carried by each segment.
  std::vector<std::vector<std::size_t>> sentence_ids;
  std::size_t segment_count = 1;
  std::size_t max_tokens_per_segment = 0;
  std::string question_prefix;
  // Set iff any passage content was dropped (overflow or a sentence
  // truncated to fit alone).
  bool truncated = false;
};

FidSegments build_fid_segments(std::string_view question_prefix,
                               const MarkedPassage& marked,
                               const Tokenizer& tokenizer,
                               std::size_t max_tokens,
                               std::size_t segment_count);

// Same packing over unmarked sentence texts.
FidSegments build_fid_segments(std::string_view question_prefix,
                               const SentenceList& sentences,
                               const Tokenizer& tokenizer,
                               std::size_t max_tokens,
                               std::size_t segment_count);

struct ResolvedRationale {
  std::string text;
  // Sorted, unique, 0-based.
  std::vector<std::size_t> indices;
  std::size_t dropped = 0;
};

// Maps 1-based generated indices onto the passage. Duplicates collapse;
// indices outside [1, n] are dropped and counted.
ResolvedRationale resolve_indices(const MarkedPassage& marked,
                                  std::span<const std::uint64_t> generated);

// Every "S<digits>" token in `text` (not preceded by a letter, digit or
// underscore), as 1-based indices, deduplicated and ascending. Values too
// large to represent saturate at UINT64_MAX.
std::vector<std::uint64_t> parse_marks(std::string_view text);

// Byte offset of the first token parse_marks would accept, or npos.
std::size_t find_first_mark(std::string_view text);

// "S1 S3" for 0-based {0, 2}.
std::string render_mark_target(std::span<const std::size_t> indices);

// Texts of the given sentences in passage order, joined by single spaces.
std::string join_sentences(const SentenceList& sentences,
                           std::span<const std::size_t> indices);

}  // namespace rlk

#endif  // RLK_TEXTPROC_H_
