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

#include <fstream>
#include <random>
#include <set>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "rlk/errors.h"
#include "rlk/tokenizer.h"
#include "test_util.h"

namespace rlk {
namespace {

std::vector<std::string> texts_of(std::string_view passage) {
  return split_sentences(passage).texts();
}

TEST(SplitSentences, TwoTerminatedSentences) {
  EXPECT_EQ(texts_of("One. Two."), (std::vector<std::string>{"One.", "Two."}));
}

TEST(SplitSentences, NoTerminatorIsOneSentence) {
  EXPECT_EQ(texts_of("No terminator"),
            (std::vector<std::string>{"No terminator"}));
}

TEST(SplitSentences, EmptyPassageIsAnError) {
  EXPECT_THROW(split_sentences(""), ValidationError);
  EXPECT_THROW(split_sentences(" \n\t "), ValidationError);
}

// Hand-segmented passages exercising the abbreviation guard.
TEST(SplitSentences, GoldenFile) {
  std::ifstream in(RLK_TEST_DATA_DIR "/golden_sentences.jsonl");
  ASSERT_TRUE(in.good());
  std::string line;
  int cases = 0;
  while (std::getline(in, line)) {
    auto doc = nlohmann::json::parse(line);
    EXPECT_EQ(texts_of(doc["passage"].get<std::string>()),
              doc["sentences"].get<std::vector<std::string>>())
        << doc["passage"];
    ++cases;
  }
  EXPECT_EQ(cases, 7);
}

TEST(SplitSentences, RangesCoverNonWhitespaceInOrder) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    std::string passage = testing::random_passage(rng, 1, 10);
    SentenceList list = split_sentences(passage);
    std::vector<bool> covered(passage.size(), false);
    std::size_t last_end = 0;
    for (std::size_t i = 0; i < list.size(); ++i) {
      const Sentence& s = list[i];
      EXPECT_EQ(s.index, i);
      EXPECT_GE(s.range.begin, last_end);
      EXPECT_LT(s.range.begin, s.range.end);
      EXPECT_EQ(s.text, passage.substr(s.range.begin, s.range.end - s.range.begin));
      for (std::size_t k = s.range.begin; k < s.range.end; ++k) covered[k] = true;
      last_end = s.range.end;
    }
    for (std::size_t k = 0; k < passage.size(); ++k) {
      if (!std::isspace(static_cast<unsigned char>(passage[k]))) {
        EXPECT_TRUE(covered[k]) << "byte " << k << " of: " << passage;
      }
    }
  }
}

TEST(MarkSentences, RendersOneBasedMarksWithoutSpace) {
  MarkedPassage m = mark_sentences(split_sentences("A. B."));
  EXPECT_EQ(m.rendered, "S1:A. S2:B.");
  EXPECT_EQ(mark_sentences(split_sentences("X.")).rendered, "S1:X.");
}

TEST(MarkSentences, TwelfthMark) {
  std::string passage;
  for (int i = 0; i < 12; ++i) passage += "Line " + std::to_string(i) + ". ";
  MarkedPassage m = mark_sentences(split_sentences(passage));
  ASSERT_EQ(m.marked_sentences.size(), 12u);
  EXPECT_EQ(m.marked_sentences.back().rfind("S12:", 0), 0u);
}

TEST(MarkSentences, StripThenResegmentIsIdentity) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 300; ++trial) {
    SentenceList list = split_sentences(testing::random_passage(rng, 1, 15));
    MarkedPassage m = mark_sentences(list);
    std::vector<std::string> stripped = strip_marks(m.rendered);
    EXPECT_EQ(stripped, list.texts());
    std::string joined;
    for (const auto& s : stripped) joined += (joined.empty() ? "" : " ") + s;
    EXPECT_EQ(split_sentences(joined).texts(), list.texts());
  }
}

TEST(ResolveIndices, OrderNormalization) {
  MarkedPassage m = mark_sentences(split_sentences("A. B."));
  std::vector<std::uint64_t> idx = {2, 1};
  ResolvedRationale r = resolve_indices(m, idx);
  EXPECT_EQ(r.text, "A. B.");
  EXPECT_EQ(r.indices, (std::vector<std::size_t>{0, 1}));
  EXPECT_EQ(r.dropped, 0u);
}

TEST(ResolveIndices, Empty) {
  MarkedPassage m = mark_sentences(split_sentences("A. B."));
  ResolvedRationale r = resolve_indices(m, {});
  EXPECT_EQ(r.text, "");
  EXPECT_TRUE(r.indices.empty());
}

TEST(ResolveIndices, OutOfRangeDroppedAndCounted) {
  MarkedPassage m = mark_sentences(split_sentences("A. B."));
  std::vector<std::uint64_t> idx = {1, 99};
  ResolvedRationale r = resolve_indices(m, idx);
  EXPECT_EQ(r.text, "A.");
  EXPECT_EQ(r.dropped, 1u);
  std::vector<std::uint64_t> zero = {0, 1, 1};
  r = resolve_indices(m, zero);
  EXPECT_EQ(r.dropped, 1u);
  EXPECT_EQ(r.indices, (std::vector<std::size_t>{0}));
}

TEST(ResolveIndices, TextIsConcatenationOfReturnedSentences) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    SentenceList list = split_sentences(testing::random_passage(rng, 1, 10));
    MarkedPassage m = mark_sentences(list);
    std::vector<std::uint64_t> idx;
    for (int k = 0; k < 5; ++k) idx.push_back(rng() % (list.size() + 3));
    ResolvedRationale r = resolve_indices(m, idx);
    std::string expect;
    for (std::size_t i : r.indices) expect += (expect.empty() ? "" : " ") + list[i].text;
    EXPECT_EQ(r.text, expect);
  }
}

TEST(ParseMarks, FindsMarksAnywhere) {
  EXPECT_EQ(parse_marks("S2"), (std::vector<std::uint64_t>{2}));
  EXPECT_EQ(parse_marks("S3 S1"), (std::vector<std::uint64_t>{1, 3}));
  EXPECT_EQ(parse_marks("The rationale is S1: and S3, S1."),
            (std::vector<std::uint64_t>{1, 3}));
  EXPECT_TRUE(parse_marks("Sometimes Samples S-1 XS2 S2x").empty());
  EXPECT_EQ(parse_marks("S99999999999999999999999")[0], UINT64_MAX);
  EXPECT_EQ(find_first_mark("SUPPORTS S2"), 9u);
}

TEST(RenderMarkTarget, AscendingSpaceSeparated) {
  std::vector<std::size_t> idx = {2, 0};
  EXPECT_EQ(render_mark_target(idx), "S1 S3");
}

// FID packing --------------------------------------------------------------

TEST(FidSegments, ShortPassageFitsOneSegment) {
  BasicTokenizer tok;
  MarkedPassage m = mark_sentences(split_sentences("A cat sat. A dog ran."));
  FidSegments f = build_fid_segments("q: x\npassage: ", m, tok, 512, 1);
  ASSERT_EQ(f.segments.size(), 1u);
  EXPECT_EQ(f.bodies[0], m.rendered);
  EXPECT_EQ(f.segments[0], "q: x\npassage: " + m.rendered);
  EXPECT_FALSE(f.truncated);
}

TEST(FidSegments, OverflowBeyondSegmentCountIsFlagged) {
  BasicTokenizer tok;
  // Each marked sentence "S<k>:w w w." is 1 + 1 + 3 + 1 = 6 basic tokens;
  // the prefix "Q ?" is 2. Budget 14 holds exactly two sentences (2+6+6).
  std::string passage = "w w w. w w w. w w w. w w w. w w w. w w w.";
  MarkedPassage m = mark_sentences(split_sentences(passage));
  ASSERT_EQ(tok.count(m.marked_sentences[0]), 6u);
  ASSERT_EQ(tok.count("Q ?"), 2u);
  // Six sentences need three budgets; only two segments are allowed.
  FidSegments f = build_fid_segments("Q ?", m, tok, 14, 2);
  ASSERT_EQ(f.segments.size(), 2u);
  EXPECT_TRUE(f.truncated);
  EXPECT_EQ(f.sentence_ids[0], (std::vector<std::size_t>{0, 1}));
  EXPECT_EQ(f.sentence_ids[1], (std::vector<std::size_t>{2, 3}));
  for (const auto& s : f.segments) EXPECT_EQ(tok.count(s), 14u);

  FidSegments all = build_fid_segments("Q ?", m, tok, 14, 3);
  EXPECT_EQ(all.segments.size(), 3u);
  EXPECT_FALSE(all.truncated);
}

TEST(FidSegments, LoneLongSentenceIsTokenTruncated) {
  BasicTokenizer tok;
  MarkedPassage m =
      mark_sentences(split_sentences("one two three four five six seven. Short."));
  FidSegments f = build_fid_segments("P ", m, tok, 6, 2);
  ASSERT_EQ(f.segments.size(), 2u);
  EXPECT_TRUE(f.truncated);
  EXPECT_EQ(f.bodies[0], "S1:one two three");
  EXPECT_LE(tok.count(f.segments[0]), 6u);
  EXPECT_EQ(f.bodies[1], "S2:Short.");
}

TEST(FidSegments, BudgetTooSmallForPrefix) {
  BasicTokenizer tok;
  MarkedPassage m = mark_sentences(split_sentences("A."));
  EXPECT_THROW(build_fid_segments("a b c", m, tok, 3, 1), ConfigError);
  EXPECT_THROW(build_fid_segments("a", m, tok, 10, 0), ConfigError);
}

TEST(FidSegments, PartitionsRetainedPrefixWithoutDuplicates) {
  BasicTokenizer tok;
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    SentenceList list = split_sentences(testing::random_passage(rng, 1, 30));
    MarkedPassage m = mark_sentences(list);
    std::size_t budget = 20 + rng() % 60;
    std::size_t count = 1 + rng() % 4;
    FidSegments f = build_fid_segments("question: x y\npassage: ", m, tok, budget, count);
    EXPECT_LE(f.segments.size(), count);
    std::vector<std::size_t> seen;
    for (const auto& ids : f.sentence_ids) seen.insert(seen.end(), ids.begin(), ids.end());
    for (std::size_t i = 0; i < seen.size(); ++i) EXPECT_EQ(seen[i], i);
    for (const auto& s : f.segments) EXPECT_LE(tok.count(s), budget);
    // Deterministic.
    FidSegments g = build_fid_segments("question: x y\npassage: ", m, tok, budget, count);
    EXPECT_EQ(f.segments, g.segments);
  }
}

}  // namespace
}  // namespace rlk
