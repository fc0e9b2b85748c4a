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

#include "rlk/metrics.h"

#include <cmath>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "oracles.h"
#include "rlk/errors.h"
#include "test_util.h"

namespace rlk {
namespace {

const BasicTokenizer kTok;
const SentenceMatchConfig kMatch;

std::vector<std::string> words(const std::string& s) { return kTok.words(s); }

TEST(Threshold, StrictExceptAtOne) {
  EXPECT_FALSE(exceeds_threshold(0.5, 0.5));
  EXPECT_TRUE(exceeds_threshold(0.5000001, 0.5));
  EXPECT_TRUE(exceeds_threshold(1.0, 1.0));
  EXPECT_FALSE(exceeds_threshold(0.999, 1.0));
  EXPECT_THROW(validate_threshold(0.0, "t"), ConfigError);
  EXPECT_THROW(validate_threshold(1.5, "t"), ConfigError);
  EXPECT_NO_THROW(validate_threshold(1.0, "t"));
}

TEST(Lcs, MatchesBruteForce) {
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> len(0, 9), sym(0, 3);
  for (int trial = 0; trial < 2000; ++trial) {
    std::vector<std::string> a(len(rng)), b(len(rng));
    for (auto& t : a) t = std::string(1, static_cast<char>('a' + sym(rng)));
    for (auto& t : b) t = std::string(1, static_cast<char>('a' + sym(rng)));
    ASSERT_EQ(longest_common_substring(a, b), testing::brute_lcs(a, b));
    ASSERT_EQ(longest_common_substring(a, b), longest_common_substring(b, a));
  }
}

TEST(SentenceMatch, OverlapRatio) {
  auto a = words("x y z w"), b = words("x y z q");
  EXPECT_DOUBLE_EQ(sentence_overlap(a, b), 3.0 / 5.0);
  EXPECT_TRUE(sentence_match("x y z w", "x y z q", kTok, kMatch));
  // 2 / (4 + 4 - 2) = 1/3.
  EXPECT_FALSE(sentence_match("x y z w", "x y q r", kTok, kMatch));
  // Exactly 0.5 does not exceed 0.5: 2 / (3 + 3 - 2).
  EXPECT_DOUBLE_EQ(sentence_overlap(words("a b c"), words("a b d")), 0.5);
  EXPECT_FALSE(sentence_match("a b c", "a b d", kTok, kMatch));
  EXPECT_FALSE(sentence_match("", "", kTok, kMatch));
  EXPECT_TRUE(sentence_match("a b c", "a b c", kTok, {1.0}));
}

TEST(IouF1, WorkedExample) {
  std::vector<std::string> annotated = {
      "the cat sat on the mat.", "dogs bark very loudly at night.",
      "birds sing every morning.", "fish swim in the sea."};
  std::vector<std::string> generated = {
      "the cat sat on the mat.", "dogs bark very loudly at noon.",
      "trees grow very slowly here."};
  auto s = iou_f1(annotated, generated, kTok, kMatch);
  EXPECT_EQ(s.matched, 2u);
  EXPECT_NEAR(s.precision, 2.0 / 3.0, 1e-12);
  EXPECT_DOUBLE_EQ(s.recall, 0.5);
  EXPECT_NEAR(s.f1, 4.0 / 7.0, 1e-12);
}

TEST(IouF1, EmptySides) {
  std::vector<std::string> none, one = {"a b c."};
  auto both = iou_f1(none, none, kTok, kMatch);
  EXPECT_EQ(both.f1, 1.0);
  EXPECT_EQ(iou_f1(one, none, kTok, kMatch).f1, 0.0);
  EXPECT_EQ(iou_f1(none, one, kTok, kMatch).f1, 0.0);
}

TEST(IouF1, OneToOneMatching) {
  // Two generated copies can match the single annotated sentence only once.
  std::vector<std::string> annotated = {"a b c d."};
  std::vector<std::string> generated = {"a b c d.", "a b c d."};
  auto s = iou_f1(annotated, generated, kTok, kMatch);
  EXPECT_EQ(s.matched, 1u);
  EXPECT_DOUBLE_EQ(s.precision, 0.5);
  EXPECT_DOUBLE_EQ(s.recall, 1.0);
}

TEST(IouF1, SymmetricAndOrderInvariant) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::string> a, b;
    testing::random_passage(rng, 1, 5, &a);
    testing::random_passage(rng, 1, 5, &b);
    if (trial % 3 == 0) b.push_back(a[0]);
    auto ab = iou_f1(a, b, kTok, kMatch);
    auto ba = iou_f1(b, a, kTok, kMatch);
    EXPECT_EQ(ab.matched, ba.matched);
    EXPECT_DOUBLE_EQ(ab.f1, ba.f1);
    EXPECT_DOUBLE_EQ(ab.precision, ba.recall);
    auto shuffled = b;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    EXPECT_EQ(iou_f1(a, shuffled, kTok, kMatch).matched, ab.matched);
  }
}

TEST(Matching, MatchesBruteForce) {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<std::size_t> size(0, 6);
  std::bernoulli_distribution edge(0.35);
  for (int trial = 0; trial < 3000; ++trial) {
    std::size_t l = size(rng), r = size(rng);
    std::vector<std::vector<bool>> adj(l, std::vector<bool>(r));
    for (auto& row : adj) {
      for (std::size_t j = 0; j < r; ++j) row[j] = edge(rng);
    }
    ASSERT_EQ(max_bipartite_matching(adj, r), testing::brute_matching(adj, r));
  }
}

TEST(TokenF1, SetOverlap) {
  auto s = token_f1({"a", "b", "c", "d"}, {"a", "b", "e"});
  EXPECT_DOUBLE_EQ(s.precision, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(s.recall, 0.5);
  EXPECT_NEAR(s.f1, 4.0 / 7.0, 1e-12);
  EXPECT_EQ(token_set("a a b, b", kTok), (std::set<std::string>{"a", "b", ","}));
  EXPECT_EQ(token_f1({}, {}).f1, 1.0);
  EXPECT_EQ(token_f1({"a"}, {}).f1, 0.0);
}

TEST(RationaleCorrect, StrictRecall) {
  std::vector<std::string> annotated = {"a b c d.", "e f g h."};
  std::vector<std::string> half = {"a b c d."};
  // recall 0.5 does not exceed 0.5.
  EXPECT_FALSE(rationale_correct(annotated, half, 0.5, kTok, kMatch));
  EXPECT_TRUE(rationale_correct(annotated, half, 0.4, kTok, kMatch));
  EXPECT_TRUE(rationale_correct(annotated, annotated, 1.0, kTok, kMatch));
  EXPECT_FALSE(rationale_correct(annotated, half, 1.0, kTok, kMatch));
}

TEST(LinkMetrics, Ratios) {
  std::vector<LinkOutcome> outcomes = {
      {true, true}, {true, true}, {true, true}, {false, false}, {true, false}};
  auto c = classify_links(outcomes);
  EXPECT_EQ(c, (LinkClassCounts{3, 1, 1, 0}));
  EXPECT_DOUBLE_EQ(*rsq(c), 0.8);
  EXPECT_DOUBLE_EQ(*rsq_w(c), 0.25);
  EXPECT_DOUBLE_EQ(*rsq_c(c), 0.0);
  LinkClassCounts empty;
  EXPECT_FALSE(rsq(empty));
  EXPECT_FALSE(rsq_w(empty));
  EXPECT_FALSE(rsq_c(LinkClassCounts{2, 0, 1, 0}));
}

PredictionRecord decided(const std::string& id, const std::string& decision,
                         DecisionInputMode mode) {
  PredictionRecord r;
  r.example_id = id;
  r.decision = decision;
  r.decision_input_mode = mode;
  return r;
}

TEST(LinkMetrics, RcpAndRAcc) {
  auto mode = DecisionInputMode::kAnnotatedRationale;
  std::vector<PredictionRecord> records = {decided("a", "SUPPORTS", mode),
                                           decided("b", "REFUTES", mode),
                                           decided("c", kUnparseable, mode)};
  std::vector<std::string> golds = {"SUPPORTS", "SUPPORTS", "REFUTES"};
  EXPECT_DOUBLE_EQ(*rcp(records, golds), 1.0 / 3.0);
  EXPECT_FALSE(rcp({}, {}));
  golds.pop_back();
  EXPECT_THROW(rcp(records, golds), ValidationError);
  records[1].decision_input_mode = DecisionInputMode::kRationaleOnly;
  golds.push_back("REFUTES");
  EXPECT_THROW(rcp(records, golds), ValidationError);

  std::vector<std::pair<std::string, std::string>> judged = {
      {"SUPPORTS", "SUPPORTS"}, {"REFUTES", "SUPPORTS"}, {"REFUTES", "REFUTES"},
      {"SUPPORTS", "SUPPORTS"}};
  EXPECT_DOUBLE_EQ(*r_acc(judged), 0.75);
  EXPECT_FALSE(r_acc({}));
}

std::vector<ScoredExample> random_scored(std::mt19937_64& rng, std::size_t n) {
  std::uniform_int_distribution<int> recall_num(0, 4);
  std::bernoulli_distribution correct(0.6);
  std::vector<ScoredExample> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i].id = "x" + std::to_string(i);
    out[i].iou.recall = recall_num(rng) / 4.0;
    out[i].decision_correct = correct(rng);
  }
  return out;
}

TEST(Sweep, BruteForceRecount) {
  std::mt19937_64 rng(13);
  auto scored = random_scored(rng, 10);
  std::vector<double> thresholds = {0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
  auto rows = threshold_sweep(scored, thresholds);
  ASSERT_EQ(rows.size(), thresholds.size());
  for (const auto& row : rows) {
    LinkClassCounts expect;
    for (const auto& s : scored) {
      bool rc = row.threshold == 1.0 ? s.iou.recall == 1.0 : s.iou.recall > row.threshold;
      if (rc && s.decision_correct) ++expect.rc_dc;
      if (!rc && !s.decision_correct) ++expect.rw_dw;
      if (rc && !s.decision_correct) ++expect.rc_dw;
      if (!rc && s.decision_correct) ++expect.rw_dc;
    }
    EXPECT_EQ(row.counts, expect) << row.threshold;
    EXPECT_EQ(row.rationale_correct, expect.rc_dc + expect.rc_dw);
  }
}

TEST(Sweep, MonotoneInThreshold) {
  std::mt19937_64 rng(17);
  std::vector<double> thresholds = {0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
  for (int trial = 0; trial < 50; ++trial) {
    auto rows = threshold_sweep(random_scored(rng, 30), thresholds);
    for (std::size_t i = 1; i < rows.size(); ++i) {
      EXPECT_LE(rows[i].rationale_correct, rows[i - 1].rationale_correct);
      EXPECT_LE(rows[i].counts.rc_dc, rows[i - 1].counts.rc_dc);
    }
  }
  std::vector<double> bad = {0.0};
  EXPECT_THROW(threshold_sweep({}, bad), ConfigError);
}

TEST(Sweep, CsvFormat) {
  std::vector<ScoredExample> scored(2);
  scored[0].iou.recall = 1.0;
  scored[0].decision_correct = true;
  scored[1].iou.recall = 0.0;
  scored[1].decision_correct = true;
  std::vector<double> thresholds = {0.5};
  std::ostringstream out;
  write_sweep_csv(out, threshold_sweep(scored, thresholds));
  EXPECT_EQ(out.str(),
            "threshold,rc_dc,rw_dw,rc_dw,rw_dc,rationale_correct,rsq,rsq_w,rsq_c\n"
            "0.5,1,0,0,1,1,0.5,0,1\n");
  std::vector<ScoredExample> none;
  std::ostringstream empty;
  write_sweep_csv(empty, threshold_sweep(none, thresholds));
  EXPECT_EQ(empty.str().substr(empty.str().find('\n') + 1), "0.5,0,0,0,0,0,,,\n");
}

TEST(Evaluate, OracleAndAdversarial) {
  auto data = testing::synthetic_dataset(30, 21);
  PipelineConfig pc;
  pc.templates = default_templates("fever");
  pc.label_vocabulary = {"SUPPORTS", "REFUTES"};
  {
    MockGenerator mock;
    testing::fill_oracle(mock, data);
    auto report = evaluate(data, run_pipeline(data, pc, mock), {});
    EXPECT_EQ(*report.accuracy, 1.0);
    EXPECT_EQ(*report.iou_f1, 1.0);
    EXPECT_EQ(*report.tf1, 1.0);
    EXPECT_EQ(*report.rsq, 1.0);
    EXPECT_EQ(*report.rsq_w, 0.0);
    EXPECT_FALSE(report.rsq_c);
  }
  {
    MockGenerator mock;
    testing::fill_adversarial(mock, data);
    auto report = evaluate(data, run_pipeline(data, pc, mock), {});
    EXPECT_EQ(*report.rsq, 0.0);
    EXPECT_EQ(*report.rsq_c, 1.0);
    EXPECT_EQ(report.counts.rw_dc, data.size());
  }
}

TEST(Evaluate, SkipsUnannotatedAndChecksIds) {
  auto data = testing::synthetic_dataset(6, 2);
  data[2].annotated = false;
  data[2].rationale_sentences.clear();
  PipelineConfig pc;
  pc.templates = default_templates("fever");
  pc.label_vocabulary = {"SUPPORTS", "REFUTES"};
  MockGenerator mock;
  testing::fill_oracle(mock, data);
  auto preds = run_pipeline(data, pc, mock);
  auto report = evaluate(data, preds, {});
  EXPECT_EQ(report.num_examples, 6u);
  EXPECT_EQ(report.num_scored, 5u);
  EXPECT_EQ(report.counts.total(), 5u);
  std::swap(preds[0], preds[1]);
  try {
    evaluate(data, preds, {});
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("ex0"), std::string::npos);
  }
  preds.pop_back();
  EXPECT_THROW(evaluate(data, preds, {}), ValidationError);
}

TEST(Report, JsonRoundTrip) {
  MetricReport r;
  r.accuracy = 0.75;
  r.iou_f1 = 4.0 / 7.0;
  r.rsq = 0.8;
  r.counts = {3, 1, 1, 0};
  r.num_examples = 5;
  r.num_scored = 5;
  r.tokenizer_id = "basic";
  auto doc = report_to_json(r);
  EXPECT_TRUE(doc["rsq_c"].is_null());
  EXPECT_EQ(doc["config"]["tokenizer"], "basic");
  auto back = report_from_json(nlohmann::json::parse(doc.dump()));
  EXPECT_EQ(back.accuracy, r.accuracy);
  EXPECT_EQ(back.iou_f1, r.iou_f1);
  EXPECT_FALSE(back.rsq_c);
  EXPECT_EQ(back.counts, r.counts);
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(1.0), "1");
}

}  // namespace
}  // namespace rlk
