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

#include "rlk/analysis.h"

#include <gtest/gtest.h>

#include "rlk/errors.h"
#include "test_util.h"

namespace rlk {
namespace {

PipelineConfig fever_config() {
  PipelineConfig c;
  c.templates = default_templates("fever");
  c.label_vocabulary = {"SUPPORTS", "REFUTES"};
  return c;
}

TEST(Masking, IdenticalRationalesGiveZeroDelta) {
  auto data = testing::synthetic_dataset(20, 1);
  MockGenerator mock;
  testing::fill_masking(mock, data, 20, 20);
  auto run = run_masking_analysis(data, fever_config(), {}, mock);
  ASSERT_EQ(run.report.rows.size(), 1u);
  const auto& row = run.report.rows[0];
  EXPECT_EQ(row.iou_f1_origin, 1.0);
  EXPECT_EQ(row.delta_iou, 0.0);
  EXPECT_EQ(row.delta_tf1, 0.0);
  EXPECT_EQ(row.num_examples, 20u);
  EXPECT_EQ(row.dataset, "fever");
}

TEST(Masking, EmptyMaskedOutputGivesNegatedOrigin) {
  auto data = testing::synthetic_dataset(12, 2);
  MockGenerator mock;
  testing::fill_masking(mock, data, 9, 0);
  auto run = run_masking_analysis(data, fever_config(), {}, mock);
  const auto& row = run.report.rows[0];
  EXPECT_EQ(row.iou_f1_masked, 0.0);
  EXPECT_DOUBLE_EQ(row.iou_f1_origin, 0.75);
  EXPECT_EQ(row.delta_iou, -row.iou_f1_origin);
  EXPECT_EQ(row.delta_tf1, -row.tf1_origin);
  for (const auto& r : run.masked) EXPECT_FALSE(r.decision);
  for (const auto& r : run.origin) EXPECT_TRUE(r.decision);
}

TEST(Masking, FeverShape) {
  auto data = testing::synthetic_dataset(500, 3);
  MockGenerator mock;
  testing::fill_masking(mock, data, 427, 426);
  auto c = fever_config();
  c.parallelism = 4;
  auto row = run_masking_analysis(data, c, {}, mock).report.rows[0];
  EXPECT_NEAR(row.iou_f1_origin * 100, 85.4, 0.05);
  EXPECT_NEAR(row.iou_f1_masked * 100, 85.2, 0.05);
  EXPECT_EQ(row.delta_iou, row.iou_f1_masked - row.iou_f1_origin);
}

TEST(Masking, RequestsDifferOnlyInDecoderPrefix) {
  auto data = testing::synthetic_dataset(5, 4);
  MockGenerator mock;
  testing::fill_masking(mock, data, 5, 5);
  run_masking_analysis(data, fever_config(), {}, mock);
  auto log = mock.request_log();
  ASSERT_EQ(log.size(), 10u);
  for (const auto& q : data) {
    std::vector<GeneratorRequest> pair;
    for (const auto& r : log) {
      if (r.example_id == q.id) pair.push_back(r);
    }
    ASSERT_EQ(pair.size(), 2u);
    if (pair[0].decoder_prefix) std::swap(pair[0], pair[1]);
    EXPECT_FALSE(pair[0].decoder_prefix);
    EXPECT_EQ(pair[1].decoder_prefix, std::string(kMaskPrefix));
    EXPECT_EQ(pair[0].prompt, pair[1].prompt);
    EXPECT_EQ(pair[0].segments, pair[1].segments);
    EXPECT_EQ(pair[0].max_tokens, pair[1].max_tokens);
  }
}

TEST(Masking, RequiresDecoderPrefixCapability) {
  auto data = testing::synthetic_dataset(3, 5);
  MockGenerator mock;
  testing::fill_masking(mock, data, 3, 3);
  mock.set_supports_decoder_prefix(false);
  try {
    run_masking_analysis(data, fever_config(), {}, mock);
    FAIL();
  } catch (const CapabilityError& e) {
    EXPECT_NE(std::string(e.what()).find("decoder_prefix"), std::string::npos);
  }
  EXPECT_TRUE(mock.request_log().empty());
}

TEST(Masking, ReportJson) {
  auto data = testing::synthetic_dataset(4, 6);
  MockGenerator mock;
  testing::fill_masking(mock, data, 4, 2);
  auto doc = masking_report_to_json(
      run_masking_analysis(data, fever_config(), {}, mock).report);
  EXPECT_EQ(doc["rows"][0]["delta_iou"], -0.5);
  EXPECT_EQ(doc["config"]["mask_prefix"], kMaskPrefix);
  EXPECT_EQ(doc["config"]["sm_on"], true);
}

}  // namespace
}  // namespace rlk
