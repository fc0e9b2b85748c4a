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

#ifndef RLK_ANALYSIS_H_
#define RLK_ANALYSIS_H_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rlk/corpus.h"
#include "rlk/generator.h"
#include "rlk/metrics.h"
#include "rlk/pipeline.h"

namespace rlk {

// Rationale quality of a parallel-format (decision then rationale) generator,
// with and without the decision masked out of the decoder input. Scores are
// macro averages in [0, 1].
struct MaskingRow {
  std::string dataset;
  std::size_t num_examples = 0;
  double iou_f1_origin = 0.0;
  double iou_f1_masked = 0.0;
  double tf1_origin = 0.0;
  double tf1_masked = 0.0;
  double delta_iou = 0.0;  // masked - origin
  double delta_tf1 = 0.0;  // masked - origin
};

struct MaskingReport {
  std::vector<MaskingRow> rows;
  nlohmann::ordered_json config;
};

struct MaskingRun {
  MaskingReport report;
  std::vector<PredictionRecord> origin;
  std::vector<PredictionRecord> masked;
};

// Builds a row from the two passes' scores; deltas are recomputed here.
MaskingRow make_masking_row(const std::string& dataset,
                            const PredictionScores& origin,
                            const PredictionScores& masked);

// Runs run_parallel_baseline twice per example (unmasked, then with the
// decoder seeded by kMaskPrefix) and scores both passes. Throws
// CapabilityError if the generator cannot take a decoder prefix and
// ValidationError if no example is annotated.
MaskingRun run_masking_analysis(std::span<const Quadruple> dataset,
                                const PipelineConfig& config,
                                const EvaluationConfig& eval,
                                Generator& generator);

nlohmann::ordered_json masking_report_to_json(const MaskingReport& report);

}  // namespace rlk

#endif  // RLK_ANALYSIS_H_
