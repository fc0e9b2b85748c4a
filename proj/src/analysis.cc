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

#include <exception>
#include <tuple>

#include "rlk/errors.h"

namespace rlk {

namespace {

std::pair<double, double> macro_scores(const PredictionScores& scores) {
  double iou = 0.0, tf1 = 0.0;
  for (const auto& s : scores.scored) {
    iou += s.iou.f1;
    tf1 += s.tf1.f1;
  }
  auto n = static_cast<double>(scores.scored.size());
  return {iou / n, tf1 / n};
}

}  // namespace

MaskingRow make_masking_row(const std::string& dataset,
                            const PredictionScores& origin,
                            const PredictionScores& masked) {
  if (origin.scored.empty() || masked.scored.empty()) {
    throw ValidationError("masking analysis needs at least one annotated example");
  }
  MaskingRow row;
  row.dataset = dataset;
  row.num_examples = origin.scored.size();
  std::tie(row.iou_f1_origin, row.tf1_origin) = macro_scores(origin);
  std::tie(row.iou_f1_masked, row.tf1_masked) = macro_scores(masked);
  row.delta_iou = row.iou_f1_masked - row.iou_f1_origin;
  row.delta_tf1 = row.tf1_masked - row.tf1_origin;
  return row;
}

MaskingRun run_masking_analysis(std::span<const Quadruple> dataset,
                                const PipelineConfig& config,
                                const EvaluationConfig& eval,
                                Generator& generator) {
  validate_config(config);
  if (!generator.supports_decoder_prefix()) {
    throw CapabilityError(
        "generator does not support the 'decoder_prefix' request field");
  }
  const std::size_t n = dataset.size();
  MaskingRun run;
  run.origin.resize(n);
  run.masked.resize(n);
  parallel_for(2 * n, config.parallelism, [&](std::size_t job) {
    std::size_t i = job / 2;
    bool mask = job % 2 == 1;
    auto& slot = mask ? run.masked[i] : run.origin[i];
    try {
      slot = run_parallel_baseline(dataset[i], config, generator, mask);
    } catch (const std::exception& e) {
      slot = PredictionRecord{};
      slot.example_id = dataset[i].id;
      slot.decision_input_mode = DecisionInputMode::kPassageOnly;
      if (!mask) slot.decision = kUnparseable;
      slot.diagnostics.error = e.what();
    }
  });

  std::string name = n > 0 ? dataset.front().dataset : std::string();
  run.report.rows.push_back(make_masking_row(
      name, score_predictions(dataset, run.origin, eval),
      score_predictions(dataset, run.masked, eval)));

  auto& c = run.report.config;
  c["sm_on"] = config.sm_on;
  c["segment_count"] = config.fid.segment_count;
  c["max_tokens"] = config.fid.max_tokens;
  c["tokenizer"] = eval.tok().id();
  c["iou_threshold"] = eval.match.iou_threshold;
  c["mask_prefix"] = kMaskPrefix;
  return run;
}

nlohmann::ordered_json masking_report_to_json(const MaskingReport& report) {
  nlohmann::ordered_json out;
  out["rows"] = nlohmann::ordered_json::array();
  for (const auto& r : report.rows) {
    nlohmann::ordered_json row;
    row["dataset"] = r.dataset;
    row["num_examples"] = r.num_examples;
    row["iou_f1_origin"] = r.iou_f1_origin;
    row["iou_f1_masked"] = r.iou_f1_masked;
    row["tf1_origin"] = r.tf1_origin;
    row["tf1_masked"] = r.tf1_masked;
    row["delta_iou"] = r.delta_iou;
    row["delta_tf1"] = r.delta_tf1;
    out["rows"].push_back(row);
  }
  out["config"] = report.config;
  return out;
}

}  // namespace rlk
