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

#ifndef RLK_CONFIG_H_
#define RLK_CONFIG_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rlk/corpus.h"
#include "rlk/generator.h"
#include "rlk/metrics.h"
#include "rlk/pipeline.h"

namespace rlk {

// Every setting a CLI run depends on. Serialized as the --config file format
// and written back as the config echo beside outputs.
struct RunConfig {
  std::string manifest;
  std::string split = "test";
  std::string templates;  // empty: per-dataset defaults
  bool sm_on = true;
  bool ral_on = false;
  std::size_t segment_count = 1;
  std::size_t max_tokens = 512;
  std::string tokenizer = "basic";
  GeneratorEndpoint endpoint;
  std::string decision_mode = "rationale_only";
  double iou_threshold = 0.5;
  double recall_threshold = 0.5;
  std::string recall_source = "sentence";
  std::vector<double> thresholds = {0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
  std::size_t parallelism = 1;
  std::uint64_t seed = 0;
  std::optional<double> subsample_fraction;
  int retry_attempts = 3;
  int retry_backoff_ms = 100;
};

// Unknown keys are rejected with ConfigError.
RunConfig run_config_from_json(const nlohmann::json& doc);
nlohmann::ordered_json run_config_to_json(const RunConfig& config);

// Range checks: C >= 1, thresholds in (0, 1], parallelism >= 1, known
// tokenizer / mode / recall source, endpoint shape.
void validate_run_config(const RunConfig& config);

PipelineConfig make_pipeline_config(const RunConfig& config,
                                    const DatasetManifest& manifest);
EvaluationConfig make_evaluation_config(const RunConfig& config);

}  // namespace rlk

#endif  // RLK_CONFIG_H_
