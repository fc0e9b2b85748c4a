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

#ifndef RLK_TRAINPREP_H_
#define RLK_TRAINPREP_H_

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rlk/corpus.h"
#include "rlk/pipeline.h"

namespace rlk {

enum class Objective { kRationale, kDecision };
enum class SampleVariant { kBase, kRalPassage, kRalRationalePlusPassage };

std::string to_string(Objective objective);
std::string to_string(SampleVariant variant);

// One supervised sequence pair for an external seq2seq trainer. Inputs are
// rendered by the same prompt builders the pipeline uses at inference.
struct TrainingSample {
  std::string input_text;
  std::string target_text;
  Objective objective = Objective::kRationale;
  SampleVariant variant = SampleVariant::kBase;
  std::string example_id;

  bool operator==(const TrainingSample&) const = default;
};

// Input (t_rationale, q, p marked when config.sm_on). Target is the
// annotated rationale text, or its marks "S1 S3" with SM on. Returns nullopt
// for unannotated examples.
std::optional<TrainingSample> build_rationale_sample(const Quadruple& example,
                                                     const PipelineConfig& config);

// (t_answer, q, r) -> y, plus with RAL (t_answer, q, p) -> y and
// (t_answer, q, r, p) -> y. Empty for unannotated examples.
std::vector<TrainingSample> build_decision_samples(const Quadruple& example,
                                                   const PipelineConfig& config,
                                                   bool ral_on);

// (t_answer, q, annotated r) -> y for every annotated example, for training
// the judge model behind R-Acc.
std::vector<TrainingSample> build_judge_training_file(
    std::span<const Quadruple> dataset, const PipelineConfig& config);

struct TrainingSet {
  std::vector<TrainingSample> samples;
  std::size_t skipped_unannotated = 0;
};

// Per example: the rationale sample, then its decision samples.
TrainingSet prepare_training(std::span<const Quadruple> dataset,
                             const PipelineConfig& config, bool ral_on);

nlohmann::ordered_json sample_to_json(const TrainingSample& sample);
TrainingSample sample_from_json(const nlohmann::json& doc);
void write_samples(std::ostream& out, std::span<const TrainingSample> samples);
std::vector<TrainingSample> read_samples(std::istream& in);

}  // namespace rlk

#endif  // RLK_TRAINPREP_H_
