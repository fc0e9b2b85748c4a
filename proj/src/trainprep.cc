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

#include "rlk/trainprep.h"

#include <istream>
#include <ostream>

#include "rlk/errors.h"

namespace rlk {

namespace {

using nlohmann::json;

Objective parse_objective(const std::string& s) {
  if (s == "rationale") return Objective::kRationale;
  if (s == "decision") return Objective::kDecision;
  throw ParseError("unknown objective '" + s + "'");
}

SampleVariant parse_variant(const std::string& s) {
  for (auto v : {SampleVariant::kBase, SampleVariant::kRalPassage,
                 SampleVariant::kRalRationalePlusPassage}) {
    if (to_string(v) == s) return v;
  }
  throw ParseError("unknown variant '" + s + "'");
}

TrainingSample decision_sample(const Quadruple& example,
                               const SentenceList& sentences,
                               const std::string& rationale,
                               DecisionInputMode mode, SampleVariant variant,
                               const PipelineConfig& config) {
  TrainingSample s;
  s.input_text =
      build_decision_prompt(example, sentences, rationale, mode, config).prompt;
  s.target_text = example.label;
  s.objective = Objective::kDecision;
  s.variant = variant;
  s.example_id = example.id;
  return s;
}

}  // namespace

std::string to_string(Objective objective) {
  return objective == Objective::kRationale ? "rationale" : "decision";
}

std::string to_string(SampleVariant variant) {
  switch (variant) {
    case SampleVariant::kBase: return "base";
    case SampleVariant::kRalPassage: return "ral_passage";
    case SampleVariant::kRalRationalePlusPassage: return "ral_rationale_plus_passage";
  }
  return "base";
}

std::optional<TrainingSample> build_rationale_sample(
    const Quadruple& example, const PipelineConfig& config) {
  if (!example.annotated) return std::nullopt;
  SentenceList sentences = split_sentences(example.passage);
  TrainingSample s;
  s.input_text = build_rationale_prompt(example, sentences, config).prompt;
  s.target_text = config.sm_on
                      ? render_mark_target(example.rationale_sentences)
                      : annotated_rationale_text(example, sentences);
  s.objective = Objective::kRationale;
  s.variant = SampleVariant::kBase;
  s.example_id = example.id;
  return s;
}

std::vector<TrainingSample> build_decision_samples(const Quadruple& example,
                                                   const PipelineConfig& config,
                                                   bool ral_on) {
  std::vector<TrainingSample> out;
  if (!example.annotated) return out;
  SentenceList sentences = split_sentences(example.passage);
  std::string rationale = annotated_rationale_text(example, sentences);
  out.push_back(decision_sample(example, sentences, rationale,
                                DecisionInputMode::kAnnotatedRationale,
                                SampleVariant::kBase, config));
  if (ral_on) {
    out.push_back(decision_sample(example, sentences, rationale,
                                  DecisionInputMode::kPassageOnly,
                                  SampleVariant::kRalPassage, config));
    out.push_back(decision_sample(example, sentences, rationale,
                                  DecisionInputMode::kRationalePlusPassage,
                                  SampleVariant::kRalRationalePlusPassage,
                                  config));
  }
  return out;
}

std::vector<TrainingSample> build_judge_training_file(
    std::span<const Quadruple> dataset, const PipelineConfig& config) {
  std::vector<TrainingSample> out;
  for (const auto& example : dataset) {
    if (!example.annotated) continue;
    SentenceList sentences = split_sentences(example.passage);
    out.push_back(decision_sample(example, sentences,
                                  annotated_rationale_text(example, sentences),
                                  DecisionInputMode::kAnnotatedRationale,
                                  SampleVariant::kBase, config));
  }
  return out;
}

TrainingSet prepare_training(std::span<const Quadruple> dataset,
                             const PipelineConfig& config, bool ral_on) {
  TrainingSet out;
  for (const auto& example : dataset) {
    auto rationale = build_rationale_sample(example, config);
    if (!rationale) {
      ++out.skipped_unannotated;
      continue;
    }
    out.samples.push_back(std::move(*rationale));
    for (auto& s : build_decision_samples(example, config, ral_on)) {
      out.samples.push_back(std::move(s));
    }
  }
  return out;
}

nlohmann::ordered_json sample_to_json(const TrainingSample& s) {
  nlohmann::ordered_json out;
  out["input_text"] = s.input_text;
  out["target_text"] = s.target_text;
  out["objective"] = to_string(s.objective);
  out["variant"] = to_string(s.variant);
  out["example_id"] = s.example_id;
  return out;
}

TrainingSample sample_from_json(const json& doc) {
  TrainingSample s;
  try {
    s.input_text = doc.at("input_text").get<std::string>();
    s.target_text = doc.at("target_text").get<std::string>();
    s.objective = parse_objective(doc.at("objective").get<std::string>());
    s.variant = parse_variant(doc.at("variant").get<std::string>());
    s.example_id = doc.at("example_id").get<std::string>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("training sample: ") + e.what());
  }
  return s;
}

void write_samples(std::ostream& out, std::span<const TrainingSample> samples) {
  for (const auto& s : samples) out << sample_to_json(s).dump() << '\n';
}

std::vector<TrainingSample> read_samples(std::istream& in) {
  std::vector<TrainingSample> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json doc = json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (doc.is_discarded()) throw ParseError("malformed training sample", line_no);
    try {
      out.push_back(sample_from_json(doc));
    } catch (const ParseError& e) {
      throw ParseError(e.what(), line_no);
    }
  }
  return out;
}

}  // namespace rlk
