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

#ifndef RLK_PIPELINE_H_
#define RLK_PIPELINE_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rlk/corpus.h"
#include "rlk/generator.h"
#include "rlk/textproc.h"
#include "rlk/tokenizer.h"

namespace rlk {

inline constexpr const char* kUnparseable = "UNPARSEABLE";
inline constexpr const char* kMaskPrefix = "Answer: <pad> Explanation:";

struct PromptTemplates {
  std::string t_rationale;
  std::string t_answer;
};

// Per-dataset default phrasings.
PromptTemplates default_templates(const std::string& dataset_name);

// {"t_rationale": ..., "t_answer": ...}; throws ConfigError if either is
// missing or empty.
PromptTemplates templates_from_json(const nlohmann::json& doc);
PromptTemplates load_templates(const std::filesystem::path& path);
nlohmann::ordered_json templates_to_json(const PromptTemplates& templates);

enum class DecisionInputMode {
  kRationaleOnly,
  kRationalePlusPassage,
  kAnnotatedRationale,
  kPassageOnly,
};

std::string to_string(DecisionInputMode mode);
DecisionInputMode parse_decision_mode(const std::string& name);

struct FidParams {
  std::size_t segment_count = 1;
  std::size_t max_tokens = 512;
};

struct PipelineConfig {
  PromptTemplates templates;
  std::vector<std::string> label_vocabulary;
  bool sm_on = true;
  FidParams fid;
  DecisionInputMode decision_mode = DecisionInputMode::kRationaleOnly;
  std::size_t parallelism = 1;
  RetryPolicy retry;
  int max_output_tokens = 64;
  // Null means the basic tokenizer.
  std::shared_ptr<const Tokenizer> tokenizer;

  const Tokenizer& tok() const;
};

// Throws ConfigError on empty templates or vocabulary, C < 1, or
// parallelism < 1.
void validate_config(const PipelineConfig& config);

// A rendered generator input. With FID, `segments` holds one
// prefix + passage-slice string per segment and `prompt` joins them with a
// blank line; otherwise `segments` holds just `prompt`.
struct StagePrompt {
  std::string prompt;
  std::vector<std::string> segments;
  bool truncated = false;
};

inline constexpr const char* kSegmentSeparator = "\n\n";

// Field layout: template line, "question: q", then "passage: p" (marked when
// sm_on), packed into FID segments.
StagePrompt build_rationale_prompt(const Quadruple& example,
                                   const SentenceList& sentences,
                                   const PipelineConfig& config);

// Field layout: template line, "question: q", "rationale: r" (rationale
// modes), "passage: p" (passage modes, unmarked, FID-packed).
StagePrompt build_decision_prompt(const Quadruple& example,
                                  const SentenceList& sentences,
                                  const std::string& rationale_text,
                                  DecisionInputMode mode,
                                  const PipelineConfig& config);

// Case-insensitive match after removing ASCII punctuation and collapsing
// whitespace. Returns kUnparseable when no label matches.
std::string match_label(std::string_view output,
                        std::span<const std::string> labels);

struct Diagnostics {
  std::size_t dropped_indices = 0;
  bool truncated = false;
  // SM output without any mark, or a parallel output whose rationale part
  // could not be found.
  bool unparseable_rationale = false;
  // Set when the example failed after retries.
  std::string error;

  bool operator==(const Diagnostics&) const = default;
};

struct PredictionRecord {
  std::string example_id;
  std::optional<std::vector<std::uint64_t>> generated_indices;
  std::string generated_rationale_text;
  std::vector<std::size_t> resolved_sentence_set;
  // Absent only for masked parallel runs.
  std::optional<std::string> decision;
  DecisionInputMode decision_input_mode = DecisionInputMode::kRationaleOnly;
  std::string raw_stage1;
  std::string raw_stage2;
  Diagnostics diagnostics;

  bool operator==(const PredictionRecord&) const = default;
};

nlohmann::ordered_json prediction_to_json(const PredictionRecord& record);
PredictionRecord prediction_from_json(const nlohmann::json& doc);
void write_predictions(std::ostream& out,
                       std::span<const PredictionRecord> records);
// Throws ParseError with the line number on malformed input.
std::vector<PredictionRecord> read_predictions(std::istream& in);
std::vector<PredictionRecord> load_predictions(
    const std::filesystem::path& path);

struct SelfAttribution {
  // Parsed 1-based marks (SM on only).
  std::optional<std::vector<std::uint64_t>> indices;
  std::string rationale_text;
  std::vector<std::size_t> sentence_set;
  std::string raw;
  std::size_t dropped = 0;
  bool truncated = false;
  bool unparseable = false;
};

// Stage 1. Throws EndpointError once retries are exhausted.
SelfAttribution run_self_attribution(const Quadruple& example,
                                     const PipelineConfig& config,
                                     Generator& generator);

struct DecisionResult {
  std::string decision;
  std::string raw;
  bool truncated = false;
};

// Stage 2. For kAnnotatedRationale, `rationale_text` should be the
// annotated rationale.
DecisionResult run_decision(const Quadruple& example,
                            const std::string& rationale_text,
                            DecisionInputMode mode,
                            const PipelineConfig& config,
                            Generator& generator);

// Both stages for every example (stage 1 is skipped in the annotated and
// passage-only modes). Output order equals input order. Per-example
// failures become records with decision UNPARSEABLE and diagnostics.error.
std::vector<PredictionRecord> run_pipeline(std::span<const Quadruple> dataset,
                                           const PipelineConfig& config,
                                           Generator& generator);

// Re-decides over previously generated rationales (stage 2 only, rationale
// mode). This is how a separately trained judge scores generated
// rationales. `rationales` must align with `dataset` by id.
std::vector<PredictionRecord> run_judge(
    std::span<const Quadruple> dataset,
    std::span<const PredictionRecord> rationales, const PipelineConfig& config,
    Generator& generator);

// Decision-then-rationale in a single call. With mask_decision the decoder
// is seeded with kMaskPrefix and only a rationale is parsed.
PredictionRecord run_parallel_baseline(const Quadruple& example,
                                       const PipelineConfig& config,
                                       Generator& generator,
                                       bool mask_decision);

// Applies `fn(i)` for i in [0, n) on up to `parallelism` threads.
void parallel_for(std::size_t n, std::size_t parallelism,
                  const std::function<void(std::size_t)>& fn);

}  // namespace rlk

#endif  // RLK_PIPELINE_H_
