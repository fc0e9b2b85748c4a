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

#ifndef RLK_METRICS_H_
#define RLK_METRICS_H_

#include <cstddef>
#include <iosfwd>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "rlk/corpus.h"
#include "rlk/pipeline.h"
#include "rlk/tokenizer.h"

namespace rlk {

// Threshold rule shared by sentence matching and rationale correctness:
// strictly greater for thresholds below 1, and >= 1 (exact) at threshold 1.
bool exceeds_threshold(double value, double threshold);

// Throws ConfigError unless threshold is in (0, 1].
void validate_threshold(double threshold, const std::string& name);

struct SentenceMatchConfig {
  double iou_threshold = 0.5;
};

// Length of the longest common contiguous run of tokens.
std::size_t longest_common_substring(std::span<const std::string> a,
                                     std::span<const std::string> b);

// I / U with I the longest common substring and U = |a| + |b| - I. Returns
// 0 when both sides are empty.
double sentence_overlap(std::span<const std::string> a,
                        std::span<const std::string> b);

bool sentence_match(std::string_view a, std::string_view b,
                    const Tokenizer& tokenizer,
                    const SentenceMatchConfig& config);

// Maximum cardinality matching of a bipartite graph given as a
// left x right adjacency matrix (augmenting paths).
std::size_t max_bipartite_matching(
    const std::vector<std::vector<bool>>& adjacency, std::size_t right_size);

struct PrecisionRecall {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t matched = 0;
};

// Sentence-level scores. Both sides empty scores 1; one side empty scores 0.
PrecisionRecall iou_f1(std::span<const std::string> annotated,
                       std::span<const std::string> generated,
                       const Tokenizer& tokenizer,
                       const SentenceMatchConfig& config);

// Token-set scores, same degenerate rules.
PrecisionRecall token_f1(const std::set<std::string>& annotated_tokens,
                         const std::set<std::string>& generated_tokens);

std::set<std::string> token_set(std::string_view text,
                                const Tokenizer& tokenizer);

bool rationale_correct(std::span<const std::string> annotated,
                       std::span<const std::string> generated,
                       double recall_threshold, const Tokenizer& tokenizer,
                       const SentenceMatchConfig& config);

struct LinkClassCounts {
  std::size_t rc_dc = 0;
  std::size_t rw_dw = 0;
  std::size_t rc_dw = 0;
  std::size_t rw_dc = 0;

  std::size_t total() const { return rc_dc + rw_dw + rc_dw + rw_dc; }
  bool operator==(const LinkClassCounts&) const = default;
};

struct LinkOutcome {
  bool rationale_correct = false;
  bool decision_correct = false;
};

LinkClassCounts classify_links(std::span<const LinkOutcome> outcomes);

// nullopt when the denominator is zero.
std::optional<double> rsq(const LinkClassCounts& counts);
std::optional<double> rsq_w(const LinkClassCounts& counts);
std::optional<double> rsq_c(const LinkClassCounts& counts);

// Decision accuracy of records produced in annotated-rationale mode.
// Throws ValidationError if any record used another mode or the sizes
// differ. nullopt on empty input.
std::optional<double> rcp(std::span<const PredictionRecord> records,
                          std::span<const std::string> golds);

// Plain accuracy over (predicted, gold) pairs; nullopt on empty input.
std::optional<double> r_acc(
    std::span<const std::pair<std::string, std::string>> judge_decisions);

enum class RecallSource { kSentence, kToken };

std::string to_string(RecallSource source);
RecallSource parse_recall_source(const std::string& name);

struct EvaluationConfig {
  SentenceMatchConfig match;
  double recall_threshold = 0.5;
  RecallSource recall_source = RecallSource::kSentence;
  // Null means the basic tokenizer.
  std::shared_ptr<const Tokenizer> tokenizer;

  const Tokenizer& tok() const;
};

// Per-example scores for an annotated example.
struct ScoredExample {
  std::string id;
  PrecisionRecall iou;
  PrecisionRecall tf1;
  bool decision_correct = false;

  double recall(RecallSource source) const {
    return source == RecallSource::kSentence ? iou.recall : tf1.recall;
  }
};

struct PredictionScores {
  std::vector<ScoredExample> scored;  // annotated examples only
  std::size_t num_examples = 0;
  std::size_t num_decisions_correct = 0;
};

// Requires predictions to carry the dataset's ids in the same order; throws
// ValidationError naming the first mismatch otherwise.
PredictionScores score_predictions(std::span<const Quadruple> dataset,
                                   std::span<const PredictionRecord> predictions,
                                   const EvaluationConfig& config);

// Generated sentences of a record: its resolved sentences when it carries
// marks, else the segmented free-text rationale.
std::vector<std::string> generated_sentences(const PredictionRecord& record,
                                             const SentenceList& passage);

struct SweepRow {
  double threshold = 0.5;
  LinkClassCounts counts;
  std::size_t rationale_correct = 0;
  std::optional<double> rsq;
  std::optional<double> rsq_w;
  std::optional<double> rsq_c;
};

std::vector<SweepRow> threshold_sweep(std::span<const ScoredExample> scored,
                                      std::span<const double> thresholds,
                                      RecallSource source = RecallSource::kSentence);

// threshold,rc_dc,rw_dw,rc_dw,rw_dc,rationale_correct,rsq,rsq_w,rsq_c;
// undefined ratios are empty fields.
void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows);

struct MetricReport {
  std::optional<double> accuracy;
  std::optional<double> iou_f1;
  std::optional<double> tf1;
  std::optional<double> rsq;
  std::optional<double> rsq_w;
  std::optional<double> rsq_c;
  std::optional<double> rcp;
  std::optional<double> r_acc;
  LinkClassCounts counts;
  std::size_t num_examples = 0;
  std::size_t num_scored = 0;
  // Config echo.
  double iou_threshold = 0.5;
  double recall_threshold = 0.5;
  std::string tokenizer_id;
  RecallSource recall_source = RecallSource::kSentence;
};

// Optional inputs: records from an annotated-rationale run (RCP) and judge
// records over generated rationales (R-Acc). Both must only reference ids
// present in the dataset.
MetricReport evaluate(std::span<const Quadruple> dataset,
                      std::span<const PredictionRecord> predictions,
                      const EvaluationConfig& config,
                      std::span<const PredictionRecord> rcp_records = {},
                      std::span<const PredictionRecord> judge_records = {});

nlohmann::ordered_json report_to_json(const MetricReport& report);
MetricReport report_from_json(const nlohmann::json& doc);

// Shortest round-trip decimal rendering.
std::string format_double(double value);

}  // namespace rlk

#endif  // RLK_METRICS_H_
