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

#include <algorithm>
#include <charconv>
#include <map>
#include <ostream>

#include "rlk/errors.h"

namespace rlk {

namespace {

using nlohmann::json;

PrecisionRecall make_scores(std::size_t matched, std::size_t annotated,
                            std::size_t generated) {
  PrecisionRecall out;
  out.matched = matched;
  if (annotated == 0 && generated == 0) {
    out.precision = out.recall = out.f1 = 1.0;
    return out;
  }
  out.precision = generated == 0 ? 0.0 : static_cast<double>(matched) / generated;
  out.recall = annotated == 0 ? 0.0 : static_cast<double>(matched) / annotated;
  double sum = out.precision + out.recall;
  out.f1 = sum == 0.0 ? 0.0 : 2.0 * out.precision * out.recall / sum;
  return out;
}

std::optional<double> ratio(std::size_t num, std::size_t den) {
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

bool augment(std::size_t left, const std::vector<std::vector<bool>>& adjacency,
             std::vector<bool>& visited, std::vector<std::size_t>& match_right,
             std::size_t unmatched) {
  for (std::size_t r = 0; r < visited.size(); ++r) {
    if (!adjacency[left][r] || visited[r]) continue;
    visited[r] = true;
    if (match_right[r] == unmatched ||
        augment(match_right[r], adjacency, visited, match_right, unmatched)) {
      match_right[r] = left;
      return true;
    }
  }
  return false;
}

json optional_json(const std::optional<double>& v) {
  return v ? json(*v) : json(nullptr);
}

std::optional<double> optional_from(const json& doc, const char* field) {
  auto it = doc.find(field);
  if (it == doc.end() || it->is_null()) return std::nullopt;
  return it->get<double>();
}

}  // namespace

bool exceeds_threshold(double value, double threshold) {
  if (threshold >= 1.0) return value >= 1.0;
  return value > threshold;
}

void validate_threshold(double threshold, const std::string& name) {
  if (!(threshold > 0.0 && threshold <= 1.0)) {
    throw ConfigError(name + " must be in (0, 1], got " + format_double(threshold));
  }
}

std::size_t longest_common_substring(std::span<const std::string> a,
                                     std::span<const std::string> b) {
  if (a.empty() || b.empty()) return 0;
  // run[j] = length of the common run ending at a[i-1], b[j-1].
  std::vector<std::size_t> run(b.size() + 1, 0), prev(b.size() + 1, 0);
  std::size_t best = 0;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      run[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : 0;
      best = std::max(best, run[j]);
    }
    std::swap(run, prev);
  }
  return best;
}

double sentence_overlap(std::span<const std::string> a,
                        std::span<const std::string> b) {
  std::size_t inter = longest_common_substring(a, b);
  std::size_t uni = a.size() + b.size() - inter;
  if (uni == 0) return 0.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

bool sentence_match(std::string_view a, std::string_view b,
                    const Tokenizer& tokenizer,
                    const SentenceMatchConfig& config) {
  std::vector<std::string> ta = tokenizer.words(a);
  std::vector<std::string> tb = tokenizer.words(b);
  if (ta.empty() && tb.empty()) return false;
  return exceeds_threshold(sentence_overlap(ta, tb), config.iou_threshold);
}

std::size_t max_bipartite_matching(
    const std::vector<std::vector<bool>>& adjacency, std::size_t right_size) {
  const std::size_t unmatched = adjacency.size();
  std::vector<std::size_t> match_right(right_size, unmatched);
  std::size_t matched = 0;
  for (std::size_t left = 0; left < adjacency.size(); ++left) {
    std::vector<bool> visited(right_size, false);
    if (augment(left, adjacency, visited, match_right, unmatched)) ++matched;
  }
  return matched;
}

PrecisionRecall iou_f1(std::span<const std::string> annotated,
                       std::span<const std::string> generated,
                       const Tokenizer& tokenizer,
                       const SentenceMatchConfig& config) {
  std::vector<std::vector<std::string>> gen_tokens;
  gen_tokens.reserve(generated.size());
  for (const auto& g : generated) gen_tokens.push_back(tokenizer.words(g));
  std::vector<std::vector<bool>> adjacency(annotated.size(),
                                           std::vector<bool>(generated.size()));
  for (std::size_t i = 0; i < annotated.size(); ++i) {
    std::vector<std::string> a = tokenizer.words(annotated[i]);
    for (std::size_t j = 0; j < generated.size(); ++j) {
      if (a.empty() && gen_tokens[j].empty()) continue;
      adjacency[i][j] = exceeds_threshold(sentence_overlap(a, gen_tokens[j]),
                                          config.iou_threshold);
    }
  }
  std::size_t matched = max_bipartite_matching(adjacency, generated.size());
  return make_scores(matched, annotated.size(), generated.size());
}

PrecisionRecall token_f1(const std::set<std::string>& annotated_tokens,
                         const std::set<std::string>& generated_tokens) {
  std::size_t common = 0;
  for (const auto& t : generated_tokens) common += annotated_tokens.count(t);
  return make_scores(common, annotated_tokens.size(), generated_tokens.size());
}

std::set<std::string> token_set(std::string_view text,
                                const Tokenizer& tokenizer) {
  std::vector<std::string> words = tokenizer.words(text);
  return {words.begin(), words.end()};
}

bool rationale_correct(std::span<const std::string> annotated,
                       std::span<const std::string> generated,
                       double recall_threshold, const Tokenizer& tokenizer,
                       const SentenceMatchConfig& config) {
  return exceeds_threshold(iou_f1(annotated, generated, tokenizer, config).recall,
                           recall_threshold);
}

LinkClassCounts classify_links(std::span<const LinkOutcome> outcomes) {
  LinkClassCounts counts;
  for (const auto& o : outcomes) {
    if (o.rationale_correct && o.decision_correct) {
      ++counts.rc_dc;
    } else if (!o.rationale_correct && !o.decision_correct) {
      ++counts.rw_dw;
    } else if (o.rationale_correct) {
      ++counts.rc_dw;
    } else {
      ++counts.rw_dc;
    }
  }
  return counts;
}

std::optional<double> rsq(const LinkClassCounts& c) {
  return ratio(c.rc_dc + c.rw_dw, c.total());
}

std::optional<double> rsq_w(const LinkClassCounts& c) {
  return ratio(c.rc_dw, c.rc_dc + c.rc_dw);
}

std::optional<double> rsq_c(const LinkClassCounts& c) {
  return ratio(c.rw_dc, c.rw_dw + c.rw_dc);
}

std::optional<double> rcp(std::span<const PredictionRecord> records,
                          std::span<const std::string> golds) {
  if (records.size() != golds.size()) {
    throw ValidationError("rcp: " + std::to_string(records.size()) +
                          " records but " + std::to_string(golds.size()) +
                          " gold labels");
  }
  std::size_t correct = 0;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (records[i].decision_input_mode != DecisionInputMode::kAnnotatedRationale) {
      throw ValidationError("rcp: record '" + records[i].example_id +
                            "' was produced in mode " +
                            to_string(records[i].decision_input_mode));
    }
    if (records[i].decision && *records[i].decision == golds[i]) ++correct;
  }
  return ratio(correct, records.size());
}

std::optional<double> r_acc(
    std::span<const std::pair<std::string, std::string>> judge_decisions) {
  std::size_t correct = 0;
  for (const auto& [predicted, gold] : judge_decisions) {
    if (predicted == gold) ++correct;
  }
  return ratio(correct, judge_decisions.size());
}

std::string to_string(RecallSource source) {
  return source == RecallSource::kSentence ? "sentence" : "token";
}

RecallSource parse_recall_source(const std::string& name) {
  if (name == "sentence") return RecallSource::kSentence;
  if (name == "token") return RecallSource::kToken;
  throw ConfigError("unknown recall source '" + name + "'");
}

const Tokenizer& EvaluationConfig::tok() const {
  static const BasicTokenizer kBasic;
  return tokenizer ? *tokenizer : kBasic;
}

std::vector<std::string> generated_sentences(const PredictionRecord& record,
                                             const SentenceList& passage) {
  std::vector<std::string> out;
  if (record.generated_indices) {
    for (std::size_t index : record.resolved_sentence_set) {
      if (index < passage.size()) out.push_back(passage[index].text);
    }
    return out;
  }
  if (record.generated_rationale_text.find_first_not_of(" \t\r\n") ==
      std::string::npos) {
    return out;
  }
  return split_sentences(record.generated_rationale_text).texts();
}

PredictionScores score_predictions(std::span<const Quadruple> dataset,
                                   std::span<const PredictionRecord> predictions,
                                   const EvaluationConfig& config) {
  for (std::size_t i = 0; i < std::max(dataset.size(), predictions.size()); ++i) {
    std::string want = i < dataset.size() ? dataset[i].id : "<none>";
    std::string got = i < predictions.size() ? predictions[i].example_id : "<none>";
    if (want != got) {
      throw ValidationError("prediction/dataset id mismatch at position " +
                            std::to_string(i) + ": dataset '" + want +
                            "', predictions '" + got + "'");
    }
  }
  const Tokenizer& tok = config.tok();
  PredictionScores out;
  out.num_examples = dataset.size();
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const Quadruple& example = dataset[i];
    const PredictionRecord& record = predictions[i];
    bool decision_correct = record.decision && *record.decision == example.label;
    out.num_decisions_correct += decision_correct;
    if (!example.annotated) continue;
    SentenceList passage = split_sentences(example.passage);
    std::vector<std::string> annotated;
    for (std::size_t index : example.rationale_sentences) {
      annotated.push_back(passage[index].text);
    }
    std::vector<std::string> generated = generated_sentences(record, passage);
    ScoredExample s;
    s.id = example.id;
    s.iou = iou_f1(annotated, generated, tok, config.match);
    s.tf1 = token_f1(token_set(annotated_rationale_text(example, passage), tok),
                     token_set(record.generated_rationale_text, tok));
    s.decision_correct = decision_correct;
    out.scored.push_back(std::move(s));
  }
  return out;
}

std::vector<SweepRow> threshold_sweep(std::span<const ScoredExample> scored,
                                      std::span<const double> thresholds,
                                      RecallSource source) {
  std::vector<SweepRow> rows;
  for (double threshold : thresholds) {
    validate_threshold(threshold, "threshold");
    std::vector<LinkOutcome> outcomes;
    outcomes.reserve(scored.size());
    SweepRow row;
    row.threshold = threshold;
    for (const auto& s : scored) {
      bool correct = exceeds_threshold(s.recall(source), threshold);
      row.rationale_correct += correct;
      outcomes.push_back({correct, s.decision_correct});
    }
    row.counts = classify_links(outcomes);
    row.rsq = rsq(row.counts);
    row.rsq_w = rsq_w(row.counts);
    row.rsq_c = rsq_c(row.counts);
    rows.push_back(row);
  }
  return rows;
}

std::string format_double(double value) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return ec == std::errc() ? std::string(buf, end) : std::to_string(value);
}

void write_sweep_csv(std::ostream& out, std::span<const SweepRow> rows) {
  auto field = [](const std::optional<double>& v) {
    return v ? format_double(*v) : std::string();
  };
  out << "threshold,rc_dc,rw_dw,rc_dw,rw_dc,rationale_correct,rsq,rsq_w,rsq_c\n";
  for (const auto& r : rows) {
    out << format_double(r.threshold) << ',' << r.counts.rc_dc << ','
        << r.counts.rw_dw << ',' << r.counts.rc_dw << ',' << r.counts.rw_dc
        << ',' << r.rationale_correct << ',' << field(r.rsq) << ','
        << field(r.rsq_w) << ',' << field(r.rsq_c) << '\n';
  }
}

MetricReport evaluate(std::span<const Quadruple> dataset,
                      std::span<const PredictionRecord> predictions,
                      const EvaluationConfig& config,
                      std::span<const PredictionRecord> rcp_records,
                      std::span<const PredictionRecord> judge_records) {
  validate_threshold(config.match.iou_threshold, "iou_threshold");
  validate_threshold(config.recall_threshold, "recall_threshold");
  PredictionScores scores = score_predictions(dataset, predictions, config);

  MetricReport report;
  report.num_examples = scores.num_examples;
  report.num_scored = scores.scored.size();
  report.accuracy = ratio(scores.num_decisions_correct, scores.num_examples);
  if (!scores.scored.empty()) {
    double iou_sum = 0.0, tf1_sum = 0.0;
    for (const auto& s : scores.scored) {
      iou_sum += s.iou.f1;
      tf1_sum += s.tf1.f1;
    }
    double n = static_cast<double>(scores.scored.size());
    report.iou_f1 = iou_sum / n;
    report.tf1 = tf1_sum / n;
  }
  double threshold = config.recall_threshold;
  SweepRow row = threshold_sweep(scores.scored, std::span(&threshold, 1),
                                 config.recall_source)
                     .front();
  report.counts = row.counts;
  report.rsq = row.rsq;
  report.rsq_w = row.rsq_w;
  report.rsq_c = row.rsq_c;

  std::map<std::string, std::string> gold;
  for (const auto& q : dataset) gold.emplace(q.id, q.label);
  auto gold_of = [&](const PredictionRecord& r, const char* what) {
    auto it = gold.find(r.example_id);
    if (it == gold.end()) {
      throw ValidationError(std::string(what) + " record '" + r.example_id +
                            "' is not in the dataset");
    }
    return it->second;
  };
  if (!rcp_records.empty()) {
    std::vector<std::string> golds;
    for (const auto& r : rcp_records) golds.push_back(gold_of(r, "rcp"));
    report.rcp = rcp(rcp_records, golds);
  }
  if (!judge_records.empty()) {
    std::vector<std::pair<std::string, std::string>> pairs;
    for (const auto& r : judge_records) {
      pairs.emplace_back(r.decision.value_or(kUnparseable), gold_of(r, "judge"));
    }
    report.r_acc = r_acc(pairs);
  }

  report.iou_threshold = config.match.iou_threshold;
  report.recall_threshold = config.recall_threshold;
  report.tokenizer_id = config.tok().id();
  report.recall_source = config.recall_source;
  return report;
}

nlohmann::ordered_json report_to_json(const MetricReport& r) {
  nlohmann::ordered_json out;
  out["accuracy"] = optional_json(r.accuracy);
  out["iou_f1"] = optional_json(r.iou_f1);
  out["tf1"] = optional_json(r.tf1);
  out["rsq"] = optional_json(r.rsq);
  out["rsq_w"] = optional_json(r.rsq_w);
  out["rsq_c"] = optional_json(r.rsq_c);
  out["rcp"] = optional_json(r.rcp);
  out["r_acc"] = optional_json(r.r_acc);
  nlohmann::ordered_json counts;
  counts["rc_dc"] = r.counts.rc_dc;
  counts["rw_dw"] = r.counts.rw_dw;
  counts["rc_dw"] = r.counts.rc_dw;
  counts["rw_dc"] = r.counts.rw_dc;
  out["counts"] = counts;
  out["num_examples"] = r.num_examples;
  out["num_scored"] = r.num_scored;
  nlohmann::ordered_json config;
  config["iou_threshold"] = r.iou_threshold;
  config["recall_threshold"] = r.recall_threshold;
  config["tokenizer"] = r.tokenizer_id;
  config["recall_source"] = to_string(r.recall_source);
  out["config"] = config;
  return out;
}

MetricReport report_from_json(const json& doc) {
  MetricReport r;
  try {
    r.accuracy = optional_from(doc, "accuracy");
    r.iou_f1 = optional_from(doc, "iou_f1");
    r.tf1 = optional_from(doc, "tf1");
    r.rsq = optional_from(doc, "rsq");
    r.rsq_w = optional_from(doc, "rsq_w");
    r.rsq_c = optional_from(doc, "rsq_c");
    r.rcp = optional_from(doc, "rcp");
    r.r_acc = optional_from(doc, "r_acc");
    const json& counts = doc.at("counts");
    r.counts.rc_dc = counts.at("rc_dc").get<std::size_t>();
    r.counts.rw_dw = counts.at("rw_dw").get<std::size_t>();
    r.counts.rc_dw = counts.at("rc_dw").get<std::size_t>();
    r.counts.rw_dc = counts.at("rw_dc").get<std::size_t>();
    r.num_examples = doc.at("num_examples").get<std::size_t>();
    r.num_scored = doc.at("num_scored").get<std::size_t>();
    const json& config = doc.at("config");
    r.iou_threshold = config.at("iou_threshold").get<double>();
    r.recall_threshold = config.at("recall_threshold").get<double>();
    r.tokenizer_id = config.at("tokenizer").get<std::string>();
    r.recall_source = parse_recall_source(config.at("recall_source").get<std::string>());
  } catch (const json::exception& e) {
    throw ParseError(std::string("metric report: ") + e.what());
  }
  return r;
}

}  // namespace rlk
