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

#include "rlk/config.h"

#include <set>

#include "rlk/errors.h"

namespace rlk {

namespace {

using nlohmann::json;

template <typename T>
void read_field(const json& doc, const char* key, T& out) {
  auto it = doc.find(key);
  if (it == doc.end()) return;
  try {
    out = it->get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config field '") + key + "': " + e.what());
  }
}

}  // namespace

RunConfig run_config_from_json(const json& doc) {
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  static const std::set<std::string> kKnown = {
      "manifest",       "split",          "templates",     "sm_on",
      "ral_on",         "segment_count",  "max_tokens",    "tokenizer",
      "endpoint",       "decision_mode",  "iou_threshold", "recall_threshold",
      "recall_source",  "thresholds",     "parallelism",   "seed",
      "subsample_fraction", "retry_attempts", "retry_backoff_ms"};
  for (const auto& [key, value] : doc.items()) {
    if (!kKnown.count(key)) throw ConfigError("unknown config field '" + key + "'");
  }
  RunConfig c;
  read_field(doc, "manifest", c.manifest);
  read_field(doc, "split", c.split);
  read_field(doc, "templates", c.templates);
  read_field(doc, "sm_on", c.sm_on);
  read_field(doc, "ral_on", c.ral_on);
  read_field(doc, "segment_count", c.segment_count);
  read_field(doc, "max_tokens", c.max_tokens);
  read_field(doc, "tokenizer", c.tokenizer);
  read_field(doc, "decision_mode", c.decision_mode);
  read_field(doc, "iou_threshold", c.iou_threshold);
  read_field(doc, "recall_threshold", c.recall_threshold);
  read_field(doc, "recall_source", c.recall_source);
  read_field(doc, "thresholds", c.thresholds);
  read_field(doc, "parallelism", c.parallelism);
  read_field(doc, "seed", c.seed);
  read_field(doc, "retry_attempts", c.retry_attempts);
  read_field(doc, "retry_backoff_ms", c.retry_backoff_ms);
  if (auto it = doc.find("subsample_fraction"); it != doc.end() && !it->is_null()) {
    double f = 0.0;
    read_field(doc, "subsample_fraction", f);
    c.subsample_fraction = f;
  }
  if (auto it = doc.find("endpoint"); it != doc.end()) {
    const json& e = *it;
    if (!e.is_object()) throw ConfigError("config field 'endpoint' must be an object");
    std::string kind = "mock";
    read_field(e, "kind", kind);
    if (kind == "mock") {
      c.endpoint.kind = EndpointKind::kMock;
    } else if (kind == "http") {
      c.endpoint.kind = EndpointKind::kHttp;
    } else {
      throw ConfigError("endpoint kind must be mock or http, got '" + kind + "'");
    }
    read_field(e, "address", c.endpoint.address);
    read_field(e, "mock_table", c.endpoint.mock_table);
    long long timeout_ms = c.endpoint.timeout.count();
    read_field(e, "timeout_ms", timeout_ms);
    c.endpoint.timeout = std::chrono::milliseconds(timeout_ms);
    read_field(e, "max_output_tokens", c.endpoint.max_output_tokens);
  }
  return c;
}

nlohmann::ordered_json run_config_to_json(const RunConfig& c) {
  nlohmann::ordered_json out;
  out["manifest"] = c.manifest;
  out["split"] = c.split;
  out["templates"] = c.templates;
  out["sm_on"] = c.sm_on;
  out["ral_on"] = c.ral_on;
  out["segment_count"] = c.segment_count;
  out["max_tokens"] = c.max_tokens;
  out["tokenizer"] = c.tokenizer;
  nlohmann::ordered_json e;
  e["kind"] = c.endpoint.kind == EndpointKind::kMock ? "mock" : "http";
  e["address"] = c.endpoint.address;
  e["mock_table"] = c.endpoint.mock_table;
  e["timeout_ms"] = c.endpoint.timeout.count();
  e["max_output_tokens"] = c.endpoint.max_output_tokens;
  out["endpoint"] = e;
  out["decision_mode"] = c.decision_mode;
  out["iou_threshold"] = c.iou_threshold;
  out["recall_threshold"] = c.recall_threshold;
  out["recall_source"] = c.recall_source;
  out["thresholds"] = c.thresholds;
  out["parallelism"] = c.parallelism;
  out["seed"] = c.seed;
  out["subsample_fraction"] = c.subsample_fraction
                                  ? nlohmann::ordered_json(*c.subsample_fraction)
                                  : nlohmann::ordered_json(nullptr);
  out["retry_attempts"] = c.retry_attempts;
  out["retry_backoff_ms"] = c.retry_backoff_ms;
  return out;
}

void validate_run_config(const RunConfig& c) {
  if (c.segment_count < 1) throw ConfigError("segment_count must be >= 1");
  if (c.max_tokens < 1) throw ConfigError("max_tokens must be >= 1");
  if (c.parallelism < 1) throw ConfigError("parallelism must be >= 1");
  if (c.retry_attempts < 1) throw ConfigError("retry_attempts must be >= 1");
  if (c.retry_backoff_ms < 0) throw ConfigError("retry_backoff_ms must be >= 0");
  validate_threshold(c.iou_threshold, "iou_threshold");
  validate_threshold(c.recall_threshold, "recall_threshold");
  for (double t : c.thresholds) validate_threshold(t, "threshold");
  if (c.subsample_fraction) {
    double f = *c.subsample_fraction;
    if (!(f > 0.0 && f <= 1.0)) {
      throw ConfigError("subsample_fraction must be in (0, 1]");
    }
  }
  parse_decision_mode(c.decision_mode);
  parse_recall_source(c.recall_source);
  if (c.tokenizer != "basic" && c.tokenizer != "char" &&
      c.tokenizer.rfind("vocab:", 0) != 0) {
    throw ConfigError("unknown tokenizer '" + c.tokenizer + "'");
  }
}

PipelineConfig make_pipeline_config(const RunConfig& c,
                                    const DatasetManifest& manifest) {
  PipelineConfig p;
  p.templates =
      c.templates.empty() ? default_templates(manifest.name) : load_templates(c.templates);
  p.label_vocabulary = manifest.label_vocabulary;
  p.sm_on = c.sm_on;
  p.fid = {c.segment_count, c.max_tokens};
  p.decision_mode = parse_decision_mode(c.decision_mode);
  p.parallelism = c.parallelism;
  p.retry = {c.retry_attempts, std::chrono::milliseconds(c.retry_backoff_ms)};
  p.max_output_tokens = c.endpoint.max_output_tokens;
  p.tokenizer = make_tokenizer(c.tokenizer);
  return p;
}

EvaluationConfig make_evaluation_config(const RunConfig& c) {
  EvaluationConfig e;
  e.match.iou_threshold = c.iou_threshold;
  e.recall_threshold = c.recall_threshold;
  e.recall_source = parse_recall_source(c.recall_source);
  e.tokenizer = make_tokenizer(c.tokenizer);
  return e;
}

}  // namespace rlk
