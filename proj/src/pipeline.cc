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

#include "rlk/pipeline.h"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <exception>
#include <fstream>
#include <istream>
#include <ostream>
#include <thread>

#include "rlk/errors.h"

namespace rlk {

namespace {

using nlohmann::json;

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return out;
}

std::string normalize_label(std::string_view s) {
  std::string out;
  bool pending_space = false;
  for (char c : s) {
    auto u = static_cast<unsigned char>(c);
    if (std::ispunct(u)) continue;
    if (std::isspace(u)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(static_cast<char>(std::tolower(u)));
  }
  return out;
}

StagePrompt pack_prompt(const std::string& prefix,
                        const SentenceList& sentences,
                        const MarkedPassage* marked,
                        const PipelineConfig& config) {
  FidSegments fid =
      marked ? build_fid_segments(prefix, *marked, config.tok(),
                                  config.fid.max_tokens, config.fid.segment_count)
             : build_fid_segments(prefix, sentences, config.tok(),
                                  config.fid.max_tokens, config.fid.segment_count);
  StagePrompt out;
  out.truncated = fid.truncated;
  out.segments = std::move(fid.segments);
  for (std::size_t i = 0; i < out.segments.size(); ++i) {
    if (i > 0) out.prompt += kSegmentSeparator;
    out.prompt += out.segments[i];
  }
  return out;
}

GeneratorRequest make_request(const Quadruple& example, std::string stage,
                              StagePrompt prompt,
                              const PipelineConfig& config) {
  GeneratorRequest request;
  request.example_id = example.id;
  request.stage = std::move(stage);
  request.prompt = std::move(prompt.prompt);
  request.segments = std::move(prompt.segments);
  request.max_tokens = config.max_output_tokens;
  return request;
}

// Passage sentences whose text equals one of the generated sentences.
std::vector<std::size_t> exact_sentence_matches(const SentenceList& passage,
                                                const std::string& rationale) {
  std::vector<std::size_t> out;
  if (trim(rationale).empty()) return out;
  SentenceList generated = split_sentences(rationale);
  for (const auto& s : passage.sentences) {
    for (const auto& g : generated.sentences) {
      if (g.text == s.text) {
        out.push_back(s.index);
        break;
      }
    }
  }
  return out;
}

bool needs_stage1(DecisionInputMode mode) {
  return mode == DecisionInputMode::kRationaleOnly ||
         mode == DecisionInputMode::kRationalePlusPassage;
}

PredictionRecord failure_record(const Quadruple& example,
                                DecisionInputMode mode,
                                const std::string& error) {
  PredictionRecord record;
  record.example_id = example.id;
  record.decision = kUnparseable;
  record.decision_input_mode = mode;
  record.diagnostics.error = error;
  return record;
}

PredictionRecord run_one(const Quadruple& example,
                         const PipelineConfig& config, Generator& generator) {
  PredictionRecord record;
  record.example_id = example.id;
  record.decision_input_mode = config.decision_mode;
  std::string rationale;
  if (needs_stage1(config.decision_mode)) {
    SelfAttribution stage1 = run_self_attribution(example, config, generator);
    record.generated_indices = stage1.indices;
    record.generated_rationale_text = stage1.rationale_text;
    record.resolved_sentence_set = stage1.sentence_set;
    record.raw_stage1 = stage1.raw;
    record.diagnostics.dropped_indices = stage1.dropped;
    record.diagnostics.truncated = stage1.truncated;
    record.diagnostics.unparseable_rationale = stage1.unparseable;
    rationale = stage1.rationale_text;
  } else if (config.decision_mode == DecisionInputMode::kAnnotatedRationale) {
    rationale =
        annotated_rationale_text(example, split_sentences(example.passage));
  }
  DecisionResult stage2 =
      run_decision(example, rationale, config.decision_mode, config, generator);
  record.decision = stage2.decision;
  record.raw_stage2 = stage2.raw;
  record.diagnostics.truncated = record.diagnostics.truncated || stage2.truncated;
  return record;
}

template <typename Fn>
std::vector<PredictionRecord> run_batch(std::span<const Quadruple> dataset,
                                        const PipelineConfig& config,
                                        DecisionInputMode mode, Fn&& fn) {
  validate_config(config);
  std::vector<PredictionRecord> out(dataset.size());
  parallel_for(dataset.size(), config.parallelism, [&](std::size_t i) {
    try {
      out[i] = fn(i);
    } catch (const std::exception& e) {
      out[i] = failure_record(dataset[i], mode, e.what());
    }
  });
  return out;
}

}  // namespace

PromptTemplates default_templates(const std::string& dataset_name) {
  std::string name = lower(dataset_name);
  if (name.find("fever") != std::string::npos) {
    return {"Extract the rationale from the passage to assess the claim",
            "Refer to the following information to judge the claim"};
  }
  return {"Extract the rationale from the passage to answer the question",
          "Refer to the following information to answer the question"};
}

PromptTemplates templates_from_json(const json& doc) {
  PromptTemplates t;
  if (!doc.is_object()) throw ConfigError("templates must be a JSON object");
  for (const char* field : {"t_rationale", "t_answer"}) {
    if (!doc.contains(field) || !doc[field].is_string() ||
        doc[field].get<std::string>().empty()) {
      throw ConfigError(std::string("templates: '") + field +
                        "' must be a non-empty string");
    }
  }
  t.t_rationale = doc["t_rationale"].get<std::string>();
  t.t_answer = doc["t_answer"].get<std::string>();
  return t;
}

PromptTemplates load_templates(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open templates file: " + path.string());
  json doc = json::parse(in, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded()) {
    throw ParseError("templates file is not valid JSON: " + path.string());
  }
  return templates_from_json(doc);
}

nlohmann::ordered_json templates_to_json(const PromptTemplates& t) {
  nlohmann::ordered_json out;
  out["t_rationale"] = t.t_rationale;
  out["t_answer"] = t.t_answer;
  return out;
}

std::string to_string(DecisionInputMode mode) {
  switch (mode) {
    case DecisionInputMode::kRationaleOnly: return "rationale_only";
    case DecisionInputMode::kRationalePlusPassage: return "rationale_plus_passage";
    case DecisionInputMode::kAnnotatedRationale: return "annotated_rationale";
    case DecisionInputMode::kPassageOnly: return "passage_only";
  }
  return "rationale_only";
}

DecisionInputMode parse_decision_mode(const std::string& name) {
  for (auto mode : {DecisionInputMode::kRationaleOnly,
                    DecisionInputMode::kRationalePlusPassage,
                    DecisionInputMode::kAnnotatedRationale,
                    DecisionInputMode::kPassageOnly}) {
    if (to_string(mode) == name) return mode;
  }
  throw ConfigError("unknown decision mode '" + name + "'");
}

const Tokenizer& PipelineConfig::tok() const {
  static const BasicTokenizer kBasic;
  return tokenizer ? *tokenizer : kBasic;
}

void validate_config(const PipelineConfig& config) {
  if (config.templates.t_rationale.empty() || config.templates.t_answer.empty()) {
    throw ConfigError("prompt templates must be non-empty");
  }
  if (config.label_vocabulary.empty()) {
    throw ConfigError("label vocabulary is empty");
  }
  if (config.fid.segment_count < 1) {
    throw ConfigError("segment_count must be >= 1");
  }
  if (config.fid.max_tokens < 1) throw ConfigError("max_tokens must be >= 1");
  if (config.parallelism < 1) throw ConfigError("parallelism must be >= 1");
  if (config.max_output_tokens < 1) {
    throw ConfigError("max_output_tokens must be >= 1");
  }
}

StagePrompt build_rationale_prompt(const Quadruple& example,
                                   const SentenceList& sentences,
                                   const PipelineConfig& config) {
  std::string prefix = config.templates.t_rationale + "\nquestion: " +
                       example.question + "\npassage: ";
  if (config.sm_on) {
    MarkedPassage marked = mark_sentences(sentences);
    return pack_prompt(prefix, sentences, &marked, config);
  }
  return pack_prompt(prefix, sentences, nullptr, config);
}

StagePrompt build_decision_prompt(const Quadruple& example,
                                  const SentenceList& sentences,
                                  const std::string& rationale_text,
                                  DecisionInputMode mode,
                                  const PipelineConfig& config) {
  std::string header =
      config.templates.t_answer + "\nquestion: " + example.question;
  if (mode != DecisionInputMode::kPassageOnly) {
    header += "\nrationale: " + rationale_text;
  }
  if (mode == DecisionInputMode::kRationaleOnly ||
      mode == DecisionInputMode::kAnnotatedRationale) {
    StagePrompt out;
    out.prompt = header;
    out.segments = {header};
    return out;
  }
  return pack_prompt(header + "\npassage: ", sentences, nullptr, config);
}

std::string match_label(std::string_view output,
                        std::span<const std::string> labels) {
  std::string normalized = normalize_label(output);
  if (normalized.empty()) return kUnparseable;
  for (const auto& label : labels) {
    if (normalize_label(label) == normalized) return label;
  }
  return kUnparseable;
}

nlohmann::ordered_json prediction_to_json(const PredictionRecord& r) {
  nlohmann::ordered_json out;
  out["example_id"] = r.example_id;
  out["generated_indices"] = r.generated_indices
                                 ? nlohmann::ordered_json(*r.generated_indices)
                                 : nlohmann::ordered_json(nullptr);
  out["generated_rationale_text"] = r.generated_rationale_text;
  out["resolved_sentence_set"] = r.resolved_sentence_set;
  out["decision"] = r.decision ? nlohmann::ordered_json(*r.decision)
                               : nlohmann::ordered_json(nullptr);
  out["decision_input_mode"] = to_string(r.decision_input_mode);
  out["raw_stage1"] = r.raw_stage1;
  out["raw_stage2"] = r.raw_stage2;
  nlohmann::ordered_json diag;
  diag["dropped_indices"] = r.diagnostics.dropped_indices;
  diag["truncated"] = r.diagnostics.truncated;
  diag["unparseable_rationale"] = r.diagnostics.unparseable_rationale;
  diag["error"] = r.diagnostics.error;
  out["diagnostics"] = diag;
  return out;
}

PredictionRecord prediction_from_json(const json& doc) {
  PredictionRecord r;
  try {
    r.example_id = doc.at("example_id").get<std::string>();
    const json& indices = doc.at("generated_indices");
    if (!indices.is_null()) {
      r.generated_indices = indices.get<std::vector<std::uint64_t>>();
    }
    r.generated_rationale_text = doc.at("generated_rationale_text").get<std::string>();
    r.resolved_sentence_set =
        doc.at("resolved_sentence_set").get<std::vector<std::size_t>>();
    const json& decision = doc.at("decision");
    if (!decision.is_null()) r.decision = decision.get<std::string>();
    r.decision_input_mode =
        parse_decision_mode(doc.at("decision_input_mode").get<std::string>());
    r.raw_stage1 = doc.value("raw_stage1", "");
    r.raw_stage2 = doc.value("raw_stage2", "");
    if (auto it = doc.find("diagnostics"); it != doc.end()) {
      r.diagnostics.dropped_indices = it->value("dropped_indices", std::size_t{0});
      r.diagnostics.truncated = it->value("truncated", false);
      r.diagnostics.unparseable_rationale = it->value("unparseable_rationale", false);
      r.diagnostics.error = it->value("error", "");
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("prediction record: ") + e.what());
  } catch (const ConfigError& e) {
    throw ParseError(std::string("prediction record: ") + e.what());
  }
  return r;
}

void write_predictions(std::ostream& out,
                       std::span<const PredictionRecord> records) {
  for (const auto& r : records) out << prediction_to_json(r).dump() << '\n';
}

std::vector<PredictionRecord> read_predictions(std::istream& in) {
  std::vector<PredictionRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json doc = json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (doc.is_discarded() || !doc.is_object()) {
      throw ParseError("malformed prediction record", line_no);
    }
    try {
      out.push_back(prediction_from_json(doc));
    } catch (const ParseError& e) {
      throw ParseError(e.what(), line_no);
    }
  }
  return out;
}

std::vector<PredictionRecord> load_predictions(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open predictions: " + path.string());
  return read_predictions(in);
}

SelfAttribution run_self_attribution(const Quadruple& example,
                                     const PipelineConfig& config,
                                     Generator& generator) {
  SentenceList sentences = split_sentences(example.passage);
  StagePrompt prompt = build_rationale_prompt(example, sentences, config);
  SelfAttribution out;
  out.truncated = prompt.truncated;
  GeneratorRequest request =
      make_request(example, "rationale", std::move(prompt), config);
  out.raw = generate_with_retry(generator, request, config.retry).text;

  if (config.sm_on) {
    std::vector<std::uint64_t> marks = parse_marks(out.raw);
    out.unparseable = marks.empty();
    ResolvedRationale resolved = resolve_indices(mark_sentences(sentences), marks);
    out.indices = std::move(marks);
    out.rationale_text = std::move(resolved.text);
    out.sentence_set = std::move(resolved.indices);
    out.dropped = resolved.dropped;
  } else {
    out.rationale_text = trim(out.raw);
    out.sentence_set = exact_sentence_matches(sentences, out.rationale_text);
  }
  return out;
}

DecisionResult run_decision(const Quadruple& example,
                            const std::string& rationale_text,
                            DecisionInputMode mode,
                            const PipelineConfig& config,
                            Generator& generator) {
  SentenceList sentences = split_sentences(example.passage);
  StagePrompt prompt =
      build_decision_prompt(example, sentences, rationale_text, mode, config);
  DecisionResult out;
  out.truncated = prompt.truncated;
  GeneratorRequest request =
      make_request(example, "decision", std::move(prompt), config);
  out.raw = generate_with_retry(generator, request, config.retry).text;
  out.decision = match_label(out.raw, config.label_vocabulary);
  return out;
}

void parallel_for(std::size_t n, std::size_t parallelism,
                  const std::function<void(std::size_t)>& fn) {
  std::size_t workers = std::min(std::max<std::size_t>(1, parallelism), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> threads;
  threads.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    threads.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) fn(i);
    });
  }
}

std::vector<PredictionRecord> run_pipeline(std::span<const Quadruple> dataset,
                                           const PipelineConfig& config,
                                           Generator& generator) {
  return run_batch(dataset, config, config.decision_mode, [&](std::size_t i) {
    return run_one(dataset[i], config, generator);
  });
}

std::vector<PredictionRecord> run_judge(
    std::span<const Quadruple> dataset,
    std::span<const PredictionRecord> rationales, const PipelineConfig& config,
    Generator& generator) {
  if (rationales.size() != dataset.size()) {
    throw ValidationError("judge input has " + std::to_string(rationales.size()) +
                          " rationales for " + std::to_string(dataset.size()) +
                          " examples");
  }
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    if (rationales[i].example_id != dataset[i].id) {
      throw ValidationError("judge input id mismatch at position " +
                            std::to_string(i) + ": '" +
                            rationales[i].example_id + "' vs '" +
                            dataset[i].id + "'");
    }
  }
  const auto mode = DecisionInputMode::kRationaleOnly;
  return run_batch(dataset, config, mode, [&](std::size_t i) {
    PredictionRecord record = rationales[i];
    DecisionResult stage2 = run_decision(
        dataset[i], record.generated_rationale_text, mode, config, generator);
    record.decision = stage2.decision;
    record.raw_stage2 = stage2.raw;
    record.decision_input_mode = mode;
    return record;
  });
}

PredictionRecord run_parallel_baseline(const Quadruple& example,
                                       const PipelineConfig& config,
                                       Generator& generator,
                                       bool mask_decision) {
  SentenceList sentences = split_sentences(example.passage);
  StagePrompt prompt = build_rationale_prompt(example, sentences, config);
  PredictionRecord record;
  record.example_id = example.id;
  record.decision_input_mode = DecisionInputMode::kPassageOnly;
  record.diagnostics.truncated = prompt.truncated;
  GeneratorRequest request =
      make_request(example, "parallel", std::move(prompt), config);
  if (mask_decision) request.decoder_prefix = kMaskPrefix;
  record.raw_stage1 = generate_with_retry(generator, request, config.retry).text;

  std::string text = trim(record.raw_stage1);
  std::string rationale_part;
  if (mask_decision) {
    if (text.rfind(kMaskPrefix, 0) == 0) {
      text = trim(std::string_view(text).substr(std::string_view(kMaskPrefix).size()));
    }
    rationale_part = text;
  } else {
    std::string decision_part;
    std::size_t delim = lower(text).find("explanation:");
    if (delim != std::string::npos) {
      decision_part = text.substr(0, delim);
      rationale_part = text.substr(delim + std::string_view("explanation:").size());
    } else if (std::size_t mark = find_first_mark(text);
               config.sm_on && mark != std::string::npos) {
      decision_part = text.substr(0, mark);
      rationale_part = text.substr(mark);
    } else {
      decision_part = text;
    }
    decision_part = trim(decision_part);
    if (lower(decision_part).rfind("answer:", 0) == 0) {
      decision_part = decision_part.substr(std::string_view("answer:").size());
    }
    record.decision = match_label(decision_part, config.label_vocabulary);
  }
  rationale_part = trim(rationale_part);

  if (config.sm_on) {
    std::vector<std::uint64_t> marks = parse_marks(rationale_part);
    ResolvedRationale resolved = resolve_indices(mark_sentences(sentences), marks);
    record.diagnostics.unparseable_rationale = marks.empty();
    record.diagnostics.dropped_indices = resolved.dropped;
    record.generated_indices = std::move(marks);
    record.generated_rationale_text = std::move(resolved.text);
    record.resolved_sentence_set = std::move(resolved.indices);
  } else {
    record.diagnostics.unparseable_rationale = rationale_part.empty();
    record.generated_rationale_text = rationale_part;
    record.resolved_sentence_set =
        exact_sentence_matches(sentences, rationale_part);
  }
  return record;
}

}  // namespace rlk
