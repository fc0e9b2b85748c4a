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

// rlk: command-line entry point for dataset ingestion, training-file
// preparation, two-stage inference, evaluation, threshold sweeps, and the
// decision-masking analysis.
//
// Exit codes: 0 success, 1 validation/usage error, 2 runtime/backend error.

#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "rlk/analysis.h"
#include "rlk/config.h"
#include "rlk/corpus.h"
#include "rlk/errors.h"
#include "rlk/fileio.h"
#include "rlk/generator.h"
#include "rlk/metrics.h"
#include "rlk/pipeline.h"
#include "rlk/trainprep.h"

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

constexpr int kOk = 0;
constexpr int kValidation = 1;
constexpr int kRuntime = 2;

// Flags shared across subcommands. Each is applied over the --config file
// only when given on the command line.
struct Flags {
  std::string config;
  std::string manifest, split, templates, tokenizer, endpoint, mock_table;
  std::string mode, recall_source;
  bool sm = true, ral = false;
  std::size_t segments = 1, max_tokens = 512, parallelism = 1;
  std::uint64_t seed = 0;
  double iou_threshold = 0.5, recall_threshold = 0.5, subsample = 1.0;
  long long timeout_ms = 30000;
  int max_output_tokens = 64;
  std::vector<double> thresholds;
  // File arguments (echoed under "args").
  std::map<std::string, std::string> files;
};

struct Command {
  CLI::App* app = nullptr;
  std::map<std::string, CLI::Option*> options;
  std::vector<std::string> file_args;
};

void add_file(Command& cmd, Flags& flags, const std::string& name,
              const std::string& help) {
  cmd.options[name] = cmd.app->add_option("--" + name, flags.files[name], help);
  cmd.file_args.push_back(name);
}

void add_dataset_flags(Command& cmd, Flags& f) {
  cmd.options["dataset"] =
      cmd.app->add_option("--dataset", f.manifest, "Dataset manifest (JSON)");
  cmd.options["split"] = cmd.app->add_option("--split", f.split, "Split name");
}

void add_text_flags(Command& cmd, Flags& f) {
  cmd.options["templates"] = cmd.app->add_option(
      "--templates", f.templates, "Prompt templates file (JSON)");
  cmd.options["tokenizer"] = cmd.app->add_option(
      "--tokenizer", f.tokenizer, "basic | char | vocab:<path>");
  cmd.options["sm"] = cmd.app->add_flag("--sm,!--no-sm", f.sm,
                                        "Sentence marks on/off");
  cmd.options["segments"] =
      cmd.app->add_option("--segments", f.segments, "FID segment count C");
  cmd.options["max-tokens"] = cmd.app->add_option(
      "--max-tokens", f.max_tokens, "Token budget per FID segment");
}

void add_endpoint_flags(Command& cmd, Flags& f) {
  cmd.options["endpoint"] =
      cmd.app->add_option("--endpoint", f.endpoint, "Generator URL or 'mock'");
  cmd.options["mock-table"] = cmd.app->add_option(
      "--mock-table", f.mock_table, "JSONL table for the mock endpoint");
  cmd.options["timeout-ms"] =
      cmd.app->add_option("--timeout-ms", f.timeout_ms, "Request timeout");
  cmd.options["max-output-tokens"] = cmd.app->add_option(
      "--max-output-tokens", f.max_output_tokens, "Generation length cap");
  cmd.options["parallelism"] = cmd.app->add_option(
      "--parallelism", f.parallelism, "Concurrent generator requests");
}

void add_metric_flags(Command& cmd, Flags& f) {
  cmd.options["iou-threshold"] = cmd.app->add_option(
      "--iou-threshold", f.iou_threshold, "Sentence match IOU threshold");
  cmd.options["recall-threshold"] = cmd.app->add_option(
      "--recall-threshold", f.recall_threshold, "Rationale correctness threshold");
  cmd.options["recall-source"] = cmd.app->add_option(
      "--recall-source", f.recall_source, "sentence | token");
  cmd.options["tokenizer"] = cmd.app->add_option(
      "--tokenizer", f.tokenizer, "basic | char | vocab:<path>");
}

bool given(const Command& cmd, const std::string& name) {
  auto it = cmd.options.find(name);
  return it != cmd.options.end() && it->second->count() > 0;
}

// Loads --config (a bare RunConfig or a config echo) and applies flags.
rlk::RunConfig resolve_config(const Command& cmd, Flags& f) {
  rlk::RunConfig c;
  if (!f.config.empty()) {
    std::string text = rlk::read_file(f.config);
    json doc = json::parse(text, nullptr, /*allow_exceptions=*/false);
    if (doc.is_discarded()) throw rlk::ParseError("config is not valid JSON: " + f.config);
    if (doc.is_object() && doc.contains("config") && doc.contains("command")) {
      if (auto args = doc.find("args"); args != doc.end() && args->is_object()) {
        for (const auto& name : cmd.file_args) {
          if (!given(cmd, name) && args->contains(name)) {
            f.files[name] = (*args)[name].get<std::string>();
          }
        }
      }
      c = rlk::run_config_from_json(doc["config"]);
    } else {
      c = rlk::run_config_from_json(doc);
    }
  }
  if (given(cmd, "dataset")) c.manifest = f.manifest;
  if (given(cmd, "split")) c.split = f.split;
  if (given(cmd, "templates")) c.templates = f.templates;
  if (given(cmd, "tokenizer")) c.tokenizer = f.tokenizer;
  if (given(cmd, "sm")) c.sm_on = f.sm;
  if (given(cmd, "ral")) c.ral_on = f.ral;
  if (given(cmd, "segments")) c.segment_count = f.segments;
  if (given(cmd, "max-tokens")) c.max_tokens = f.max_tokens;
  if (given(cmd, "endpoint")) {
    if (f.endpoint == "mock") {
      c.endpoint.kind = rlk::EndpointKind::kMock;
    } else {
      c.endpoint.kind = rlk::EndpointKind::kHttp;
      c.endpoint.address = f.endpoint;
    }
  }
  if (given(cmd, "mock-table")) c.endpoint.mock_table = f.mock_table;
  if (given(cmd, "timeout-ms")) c.endpoint.timeout = std::chrono::milliseconds(f.timeout_ms);
  if (given(cmd, "max-output-tokens")) c.endpoint.max_output_tokens = f.max_output_tokens;
  if (given(cmd, "parallelism")) c.parallelism = f.parallelism;
  if (given(cmd, "seed")) c.seed = f.seed;
  if (given(cmd, "mode")) c.decision_mode = f.mode;
  if (given(cmd, "iou-threshold")) c.iou_threshold = f.iou_threshold;
  if (given(cmd, "recall-threshold")) c.recall_threshold = f.recall_threshold;
  if (given(cmd, "recall-source")) c.recall_source = f.recall_source;
  if (given(cmd, "thresholds")) c.thresholds = f.thresholds;
  if (given(cmd, "subsample")) c.subsample_fraction = f.subsample;
  rlk::validate_run_config(c);
  return c;
}

const std::string& require_file(Flags& f, const std::string& name) {
  const std::string& path = f.files[name];
  if (path.empty()) throw rlk::ValidationError("--" + name + " is required");
  return path;
}

void require_exists(const std::string& path, const std::string& what) {
  if (!std::filesystem::exists(path)) {
    throw rlk::ValidationError(what + " does not exist: " + path);
  }
}

rlk::DatasetManifest manifest_of(const rlk::RunConfig& c) {
  if (c.manifest.empty()) throw rlk::ValidationError("--dataset is required");
  require_exists(c.manifest, "manifest");
  if (!c.templates.empty()) require_exists(c.templates, "templates file");
  return rlk::load_manifest(c.manifest);
}

std::vector<rlk::Quadruple> dataset_of(const rlk::RunConfig& c,
                                       const rlk::DatasetManifest& m) {
  auto data = rlk::load_dataset(m, c.split);
  if (c.subsample_fraction) {
    data = rlk::subsample_annotations(std::move(data), *c.subsample_fraction, c.seed);
  }
  return data;
}

void write_with_echo(const std::string& out, const std::string& content,
                     const std::string& command, const rlk::RunConfig& c,
                     const Command& cmd, Flags& f) {
  rlk::write_file_atomic(out, content);
  ordered_json echo;
  echo["command"] = command;
  ordered_json args = ordered_json::object();
  for (const auto& name : cmd.file_args) {
    if (!f.files[name].empty()) args[name] = f.files[name];
  }
  echo["args"] = args;
  echo["config"] = rlk::run_config_to_json(c);
  rlk::write_file_atomic(out + ".config.json", echo.dump(2) + "\n");
}

template <typename Writer>
std::string render(Writer&& writer) {
  std::ostringstream buf;
  writer(buf);
  return buf.str();
}

std::string pct(const std::optional<double>& v) {
  if (!v) return "n/a";
  std::ostringstream out;
  out << std::fixed << std::setprecision(1) << *v * 100.0;
  return out.str();
}

std::string pct(double v) { return pct(std::optional<double>(v)); }

std::string render_report(const json& doc) {
  std::ostringstream out;
  if (doc.contains("rows")) {
    out << "| dataset | IOU F1 origin | IOU F1 mask | delta | TF1 origin | "
           "TF1 mask | delta |\n|---|---|---|---|---|---|---|\n";
    for (const auto& r : doc["rows"]) {
      out << "| " << r.value("dataset", "") << " | "
          << pct(r["iou_f1_origin"].get<double>()) << " | "
          << pct(r["iou_f1_masked"].get<double>()) << " | "
          << pct(r["delta_iou"].get<double>()) << " | "
          << pct(r["tf1_origin"].get<double>()) << " | "
          << pct(r["tf1_masked"].get<double>()) << " | "
          << pct(r["delta_tf1"].get<double>()) << " |\n";
    }
    return out.str();
  }
  rlk::MetricReport r = rlk::report_from_json(doc);
  out << "| metric | value (%) |\n|---|---|\n"
      << "| Perf | " << pct(r.accuracy) << " |\n"
      << "| IOU F1 | " << pct(r.iou_f1) << " |\n"
      << "| TF1 | " << pct(r.tf1) << " |\n"
      << "| RSQ | " << pct(r.rsq) << " |\n"
      << "| RSQ-W | " << pct(r.rsq_w) << " |\n"
      << "| RSQ-C | " << pct(r.rsq_c) << " |\n"
      << "| RCP | " << pct(r.rcp) << " |\n"
      << "| R-Acc | " << pct(r.r_acc) << " |\n\n"
      << "counts: rc_dc=" << r.counts.rc_dc << " rw_dw=" << r.counts.rw_dw
      << " rc_dw=" << r.counts.rc_dw << " rw_dc=" << r.counts.rw_dc
      << " (scored " << r.num_scored << " of " << r.num_examples << ")\n"
      << "config: iou_threshold=" << rlk::format_double(r.iou_threshold)
      << " recall_threshold=" << rlk::format_double(r.recall_threshold)
      << " tokenizer=" << r.tokenizer_id
      << " recall_source=" << rlk::to_string(r.recall_source) << "\n";
  return out.str();
}

int run(int argc, char** argv) {
  CLI::App app{"Rationale-decision link toolkit"};
  app.require_subcommand(1);
  app.fallthrough();
  Flags f;
  app.add_option("--config", f.config, "RunConfig JSON or a config echo");

  Command ingest{app.add_subcommand("ingest", "Validate and normalize a dataset split")};
  add_dataset_flags(ingest, f);
  ingest.options["subsample"] = ingest.app->add_option(
      "--subsample", f.subsample, "Keep rationales on this fraction of examples");
  ingest.options["seed"] = ingest.app->add_option("--seed", f.seed, "Subsample seed");
  add_file(ingest, f, "out", "Canonical JSONL output");

  Command prep{app.add_subcommand("prepare-train", "Export training samples")};
  add_dataset_flags(prep, f);
  add_text_flags(prep, f);
  prep.options["ral"] = prep.app->add_flag("--ral,!--no-ral", f.ral,
                                           "Add RAL decision samples");
  prep.options["subsample"] = prep.app->add_option(
      "--subsample", f.subsample, "Keep rationales on this fraction of examples");
  prep.options["seed"] = prep.app->add_option("--seed", f.seed, "Subsample seed");
  add_file(prep, f, "out", "Training samples JSONL");
  add_file(prep, f, "judge-out", "Judge (R-Acc) training file JSONL");

  Command pipe{app.add_subcommand("run-pipeline", "Two-stage inference")};
  add_dataset_flags(pipe, f);
  add_text_flags(pipe, f);
  add_endpoint_flags(pipe, f);
  pipe.options["mode"] = pipe.app->add_option(
      "--mode", f.mode,
      "rationale_only | rationale_plus_passage | annotated_rationale | passage_only");
  add_file(pipe, f, "rationales-from",
           "Re-decide over these predictions' rationales (judge run)");
  add_file(pipe, f, "out", "Predictions JSONL");

  Command eval{app.add_subcommand("evaluate", "Score predictions")};
  add_dataset_flags(eval, f);
  add_metric_flags(eval, f);
  add_file(eval, f, "predictions", "Predictions JSONL");
  add_file(eval, f, "rcp-predictions", "Annotated-rationale run (RCP)");
  add_file(eval, f, "judge-predictions", "Judge run over generated rationales (R-Acc)");
  add_file(eval, f, "out", "Report JSON (stdout when omitted)");

  Command sweep{app.add_subcommand("sweep", "RSQ family across recall thresholds")};
  add_dataset_flags(sweep, f);
  add_metric_flags(sweep, f);
  sweep.options["thresholds"] = sweep.app->add_option(
      "--thresholds", f.thresholds, "Comma-separated thresholds")->delimiter(',');
  add_file(sweep, f, "predictions", "Predictions JSONL");
  add_file(sweep, f, "out", "CSV output (stdout when omitted)");

  Command mask{app.add_subcommand("analyze-mask", "Decision-masking analysis")};
  add_dataset_flags(mask, f);
  add_text_flags(mask, f);
  add_endpoint_flags(mask, f);
  mask.options["iou-threshold"] = mask.app->add_option(
      "--iou-threshold", f.iou_threshold, "Sentence match IOU threshold");
  add_file(mask, f, "out", "Masking report JSON");
  add_file(mask, f, "origin-out", "Unmasked-pass predictions JSONL");
  add_file(mask, f, "masked-out", "Masked-pass predictions JSONL");

  Command report{app.add_subcommand("report", "Render a report as a table")};
  add_file(report, f, "report", "Metric or masking report JSON");
  add_file(report, f, "out", "Text output (stdout when omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kValidation;
  }

  if (ingest.app->parsed()) {
    rlk::RunConfig c = resolve_config(ingest, f);
    auto data = dataset_of(c, manifest_of(c));
    std::size_t annotated = 0;
    for (const auto& q : data) annotated += q.annotated;
    std::string content = render([&](std::ostream& o) { rlk::write_dataset(o, data); });
    if (!f.files["out"].empty()) {
      write_with_echo(f.files["out"], content, "ingest", c, ingest, f);
    } else {
      std::cout << content;
    }
    std::cerr << data.size() << " records, " << annotated << " annotated\n";
    return kOk;
  }

  if (prep.app->parsed()) {
    rlk::RunConfig c = resolve_config(prep, f);
    rlk::DatasetManifest m = manifest_of(c);
    auto data = dataset_of(c, m);
    rlk::PipelineConfig pc = rlk::make_pipeline_config(c, m);
    const std::string& out = require_file(f, "out");
    rlk::TrainingSet set = rlk::prepare_training(data, pc, c.ral_on);
    write_with_echo(out, render([&](std::ostream& o) { rlk::write_samples(o, set.samples); }),
                    "prepare-train", c, prep, f);
    if (!f.files["judge-out"].empty()) {
      auto judge = rlk::build_judge_training_file(data, pc);
      rlk::write_file_atomic(f.files["judge-out"],
                             render([&](std::ostream& o) { rlk::write_samples(o, judge); }));
    }
    std::cerr << set.samples.size() << " samples, " << set.skipped_unannotated
              << " unannotated examples skipped\n";
    return kOk;
  }

  if (pipe.app->parsed()) {
    rlk::RunConfig c = resolve_config(pipe, f);
    rlk::DatasetManifest m = manifest_of(c);
    auto data = dataset_of(c, m);
    rlk::PipelineConfig pc = rlk::make_pipeline_config(c, m);
    const std::string& out = require_file(f, "out");
    if (c.endpoint.kind == rlk::EndpointKind::kMock) {
      if (c.endpoint.mock_table.empty()) {
        throw rlk::ValidationError("--mock-table is required with the mock endpoint");
      }
      require_exists(c.endpoint.mock_table, "mock table");
    }
    auto generator = rlk::make_generator(c.endpoint);
    std::vector<rlk::PredictionRecord> records;
    if (!f.files["rationales-from"].empty()) {
      auto source = rlk::load_predictions(f.files["rationales-from"]);
      records = rlk::run_judge(data, source, pc, *generator);
    } else {
      records = rlk::run_pipeline(data, pc, *generator);
    }
    std::size_t failed = 0;
    for (const auto& r : records) failed += !r.diagnostics.error.empty();
    write_with_echo(out, render([&](std::ostream& o) { rlk::write_predictions(o, records); }),
                    "run-pipeline", c, pipe, f);
    std::cerr << records.size() << " predictions, " << failed << " failed\n";
    return kOk;
  }

  if (eval.app->parsed() || sweep.app->parsed()) {
    Command& cmd = eval.app->parsed() ? eval : sweep;
    rlk::RunConfig c = resolve_config(cmd, f);
    rlk::DatasetManifest m = manifest_of(c);
    auto data = dataset_of(c, m);
    rlk::EvaluationConfig ec = rlk::make_evaluation_config(c);
    auto predictions = rlk::load_predictions(require_file(f, "predictions"));
    std::string content;
    if (eval.app->parsed()) {
      std::vector<rlk::PredictionRecord> rcp_records, judge_records;
      if (!f.files["rcp-predictions"].empty()) {
        rcp_records = rlk::load_predictions(f.files["rcp-predictions"]);
      }
      if (!f.files["judge-predictions"].empty()) {
        judge_records = rlk::load_predictions(f.files["judge-predictions"]);
      }
      rlk::MetricReport report =
          rlk::evaluate(data, predictions, ec, rcp_records, judge_records);
      content = rlk::report_to_json(report).dump(2) + "\n";
    } else {
      auto scores = rlk::score_predictions(data, predictions, ec);
      auto rows = rlk::threshold_sweep(scores.scored, c.thresholds, ec.recall_source);
      content = render([&](std::ostream& o) { rlk::write_sweep_csv(o, rows); });
    }
    if (!f.files["out"].empty()) {
      write_with_echo(f.files["out"], content, eval.app->parsed() ? "evaluate" : "sweep",
                      c, cmd, f);
    } else {
      std::cout << content;
    }
    return kOk;
  }

  if (mask.app->parsed()) {
    rlk::RunConfig c = resolve_config(mask, f);
    rlk::DatasetManifest m = manifest_of(c);
    auto data = dataset_of(c, m);
    rlk::PipelineConfig pc = rlk::make_pipeline_config(c, m);
    rlk::EvaluationConfig ec = rlk::make_evaluation_config(c);
    const std::string& out = require_file(f, "out");
    if (c.endpoint.kind == rlk::EndpointKind::kMock) {
      if (c.endpoint.mock_table.empty()) {
        throw rlk::ValidationError("--mock-table is required with the mock endpoint");
      }
      require_exists(c.endpoint.mock_table, "mock table");
    }
    auto generator = rlk::make_generator(c.endpoint);
    rlk::MaskingRun result = rlk::run_masking_analysis(data, pc, ec, *generator);
    if (!f.files["origin-out"].empty()) {
      rlk::write_file_atomic(f.files["origin-out"], render([&](std::ostream& o) {
                               rlk::write_predictions(o, result.origin);
                             }));
    }
    if (!f.files["masked-out"].empty()) {
      rlk::write_file_atomic(f.files["masked-out"], render([&](std::ostream& o) {
                               rlk::write_predictions(o, result.masked);
                             }));
    }
    write_with_echo(out, rlk::masking_report_to_json(result.report).dump(2) + "\n",
                    "analyze-mask", c, mask, f);
    return kOk;
  }

  if (report.app->parsed()) {
    const std::string& path = require_file(f, "report");
    require_exists(path, "report");
    json doc = json::parse(rlk::read_file(path), nullptr, /*allow_exceptions=*/false);
    if (doc.is_discarded()) throw rlk::ParseError("report is not valid JSON: " + path);
    std::string content = render_report(doc);
    if (!f.files["out"].empty()) {
      rlk::write_file_atomic(f.files["out"], content);
    } else {
      std::cout << content;
    }
    return kOk;
  }
  return kValidation;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const rlk::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kValidation;
  } catch (const rlk::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kValidation;
  } catch (const rlk::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kValidation;
  } catch (const rlk::CapabilityError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntime;
  }
}
