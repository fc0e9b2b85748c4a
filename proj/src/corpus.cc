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

#include "rlk/corpus.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>

#include "rlk/errors.h"

namespace rlk {

namespace {

using nlohmann::json;

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// FNV-1a over the id, keyed by the seed.
std::uint64_t selection_key(const std::string& id, std::uint64_t seed) {
  std::uint64_t h = 0xcbf29ce484222325ULL ^ mix64(seed);
  for (unsigned char c : id) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return mix64(h);
}

const std::string& require_string(const json& record, const char* field,
                                  const std::string& id) {
  auto it = record.find(field);
  if (it == record.end()) {
    throw ValidationError("record '" + id + "': missing field '" + field + "'");
  }
  if (!it->is_string()) {
    throw ValidationError("record '" + id + "': field '" + field +
                          "' must be a string");
  }
  return it->get_ref<const std::string&>();
}

}  // namespace

std::string to_string(Granularity granularity) {
  return granularity == Granularity::kSentence ? "sentence" : "phrase";
}

bool DatasetManifest::has_label(const std::string& label) const {
  return std::find(label_vocabulary.begin(), label_vocabulary.end(), label) !=
         label_vocabulary.end();
}

std::filesystem::path DatasetManifest::split_path(
    const std::string& split) const {
  auto it = splits.find(split);
  if (it == splits.end()) {
    throw ValidationError("dataset '" + name + "' has no split '" + split +
                          "'");
  }
  std::filesystem::path path(it->second);
  if (path.is_relative() && !base_dir.empty()) path = base_dir / path;
  return path;
}

DatasetManifest manifest_from_json(const json& doc,
                                   std::filesystem::path base_dir) {
  if (!doc.is_object()) throw ValidationError("manifest must be a JSON object");
  DatasetManifest m;
  m.base_dir = std::move(base_dir);
  try {
    m.name = doc.at("name").get<std::string>();
    m.label_vocabulary =
        doc.at("label_vocabulary").get<std::vector<std::string>>();
    std::string granularity = doc.value("rationale_granularity", "sentence");
    if (granularity == "sentence") {
      m.rationale_granularity = Granularity::kSentence;
    } else if (granularity == "phrase") {
      m.rationale_granularity = Granularity::kPhrase;
    } else {
      throw ValidationError("manifest: unknown rationale_granularity '" +
                            granularity + "'");
    }
    const json& splits = doc.at("splits");
    if (!splits.is_object()) {
      throw ValidationError("manifest: splits must be an object");
    }
    for (const auto& [split, path] : splits.items()) {
      m.splits.emplace(split, path.get<std::string>());
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("manifest: ") + e.what());
  }
  if (m.label_vocabulary.empty()) {
    throw ValidationError("manifest: label_vocabulary is empty");
  }
  std::set<std::string> unique(m.label_vocabulary.begin(),
                               m.label_vocabulary.end());
  if (unique.size() != m.label_vocabulary.size()) {
    throw ValidationError("manifest: duplicate label in label_vocabulary");
  }
  return m;
}

DatasetManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open manifest: " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError("manifest " + path.string() + ": " + e.what());
  }
  return manifest_from_json(doc, path.parent_path());
}

json manifest_to_json(const DatasetManifest& m) {
  json splits = json::object();
  for (const auto& [split, path] : m.splits) splits[split] = path;
  return {{"name", m.name},
          {"label_vocabulary", m.label_vocabulary},
          {"rationale_granularity", to_string(m.rationale_granularity)},
          {"splits", splits}};
}

Quadruple quadruple_from_json(const json& record,
                              const DatasetManifest& manifest) {
  if (!record.is_object()) throw ValidationError("record must be an object");
  std::string id = "?";
  if (auto it = record.find("id"); it != record.end() && it->is_string()) {
    id = it->get<std::string>();
  }
  Quadruple q;
  q.id = require_string(record, "id", id);
  if (q.id.empty()) throw ValidationError("record with empty id");
  q.question = require_string(record, "question", id);
  q.passage = require_string(record, "passage", id);
  q.label = require_string(record, "label", id);
  q.dataset = manifest.name;
  if (!manifest.has_label(q.label)) {
    throw ValidationError("record '" + id + "': unknown label '" + q.label +
                          "'");
  }

  SentenceList sentences;
  try {
    sentences = split_sentences(q.passage);
  } catch (const ValidationError&) {
    throw ValidationError("record '" + id + "': passage is empty");
  }

  auto rs = record.find("rationale_sentences");
  auto spans = record.find("rationale_spans");
  q.annotated = rs != record.end() || spans != record.end();
  std::set<std::size_t> indices;
  if (rs != record.end()) {
    if (!rs->is_array()) {
      throw ValidationError("record '" + id +
                            "': rationale_sentences must be an array");
    }
    for (const auto& v : *rs) {
      if (!v.is_number_integer() || v.get<long long>() < 0) {
        throw ValidationError("record '" + id +
                              "': rationale index must be a non-negative "
                              "integer");
      }
      auto index = v.get<unsigned long long>();
      if (index >= sentences.size()) {
        throw ValidationError("record '" + id + "': rationale index " +
                              std::to_string(index) + " out of range (" +
                              std::to_string(sentences.size()) +
                              " sentences)");
      }
      indices.insert(static_cast<std::size_t>(index));
    }
  }
  if (spans != record.end()) {
    if (!spans->is_array()) {
      throw ValidationError("record '" + id +
                            "': rationale_spans must be an array");
    }
    std::vector<CharRange> ranges;
    for (const auto& span : *spans) {
      if (!span.is_array() || span.size() != 2 ||
          !span[0].is_number_unsigned() || !span[1].is_number_unsigned()) {
        throw ValidationError("record '" + id +
                              "': rationale span must be [start, end]");
      }
      ranges.push_back({span[0].get<std::size_t>(), span[1].get<std::size_t>()});
    }
    try {
      for (std::size_t index : phrase_to_sentence(q.passage, ranges)) {
        indices.insert(index);
      }
    } catch (const ValidationError& e) {
      throw ValidationError("record '" + id + "': " + e.what());
    }
  }
  if (q.annotated && indices.empty()) {
    throw ValidationError("record '" + id +
                          "': annotated record has an empty rationale");
  }
  q.rationale_sentences.assign(indices.begin(), indices.end());
  return q;
}

std::vector<Quadruple> read_dataset(std::istream& in,
                                    const DatasetManifest& manifest) {
  std::vector<Quadruple> out;
  std::set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json record;
    try {
      record = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(e.what(), line_no);
    }
    if (!record.is_object()) {
      throw ParseError("expected a JSON object", line_no);
    }
    Quadruple q = quadruple_from_json(record, manifest);
    if (!seen.insert(q.id).second) {
      throw ValidationError("duplicate record id '" + q.id + "'");
    }
    out.push_back(std::move(q));
  }
  return out;
}

std::vector<Quadruple> load_dataset(const DatasetManifest& manifest,
                                    const std::string& split) {
  std::filesystem::path path = manifest.split_path(split);
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open dataset file: " + path.string());
  return read_dataset(in, manifest);
}

nlohmann::ordered_json quadruple_to_json(const Quadruple& q) {
  nlohmann::ordered_json out;
  out["id"] = q.id;
  out["question"] = q.question;
  out["passage"] = q.passage;
  if (q.annotated) out["rationale_sentences"] = q.rationale_sentences;
  out["label"] = q.label;
  return out;
}

void write_dataset(std::ostream& out, std::span<const Quadruple> examples) {
  for (const auto& q : examples) out << quadruple_to_json(q).dump() << '\n';
}

std::vector<std::size_t> phrase_to_sentence(std::string_view passage,
                                            std::span<const CharRange> spans) {
  for (const auto& span : spans) {
    if (span.begin >= span.end || span.end > passage.size()) {
      throw ValidationError("phrase span [" + std::to_string(span.begin) +
                            ", " + std::to_string(span.end) +
                            ") is empty or outside the passage");
    }
  }
  std::vector<std::size_t> out;
  if (spans.empty()) return out;
  SentenceList sentences = split_sentences(passage);
  for (const auto& s : sentences.sentences) {
    bool overlaps = std::any_of(spans.begin(), spans.end(), [&](const CharRange& r) {
      return r.begin < s.range.end && s.range.begin < r.end;
    });
    if (overlaps) out.push_back(s.index);
  }
  return out;
}

std::vector<Quadruple> subsample_annotations(std::vector<Quadruple> examples,
                                             double fraction,
                                             std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw ConfigError("subsample fraction must be in (0, 1]");
  }
  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    if (examples[i].annotated) candidates.push_back(i);
  }
  // The epsilon absorbs representation error in products such as 100 * 0.29.
  auto keep = static_cast<std::size_t>(
      std::floor(static_cast<double>(candidates.size()) * fraction + 1e-9));
  std::vector<std::pair<std::uint64_t, std::size_t>> ranked;
  ranked.reserve(candidates.size());
  for (std::size_t i : candidates) {
    ranked.emplace_back(selection_key(examples[i].id, seed), i);
  }
  std::sort(ranked.begin(), ranked.end(), [&](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first < b.first;
    return examples[a.second].id < examples[b.second].id;
  });
  for (std::size_t r = keep; r < ranked.size(); ++r) {
    Quadruple& q = examples[ranked[r].second];
    q.annotated = false;
    q.rationale_sentences.clear();
  }
  return examples;
}

std::string annotated_rationale_text(const Quadruple& example,
                                     const SentenceList& sentences) {
  return join_sentences(sentences, example.rationale_sentences);
}

}  // namespace rlk
