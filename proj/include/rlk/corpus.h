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

#ifndef RLK_CORPUS_H_
#define RLK_CORPUS_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rlk/textproc.h"

namespace rlk {

enum class Granularity { kSentence, kPhrase };

std::string to_string(Granularity granularity);

struct DatasetManifest {
  std::string name;
  std::vector<std::string> label_vocabulary;
  Granularity rationale_granularity = Granularity::kSentence;
  // Split name -> data file. Relative paths resolve against base_dir.
  std::map<std::string, std::string> splits;
  std::filesystem::path base_dir;

  bool has_label(const std::string& label) const;
  std::filesystem::path split_path(const std::string& split) const;
};

// {"name", "label_vocabulary", "rationale_granularity", "splits"}.
DatasetManifest manifest_from_json(const nlohmann::json& doc,
                                   std::filesystem::path base_dir = {});
DatasetManifest load_manifest(const std::filesystem::path& path);
nlohmann::json manifest_to_json(const DatasetManifest& manifest);

// One supervised example (question/claim, passage, rationale, label).
struct Quadruple {
  std::string id;
  std::string question;
  std::string passage;
  // Sorted, unique indices into split_sentences(passage).
  std::vector<std::size_t> rationale_sentences;
  std::string label;
  std::string dataset;
  bool annotated = true;

  bool operator==(const Quadruple&) const = default;
};

// Reads the split named in the manifest. Throws ParseError (with line
// number) on malformed lines and ValidationError (naming the record id) on
// invariant violations.
std::vector<Quadruple> load_dataset(const DatasetManifest& manifest,
                                    const std::string& split);

// Same, reading from a stream.
std::vector<Quadruple> read_dataset(std::istream& in,
                                    const DatasetManifest& manifest);

// Builds and validates one record.
Quadruple quadruple_from_json(const nlohmann::json& record,
                              const DatasetManifest& manifest);

nlohmann::ordered_json quadruple_to_json(const Quadruple& example);

void write_dataset(std::ostream& out, std::span<const Quadruple> examples);

// Sentences whose extent overlaps any span by at least one byte, ascending.
// Throws ValidationError on an empty or out-of-bounds span.
std::vector<std::size_t> phrase_to_sentence(std::string_view passage,
                                            std::span<const CharRange> spans);

// Keeps the rationale on floor(n * fraction) of the n annotated examples and
// flags the rest unannotated. Selection ranks examples by a seeded hash of
// their id, so it does not depend on input order. Output order is preserved.
std::vector<Quadruple> subsample_annotations(std::vector<Quadruple> examples,
                                             double fraction,
                                             std::uint64_t seed);

// Rationale text of an example: its annotated sentences in passage order,
// joined by single spaces.
std::string annotated_rationale_text(const Quadruple& example,
                                     const SentenceList& sentences);

}  // namespace rlk

#endif  // RLK_CORPUS_H_
