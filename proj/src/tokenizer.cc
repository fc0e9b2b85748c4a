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

#include "rlk/tokenizer.h"

#include <algorithm>
#include <cctype>
#include <fstream>

#include "rlk/errors.h"

namespace rlk {

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)); }

bool is_punct(char c) {
  return std::ispunct(static_cast<unsigned char>(c));
}

std::size_t code_point_end(std::string_view text, std::size_t pos) {
  std::size_t len = utf8_length(static_cast<unsigned char>(text[pos]));
  return std::min(text.size(), pos + len);
}

}  // namespace

std::size_t utf8_length(unsigned char lead) {
  if (lead < 0x80) return 1;
  if ((lead & 0xE0) == 0xC0) return 2;
  if ((lead & 0xF0) == 0xE0) return 3;
  if ((lead & 0xF8) == 0xF0) return 4;
  return 1;
}

std::vector<std::string> Tokenizer::words(std::string_view text) const {
  std::vector<std::string> out;
  for (auto& token : tokenize(text)) out.push_back(std::move(token.text));
  return out;
}

std::vector<Token> BasicTokenizer::tokenize(std::string_view text) const {
  std::vector<Token> tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    char c = text[i];
    if (is_space(c)) {
      ++i;
    } else if (is_punct(c)) {
      tokens.push_back({std::string(1, c), i, i + 1});
      ++i;
    } else {
      std::size_t start = i;
      while (i < text.size() && !is_space(text[i]) && !is_punct(text[i])) ++i;
      tokens.push_back({std::string(text.substr(start, i - start)), start, i});
    }
  }
  return tokens;
}

std::vector<Token> CharTokenizer::tokenize(std::string_view text) const {
  std::vector<Token> tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    if (is_space(text[i])) {
      ++i;
      continue;
    }
    std::size_t end = code_point_end(text, i);
    tokens.push_back({std::string(text.substr(i, end - i)), i, end});
    i = end;
  }
  return tokens;
}

VocabTokenizer::VocabTokenizer(std::vector<std::string> vocabulary,
                               std::string source)
    : id_("vocab:" + std::move(source)) {
  for (auto& entry : vocabulary) {
    if (entry.empty()) continue;
    max_length_ = std::max(max_length_, entry.size());
    vocab_.insert(std::move(entry));
  }
  if (vocab_.empty()) throw ConfigError("vocabulary is empty");
}

VocabTokenizer VocabTokenizer::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open vocabulary file: " + path);
  std::vector<std::string> entries;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) entries.push_back(line);
  }
  return VocabTokenizer(std::move(entries), path);
}

std::vector<Token> VocabTokenizer::tokenize(std::string_view text) const {
  std::vector<Token> tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    if (is_space(text[i])) {
      ++i;
      continue;
    }
    std::size_t chunk_end = i;
    while (chunk_end < text.size() && !is_space(text[chunk_end])) ++chunk_end;
    while (i < chunk_end) {
      std::size_t longest = std::min(max_length_, chunk_end - i);
      std::size_t matched = 0;
      for (std::size_t len = longest; len > 0; --len) {
        if (vocab_.count(std::string(text.substr(i, len)))) {
          matched = len;
          break;
        }
      }
      if (matched == 0) matched = code_point_end(text, i) - i;
      tokens.push_back({std::string(text.substr(i, matched)), i, i + matched});
      i += matched;
    }
  }
  return tokens;
}

std::shared_ptr<const Tokenizer> make_tokenizer(const std::string& name) {
  if (name == "basic") return std::make_shared<BasicTokenizer>();
  if (name == "char") return std::make_shared<CharTokenizer>();
  constexpr std::string_view kVocab = "vocab:";
  if (name.rfind(kVocab, 0) == 0) {
    return std::make_shared<VocabTokenizer>(
        VocabTokenizer::from_file(name.substr(kVocab.size())));
  }
  throw ConfigError("unknown tokenizer '" + name +
                    "' (expected basic, char, or vocab:<path>)");
}

}  // namespace rlk
