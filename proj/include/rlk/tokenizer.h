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

#ifndef RLK_TOKENIZER_H_
#define RLK_TOKENIZER_H_

#include <cstddef>
#include <memory>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace rlk {

// A token and its byte extent [begin, end) in the source string.
struct Token {
  std::string text;
  std::size_t begin = 0;
  std::size_t end = 0;
};

// Deterministic string -> token list mapping. Token budgets (FID segments)
// and token-level metrics are measured in the units of whichever tokenizer
// is configured.
class Tokenizer {
 public:
  virtual ~Tokenizer() = default;

  virtual const std::string& id() const = 0;
  virtual std::vector<Token> tokenize(std::string_view text) const = 0;

  std::size_t count(std::string_view text) const {
    return tokenize(text).size();
  }
  std::vector<std::string> words(std::string_view text) const;
};

// Splits on ASCII whitespace; every ASCII punctuation character is a token
// of its own. Id: "basic".
class BasicTokenizer : public Tokenizer {
 public:
  const std::string& id() const override { return id_; }
  std::vector<Token> tokenize(std::string_view text) const override;

 private:
  std::string id_ = "basic";
};

// One token per UTF-8 code point, whitespace skipped. Id: "char". Used to
// run the longest-common-substring match in character units.
class CharTokenizer : public Tokenizer {
 public:
  const std::string& id() const override { return id_; }
  std::vector<Token> tokenize(std::string_view text) const override;

 private:
  std::string id_ = "char";
};

// Greedy longest-match-first segmentation of each whitespace-delimited chunk
// against a vocabulary. A position no vocabulary entry matches yields a
// single code point token. Id: "vocab:<source>".
class VocabTokenizer : public Tokenizer {
 public:
  VocabTokenizer(std::vector<std::string> vocabulary, std::string source);

  // One token per line; blank lines ignored; trailing CR stripped.
  static VocabTokenizer from_file(const std::string& path);

  const std::string& id() const override { return id_; }
  std::vector<Token> tokenize(std::string_view text) const override;
  std::size_t vocabulary_size() const { return vocab_.size(); }

 private:
  std::string id_;
  std::unordered_set<std::string> vocab_;
  std::size_t max_length_ = 0;
};

// "basic", "char", or "vocab:<path>". Throws ConfigError otherwise.
std::shared_ptr<const Tokenizer> make_tokenizer(const std::string& name);

// Byte length of the UTF-8 sequence starting with `lead` (1 for invalid
// lead bytes).
std::size_t utf8_length(unsigned char lead);

}  // namespace rlk

#endif  // RLK_TOKENIZER_H_
