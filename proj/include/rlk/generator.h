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

#ifndef RLK_GENERATOR_H_
#define RLK_GENERATOR_H_

#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace rlk {

enum class EndpointKind { kMock, kHttp };

struct GeneratorEndpoint {
  EndpointKind kind = EndpointKind::kMock;
  // http kind: "http://host[:port][/base]".
  std::string address;
  // mock kind: JSONL table path.
  std::string mock_table;
  std::chrono::milliseconds timeout{30000};
  int max_output_tokens = 64;
};

// Throws ConfigError if an http endpoint lacks a usable address.
void validate_endpoint(const GeneratorEndpoint& endpoint);

inline constexpr const char* kGeneratorUrlEnv = "RLK_GENERATOR_URL";

struct GeneratorRequest {
  // Routing metadata for mock tables and logs; not part of the wire body.
  std::string example_id;
  std::string stage;

  std::string prompt;
  // FID segments (question prefix + passage slice each). Sent on the wire
  // only when there is more than one.
  std::vector<std::string> segments;
  std::optional<std::string> decoder_prefix;
  int max_tokens = 64;

  // {"prompt", "decoder_prefix", "max_tokens"[, "segments"]}
  nlohmann::ordered_json wire_body() const;
};

struct GeneratorResponse {
  std::string text;
};

// A text-generation backend. Implementations must allow concurrent calls.
class Generator {
 public:
  virtual ~Generator() = default;
  virtual GeneratorResponse generate(const GeneratorRequest& request) = 0;
  virtual bool supports_decoder_prefix() = 0;
};

// Canned responses keyed by (example_id, stage). A "parallel" request with a
// decoder prefix is looked up under stage "parallel_masked".
class MockGenerator : public Generator {
 public:
  MockGenerator() = default;

  // Lines of {"example_id", "stage", "text"}.
  static std::unique_ptr<MockGenerator> from_file(
      const std::filesystem::path& path);

  void add(const std::string& example_id, const std::string& stage,
           std::string text);
  void set_supports_decoder_prefix(bool value) { decoder_prefix_ = value; }

  GeneratorResponse generate(const GeneratorRequest& request) override;
  bool supports_decoder_prefix() override { return decoder_prefix_; }

  std::vector<GeneratorRequest> request_log() const;
  void write_table(std::ostream& out) const;

 private:
  std::map<std::pair<std::string, std::string>, std::string> table_;
  bool decoder_prefix_ = true;
  mutable std::mutex mutex_;
  std::vector<GeneratorRequest> log_;
};

// POST <address>/generate with the wire body; expects {"text": ...}.
// Capability probe: GET <address>/capabilities returning {"fields": [...]};
// a 404 there means every documented field is accepted.
class HttpGenerator : public Generator {
 public:
  explicit HttpGenerator(GeneratorEndpoint endpoint);

  GeneratorResponse generate(const GeneratorRequest& request) override;
  bool supports_decoder_prefix() override;

  const std::string& address() const { return endpoint_.address; }

 private:
  GeneratorEndpoint endpoint_;
  std::string host_;
  std::string base_path_;
  std::once_flag probe_once_;
  bool decoder_prefix_ = true;
};

// Mock endpoints load their table; http endpoints honor RLK_GENERATOR_URL.
std::unique_ptr<Generator> make_generator(GeneratorEndpoint endpoint);

struct RetryPolicy {
  int attempts = 3;
  std::chrono::milliseconds initial_backoff{100};
};

// Retries retryable EndpointErrors with exponential backoff; rethrows the
// last error once attempts are exhausted.
GeneratorResponse generate_with_retry(Generator& generator,
                                      const GeneratorRequest& request,
                                      const RetryPolicy& policy);

}  // namespace rlk

#endif  // RLK_GENERATOR_H_
