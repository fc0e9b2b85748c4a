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

#include "rlk/generator.h"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <thread>

#include <httplib.h>

#include "rlk/errors.h"

namespace rlk {

namespace {

using nlohmann::json;

struct ParsedUrl {
  std::string host;  // scheme://host[:port]
  std::string path;  // base path without trailing slash
};

ParsedUrl parse_http_url(const std::string& url) {
  constexpr std::string_view kScheme = "http://";
  if (url.rfind(kScheme, 0) != 0 || url.size() == kScheme.size()) {
    throw ConfigError("generator address must be http://host[:port][/path]: '" +
                      url + "'");
  }
  std::size_t slash = url.find('/', kScheme.size());
  ParsedUrl out;
  out.host = url.substr(0, slash);
  if (slash != std::string::npos) out.path = url.substr(slash);
  while (!out.path.empty() && out.path.back() == '/') out.path.pop_back();
  if (out.host.size() == kScheme.size() || out.host.back() == ':') {
    throw ConfigError("generator address has no host: '" + url + "'");
  }
  return out;
}

}  // namespace

void validate_endpoint(const GeneratorEndpoint& endpoint) {
  if (endpoint.kind == EndpointKind::kHttp) parse_http_url(endpoint.address);
  if (endpoint.max_output_tokens < 1) {
    throw ConfigError("max_output_tokens must be >= 1");
  }
}

nlohmann::ordered_json GeneratorRequest::wire_body() const {
  nlohmann::ordered_json body;
  body["prompt"] = prompt;
  body["decoder_prefix"] =
      decoder_prefix ? nlohmann::ordered_json(*decoder_prefix)
                     : nlohmann::ordered_json(nullptr);
  body["max_tokens"] = max_tokens;
  if (segments.size() > 1) body["segments"] = segments;
  return body;
}

std::unique_ptr<MockGenerator> MockGenerator::from_file(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open mock table: " + path.string());
  auto mock = std::make_unique<MockGenerator>();
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json row;
    try {
      row = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError("mock table: " + std::string(e.what()), line_no);
    }
    if (!row.is_object() || !row.contains("example_id") ||
        !row.contains("stage") || !row.contains("text") ||
        !row["example_id"].is_string() || !row["stage"].is_string() ||
        !row["text"].is_string()) {
      throw ParseError("mock table row needs string example_id, stage, text",
                       line_no);
    }
    auto key = std::make_pair(row["example_id"].get<std::string>(),
                              row["stage"].get<std::string>());
    if (mock->table_.count(key)) {
      throw ValidationError("mock table: duplicate entry for (" + key.first +
                            ", " + key.second + ")");
    }
    mock->table_.emplace(std::move(key), row["text"].get<std::string>());
  }
  return mock;
}

void MockGenerator::add(const std::string& example_id,
                        const std::string& stage, std::string text) {
  table_[{example_id, stage}] = std::move(text);
}

GeneratorResponse MockGenerator::generate(const GeneratorRequest& request) {
  std::string stage = request.stage;
  if (stage == "parallel" && request.decoder_prefix) stage = "parallel_masked";
  {
    std::lock_guard<std::mutex> lock(mutex_);
    log_.push_back(request);
  }
  auto it = table_.find({request.example_id, stage});
  if (it == table_.end()) {
    throw EndpointError("mock table has no entry for (" + request.example_id +
                            ", " + stage + ")",
                        /*retryable=*/false);
  }
  return {it->second};
}

std::vector<GeneratorRequest> MockGenerator::request_log() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return log_;
}

void MockGenerator::write_table(std::ostream& out) const {
  for (const auto& [key, text] : table_) {
    nlohmann::ordered_json row;
    row["example_id"] = key.first;
    row["stage"] = key.second;
    row["text"] = text;
    out << row.dump() << '\n';
  }
}

HttpGenerator::HttpGenerator(GeneratorEndpoint endpoint)
    : endpoint_(std::move(endpoint)) {
  ParsedUrl url = parse_http_url(endpoint_.address);
  host_ = url.host;
  base_path_ = url.path;
}

GeneratorResponse HttpGenerator::generate(const GeneratorRequest& request) {
  httplib::Client client(host_);
  auto seconds = std::chrono::duration_cast<std::chrono::seconds>(endpoint_.timeout);
  auto micros = std::chrono::duration_cast<std::chrono::microseconds>(
      endpoint_.timeout - seconds);
  client.set_connection_timeout(seconds.count(), micros.count());
  client.set_read_timeout(seconds.count(), micros.count());
  client.set_write_timeout(seconds.count(), micros.count());

  auto res = client.Post(base_path_ + "/generate", request.wire_body().dump(),
                         "application/json");
  if (!res) {
    throw EndpointError("transport failure: " + httplib::to_string(res.error()),
                        /*retryable=*/true);
  }
  if (res->status >= 500) {
    throw EndpointError("backend returned HTTP " + std::to_string(res->status),
                        /*retryable=*/true);
  }
  if (res->status != 200) {
    throw EndpointError("backend returned HTTP " + std::to_string(res->status),
                        /*retryable=*/false);
  }
  json body = json::parse(res->body, nullptr, /*allow_exceptions=*/false);
  if (!body.is_object() || !body.contains("text") || !body["text"].is_string()) {
    throw EndpointError("backend response lacks a string 'text' field",
                        /*retryable=*/false);
  }
  return {body["text"].get<std::string>()};
}

bool HttpGenerator::supports_decoder_prefix() {
  std::call_once(probe_once_, [this] {
    httplib::Client client(host_);
    client.set_connection_timeout(
        std::chrono::duration_cast<std::chrono::seconds>(endpoint_.timeout)
            .count());
    auto res = client.Get(base_path_ + "/capabilities");
    if (!res) {
      throw EndpointError(
          "capability probe failed: " + httplib::to_string(res.error()),
          /*retryable=*/true);
    }
    if (res->status == 404) return;
    json body = json::parse(res->body, nullptr, /*allow_exceptions=*/false);
    decoder_prefix_ = false;
    if (body.is_object() && body.contains("fields") &&
        body["fields"].is_array()) {
      for (const auto& f : body["fields"]) {
        if (f == "decoder_prefix") decoder_prefix_ = true;
      }
    }
  });
  return decoder_prefix_;
}

std::unique_ptr<Generator> make_generator(GeneratorEndpoint endpoint) {
  if (endpoint.kind == EndpointKind::kMock) {
    if (endpoint.mock_table.empty()) {
      throw ConfigError("mock endpoint requires a mock table");
    }
    return MockGenerator::from_file(endpoint.mock_table);
  }
  if (const char* url = std::getenv(kGeneratorUrlEnv); url && *url) {
    endpoint.address = url;
  }
  validate_endpoint(endpoint);
  return std::make_unique<HttpGenerator>(std::move(endpoint));
}

GeneratorResponse generate_with_retry(Generator& generator,
                                      const GeneratorRequest& request,
                                      const RetryPolicy& policy) {
  auto backoff = policy.initial_backoff;
  const int attempts = std::max(1, policy.attempts);
  for (int attempt = 1;; ++attempt) {
    try {
      return generator.generate(request);
    } catch (const EndpointError& e) {
      if (!e.retryable() || attempt >= attempts) throw;
    }
    std::this_thread::sleep_for(backoff);
    backoff *= 2;
  }
}

}  // namespace rlk
