// Copyright 2026 The Faultline Authors.
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

#ifndef FAULTLINE_GATEWAY_HPP_
#define FAULTLINE_GATEWAY_HPP_

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace faultline {

struct TokenUsage {
  std::int64_t input_tokens = 0;
  std::int64_t output_tokens = 0;

  std::int64_t total() const noexcept { return input_tokens + output_tokens; }

  TokenUsage& operator+=(const TokenUsage& o) noexcept {
    input_tokens += o.input_tokens;
    output_tokens += o.output_tokens;
    return *this;
  }
  friend TokenUsage operator+(TokenUsage a, const TokenUsage& b) noexcept {
    return a += b;
  }
  bool operator==(const TokenUsage&) const = default;
};

// One system + one user message. Defaults follow the analyst settings
// (top_p 0.9, 4096 output tokens).
struct CompletionRequest {
  std::string system_prompt;
  std::string user_prompt;
  double temperature = 0.7;
  double top_p = 0.9;
  int max_tokens = 4096;
  std::string model_id;

  // Throws std::invalid_argument on out-of-range knobs.
  void validate() const;
};

struct CompletionResponse {
  std::string text;
  TokenUsage usage;
};

// The single boundary every strategy talks to. Implementations must be
// callable concurrently.
class CompletionProvider {
 public:
  virtual ~CompletionProvider() = default;
  // Throws ProviderError (or FixtureMissError) on failure.
  virtual CompletionResponse complete(const CompletionRequest& request) = 0;
};

// --- replay keying ---------------------------------------------------------

struct DigestOptions {
  bool include_temperature = true;
  bool include_model_id = false;
};

// Canonical JSON text of the request: prompts whitespace-collapsed, keys
// sorted, optional fields per `options`.
std::string canonical_request(const CompletionRequest& request,
                              const DigestOptions& options = {});
// SHA-256 hex of canonical_request.
std::string request_digest(const CompletionRequest& request,
                           const DigestOptions& options = {});

struct Fixture {
  std::string request_digest;
  std::string response_text;
  TokenUsage usage;
};

// Directory of <digest>.json files, one per recorded request.
class FixtureStore {
 public:
  explicit FixtureStore(std::filesystem::path dir);

  const std::filesystem::path& dir() const noexcept { return dir_; }
  std::optional<Fixture> find(const std::string& digest) const;
  // Creates the directory on demand. Throws std::runtime_error on I/O
  // failure.
  void put(const Fixture& fixture) const;
  // Sorted.
  std::vector<std::string> digests() const;

 private:
  std::filesystem::path dir_;
};

class ReplayProvider final : public CompletionProvider {
 public:
  explicit ReplayProvider(FixtureStore store, DigestOptions options = {});
  CompletionResponse complete(const CompletionRequest& request) override;

 private:
  FixtureStore store_;
  DigestOptions options_;
};

// Serves from `inner` and persists every response. A failed write is logged
// and counted; the response is still returned.
class RecordingProvider final : public CompletionProvider {
 public:
  RecordingProvider(std::shared_ptr<CompletionProvider> inner,
                    FixtureStore store, DigestOptions options = {});
  CompletionResponse complete(const CompletionRequest& request) override;

  std::size_t write_failures() const;

 private:
  std::shared_ptr<CompletionProvider> inner_;
  FixtureStore store_;
  DigestOptions options_;
  mutable std::mutex mu_;
  std::size_t write_failures_ = 0;
};

// Test and offline backend: responses are a function of the request.
class ScriptedProvider final : public CompletionProvider {
 public:
  // `call_index` is the 0-based arrival order of the call.
  using Script = std::function<CompletionResponse(const CompletionRequest&,
                                                  std::size_t call_index)>;

  explicit ScriptedProvider(Script script);
  static std::shared_ptr<ScriptedProvider> constant(std::string text,
                                                    TokenUsage usage = {});
  // Replies in order; the last reply repeats once the list is exhausted.
  static std::shared_ptr<ScriptedProvider> sequence(
      std::vector<std::string> replies, TokenUsage usage = {});

  CompletionResponse complete(const CompletionRequest& request) override;

  std::size_t calls() const;
  std::vector<CompletionRequest> requests() const;

 private:
  Script script_;
  mutable std::mutex mu_;
  std::vector<CompletionRequest> requests_;
};

// Bounds the number of concurrent calls into `inner`.
class InFlightLimiter final : public CompletionProvider {
 public:
  InFlightLimiter(std::shared_ptr<CompletionProvider> inner,
                  std::ptrdiff_t max_in_flight);
  CompletionResponse complete(const CompletionRequest& request) override;

 private:
  std::shared_ptr<CompletionProvider> inner_;
  std::counting_semaphore<> slots_;
};

// Call/usage/failure accounting around any provider.
class MeteredProvider final : public CompletionProvider {
 public:
  struct Snapshot {
    std::size_t calls = 0;
    std::size_t failures = 0;
    std::size_t fixture_misses = 0;
    TokenUsage usage;
    std::vector<std::string> missing_digests;
    std::vector<std::string> errors;
    // Digest of every request seen, in arrival order.
    std::vector<std::string> request_digests;
  };

  explicit MeteredProvider(std::shared_ptr<CompletionProvider> inner,
                           DigestOptions options = {});
  CompletionResponse complete(const CompletionRequest& request) override;

  Snapshot snapshot() const;

 private:
  std::shared_ptr<CompletionProvider> inner_;
  DigestOptions options_;
  mutable std::mutex mu_;
  Snapshot stats_;
};

// --- live HTTP -------------------------------------------------------------

struct RetryPolicy {
  int max_attempts = 3;
  std::chrono::milliseconds initial_backoff{500};
  double multiplier = 2.0;
  std::chrono::milliseconds max_backoff{8000};

  std::chrono::milliseconds backoff_before(int attempt) const;
};

// Transport failures are always retried; HTTP statuses per this predicate
// (408, 429 and 5xx).
bool is_retryable_status(int status) noexcept;

enum class WireFormat { openai_chat, anthropic_messages };

std::string_view to_string(WireFormat w) noexcept;
WireFormat parse_wire_format(std::string_view s);

struct LiveConfig {
  std::string base_url = "https://api.openai.com";
  std::string path;  // empty: the wire format's default endpoint path
  std::string api_key;
  std::string model_id = "gpt-4o-mini";
  WireFormat wire = WireFormat::openai_chat;
  std::chrono::seconds timeout{120};
  RetryPolicy retry;

  // FAULTLINE_API_BASE, FAULTLINE_API_PATH, FAULTLINE_API_KEY (falls back to
  // OPENAI_API_KEY / ANTHROPIC_API_KEY), FAULTLINE_MODEL,
  // FAULTLINE_WIRE_FORMAT.
  static LiveConfig from_env();
};

// Request body for the configured wire format.
nlohmann::json build_wire_request(const CompletionRequest& request,
                                  const LiveConfig& config);
// Throws ProviderError when the body lacks the expected fields.
CompletionResponse parse_wire_response(const nlohmann::json& body,
                                       WireFormat wire);

class LiveProvider final : public CompletionProvider {
 public:
  explicit LiveProvider(LiveConfig config);
  CompletionResponse complete(const CompletionRequest& request) override;

  const LiveConfig& config() const noexcept { return config_; }

 private:
  LiveConfig config_;
};

}  // namespace faultline

#endif  // FAULTLINE_GATEWAY_HPP_
