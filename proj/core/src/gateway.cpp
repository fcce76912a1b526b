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

#include "faultline/gateway.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <system_error>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "faultline/error.hpp"
#include "faultline/text.hpp"

namespace faultline {

namespace fs = std::filesystem;
using nlohmann::json;

void CompletionRequest::validate() const {
  if (!std::isfinite(temperature) || temperature < 0.0 || temperature > 2.0) {
    throw std::invalid_argument("temperature must be within [0, 2]");
  }
  if (!std::isfinite(top_p) || top_p <= 0.0 || top_p > 1.0) {
    throw std::invalid_argument("top_p must be within (0, 1]");
  }
  if (max_tokens <= 0) throw std::invalid_argument("max_tokens must be positive");
}

std::string canonical_request(const CompletionRequest& request,
                              const DigestOptions& options) {
  // nlohmann::json objects keep keys sorted, which makes dump() canonical.
  json doc = {
      {"system", text::collapse_whitespace(request.system_prompt)},
      {"user", text::collapse_whitespace(request.user_prompt)},
      {"top_p", request.top_p},
      {"max_tokens", request.max_tokens},
  };
  if (options.include_temperature) doc["temperature"] = request.temperature;
  if (options.include_model_id) doc["model_id"] = request.model_id;
  return doc.dump();
}

std::string request_digest(const CompletionRequest& request,
                           const DigestOptions& options) {
  return text::sha256_hex(canonical_request(request, options));
}

// --- fixtures --------------------------------------------------------------

FixtureStore::FixtureStore(fs::path dir) : dir_(std::move(dir)) {}

std::optional<Fixture> FixtureStore::find(const std::string& digest) const {
  const fs::path file = dir_ / (digest + ".json");
  std::ifstream in(file);
  if (!in) return std::nullopt;
  json doc;
  try {
    doc = json::parse(in);
    Fixture f;
    f.request_digest = doc.at("request_digest").get<std::string>();
    f.response_text = doc.at("response_text").get<std::string>();
    if (auto it = doc.find("token_usage"); it != doc.end() && it->is_object()) {
      f.usage.input_tokens = it->value("input_tokens", std::int64_t{0});
      f.usage.output_tokens = it->value("output_tokens", std::int64_t{0});
    }
    return f;
  } catch (const json::exception& e) {
    throw ParseError(file.string(), std::string("malformed fixture: ") + e.what());
  }
}

void FixtureStore::put(const Fixture& fixture) const {
  std::error_code ec;
  fs::create_directories(dir_, ec);
  if (ec) throw std::runtime_error("cannot create " + dir_.string() + ": " + ec.message());
  const json doc = {
      {"request_digest", fixture.request_digest},
      {"response_text", fixture.response_text},
      {"token_usage",
       {{"input_tokens", fixture.usage.input_tokens},
        {"output_tokens", fixture.usage.output_tokens}}},
  };
  const fs::path file = dir_ / (fixture.request_digest + ".json");
  const fs::path tmp = dir_ / (fixture.request_digest + ".json.tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << doc.dump(2) << '\n';
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
  }
  fs::rename(tmp, file, ec);
  if (ec) throw std::runtime_error("cannot write " + file.string() + ": " + ec.message());
}

std::vector<std::string> FixtureStore::digests() const {
  std::vector<std::string> out;
  std::error_code ec;
  if (!fs::is_directory(dir_, ec)) return out;
  for (const auto& entry : fs::directory_iterator(dir_)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".json") continue;
    out.push_back(entry.path().stem().string());
  }
  std::sort(out.begin(), out.end());
  return out;
}

ReplayProvider::ReplayProvider(FixtureStore store, DigestOptions options)
    : store_(std::move(store)), options_(options) {}

CompletionResponse ReplayProvider::complete(const CompletionRequest& request) {
  const std::string digest = request_digest(request, options_);
  auto fixture = store_.find(digest);
  if (!fixture) throw FixtureMissError(digest);
  return {fixture->response_text, fixture->usage};
}

RecordingProvider::RecordingProvider(std::shared_ptr<CompletionProvider> inner,
                                     FixtureStore store, DigestOptions options)
    : inner_(std::move(inner)), store_(std::move(store)), options_(options) {
  if (!inner_) throw std::invalid_argument("RecordingProvider needs a provider");
}

CompletionResponse RecordingProvider::complete(const CompletionRequest& request) {
  CompletionResponse resp = inner_->complete(request);
  const std::string digest = request_digest(request, options_);
  try {
    std::lock_guard lock(mu_);
    store_.put({digest, resp.text, resp.usage});
  } catch (const std::exception& e) {
    spdlog::error("fixture write failed for {}: {}", digest, e.what());
    std::lock_guard lock(mu_);
    ++write_failures_;
  }
  return resp;
}

std::size_t RecordingProvider::write_failures() const {
  std::lock_guard lock(mu_);
  return write_failures_;
}

// --- scripted --------------------------------------------------------------

ScriptedProvider::ScriptedProvider(Script script) : script_(std::move(script)) {
  if (!script_) throw std::invalid_argument("ScriptedProvider needs a script");
}

std::shared_ptr<ScriptedProvider> ScriptedProvider::constant(std::string text,
                                                             TokenUsage usage) {
  return std::make_shared<ScriptedProvider>(
      [text = std::move(text), usage](const CompletionRequest&, std::size_t) {
        return CompletionResponse{text, usage};
      });
}

std::shared_ptr<ScriptedProvider> ScriptedProvider::sequence(
    std::vector<std::string> replies, TokenUsage usage) {
  if (replies.empty()) throw std::invalid_argument("sequence needs a reply");
  return std::make_shared<ScriptedProvider>(
      [replies = std::move(replies), usage](const CompletionRequest&,
                                            std::size_t i) {
        return CompletionResponse{replies[std::min(i, replies.size() - 1)], usage};
      });
}

CompletionResponse ScriptedProvider::complete(const CompletionRequest& request) {
  std::size_t index;
  {
    std::lock_guard lock(mu_);
    index = requests_.size();
    requests_.push_back(request);
  }
  return script_(request, index);
}

std::size_t ScriptedProvider::calls() const {
  std::lock_guard lock(mu_);
  return requests_.size();
}

std::vector<CompletionRequest> ScriptedProvider::requests() const {
  std::lock_guard lock(mu_);
  return requests_;
}

// --- wrappers --------------------------------------------------------------

namespace {

std::ptrdiff_t checked_slots(std::ptrdiff_t n) {
  if (n < 1) throw std::invalid_argument("max_in_flight must be at least 1");
  return n;
}

}  // namespace

InFlightLimiter::InFlightLimiter(std::shared_ptr<CompletionProvider> inner,
                                 std::ptrdiff_t max_in_flight)
    : inner_(std::move(inner)), slots_(checked_slots(max_in_flight)) {
  if (!inner_) throw std::invalid_argument("InFlightLimiter needs a provider");
}

CompletionResponse InFlightLimiter::complete(const CompletionRequest& request) {
  slots_.acquire();
  struct Release {
    std::counting_semaphore<>& s;
    ~Release() { s.release(); }
  } release{slots_};
  return inner_->complete(request);
}

MeteredProvider::MeteredProvider(std::shared_ptr<CompletionProvider> inner,
                                 DigestOptions options)
    : inner_(std::move(inner)), options_(options) {
  if (!inner_) throw std::invalid_argument("MeteredProvider needs a provider");
}

CompletionResponse MeteredProvider::complete(const CompletionRequest& request) {
  const std::string digest = request_digest(request, options_);
  {
    std::lock_guard lock(mu_);
    ++stats_.calls;
    stats_.request_digests.push_back(digest);
  }
  try {
    CompletionResponse resp = inner_->complete(request);
    std::lock_guard lock(mu_);
    stats_.usage += resp.usage;
    return resp;
  } catch (const FixtureMissError& e) {
    std::lock_guard lock(mu_);
    ++stats_.failures;
    ++stats_.fixture_misses;
    stats_.missing_digests.push_back(e.digest());
    stats_.errors.emplace_back(e.what());
    throw;
  } catch (const std::exception& e) {
    std::lock_guard lock(mu_);
    ++stats_.failures;
    stats_.errors.emplace_back(e.what());
    throw;
  }
}

MeteredProvider::Snapshot MeteredProvider::snapshot() const {
  std::lock_guard lock(mu_);
  return stats_;
}

}  // namespace faultline
