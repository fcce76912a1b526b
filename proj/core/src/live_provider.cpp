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

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "faultline/error.hpp"
#include "faultline/gateway.hpp"

namespace faultline {

using nlohmann::json;

std::chrono::milliseconds RetryPolicy::backoff_before(int attempt) const {
  if (attempt <= 1) return std::chrono::milliseconds{0};
  const double scaled = static_cast<double>(initial_backoff.count()) *
                        std::pow(multiplier, attempt - 2);
  const double capped = std::min(scaled, static_cast<double>(max_backoff.count()));
  return std::chrono::milliseconds{static_cast<std::int64_t>(capped)};
}

bool is_retryable_status(int status) noexcept {
  return status == 408 || status == 429 || (status >= 500 && status <= 599);
}

std::string_view to_string(WireFormat w) noexcept {
  return w == WireFormat::anthropic_messages ? "anthropic_messages" : "openai_chat";
}

WireFormat parse_wire_format(std::string_view s) {
  if (s == "openai_chat" || s == "openai") return WireFormat::openai_chat;
  if (s == "anthropic_messages" || s == "anthropic") {
    return WireFormat::anthropic_messages;
  }
  throw std::invalid_argument("unknown wire format '" + std::string(s) + "'");
}

namespace {

std::optional<std::string> env(const char* name) {
  const char* v = std::getenv(name);
  if (v == nullptr || *v == '\0') return std::nullopt;
  return std::string(v);
}

std::string_view default_path(WireFormat w) {
  return w == WireFormat::anthropic_messages ? "/v1/messages"
                                             : "/v1/chat/completions";
}

// Splits "scheme://host[:port][/prefix]" into the httplib client origin and
// the path prefix.
std::pair<std::string, std::string> split_base_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  const auto host_start = scheme_end == std::string::npos ? 0 : scheme_end + 3;
  const auto slash = url.find('/', host_start);
  if (slash == std::string::npos) return {url, ""};
  std::string prefix = url.substr(slash);
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  return {url.substr(0, slash), prefix};
}

std::int64_t usage_field(const json& usage, const char* key) {
  auto it = usage.find(key);
  if (it == usage.end() || !it->is_number()) return 0;
  return it->get<std::int64_t>();
}

}  // namespace

LiveConfig LiveConfig::from_env() {
  LiveConfig c;
  if (auto v = env("FAULTLINE_WIRE_FORMAT")) c.wire = parse_wire_format(*v);
  if (auto v = env("FAULTLINE_API_BASE")) {
    c.base_url = *v;
  } else if (c.wire == WireFormat::anthropic_messages) {
    c.base_url = "https://api.anthropic.com";
  }
  if (auto v = env("FAULTLINE_API_PATH")) c.path = *v;
  if (auto v = env("FAULTLINE_MODEL")) c.model_id = *v;
  if (auto v = env("FAULTLINE_API_KEY")) {
    c.api_key = *v;
  } else if (auto v = env(c.wire == WireFormat::anthropic_messages
                              ? "ANTHROPIC_API_KEY"
                              : "OPENAI_API_KEY")) {
    c.api_key = *v;
  }
  return c;
}

json build_wire_request(const CompletionRequest& request, const LiveConfig& config) {
  const std::string& model =
      request.model_id.empty() ? config.model_id : request.model_id;
  json body = {
      {"model", model},
      {"temperature", request.temperature},
      {"top_p", request.top_p},
      {"max_tokens", request.max_tokens},
  };
  if (config.wire == WireFormat::anthropic_messages) {
    body["system"] = request.system_prompt;
    body["messages"] = json::array({{{"role", "user"}, {"content", request.user_prompt}}});
  } else {
    body["messages"] = json::array({
        {{"role", "system"}, {"content", request.system_prompt}},
        {{"role", "user"}, {"content", request.user_prompt}},
    });
  }
  return body;
}

CompletionResponse parse_wire_response(const json& body, WireFormat wire) {
  CompletionResponse out;
  try {
    if (wire == WireFormat::anthropic_messages) {
      const json& content = body.at("content");
      if (!content.is_array()) throw ProviderError("response content is not a list");
      for (const auto& block : content) {
        if (block.value("type", "") == "text") {
          out.text += block.at("text").get<std::string>();
        }
      }
      if (auto u = body.find("usage"); u != body.end() && u->is_object()) {
        out.usage = {usage_field(*u, "input_tokens"), usage_field(*u, "output_tokens")};
      }
    } else {
      const json& choices = body.at("choices");
      if (!choices.is_array() || choices.empty()) {
        throw ProviderError("response has no choices");
      }
      const json& content = choices.front().at("message").at("content");
      if (!content.is_string()) throw ProviderError("response content is not text");
      out.text = content.get<std::string>();
      if (auto u = body.find("usage"); u != body.end() && u->is_object()) {
        out.usage = {usage_field(*u, "prompt_tokens"),
                     usage_field(*u, "completion_tokens")};
      }
    }
  } catch (const json::exception& e) {
    throw ProviderError(std::string("unexpected response shape: ") + e.what());
  }
  return out;
}

LiveProvider::LiveProvider(LiveConfig config) : config_(std::move(config)) {
  if (config_.retry.max_attempts < 1) {
    throw std::invalid_argument("retry.max_attempts must be at least 1");
  }
}

CompletionResponse LiveProvider::complete(const CompletionRequest& request) {
  request.validate();
  const auto [origin, prefix] = split_base_url(config_.base_url);
  const std::string path =
      prefix + (config_.path.empty() ? std::string(default_path(config_.wire))
                                     : config_.path);
  const std::string payload = build_wire_request(request, config_).dump();

  httplib::Headers headers;
  if (config_.wire == WireFormat::anthropic_messages) {
    headers.emplace("anthropic-version", "2023-06-01");
    if (!config_.api_key.empty()) headers.emplace("x-api-key", config_.api_key);
  } else if (!config_.api_key.empty()) {
    headers.emplace("Authorization", "Bearer " + config_.api_key);
  }

  httplib::Client client(origin);
  client.set_connection_timeout(config_.timeout);
  client.set_read_timeout(config_.timeout);
  client.set_write_timeout(config_.timeout);

  std::string last_error;
  for (int attempt = 1; attempt <= config_.retry.max_attempts; ++attempt) {
    if (auto wait = config_.retry.backoff_before(attempt); wait.count() > 0) {
      std::this_thread::sleep_for(wait);
    }
    auto res = client.Post(path, headers, payload, "application/json");
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
      spdlog::warn("attempt {}/{} failed: {}", attempt,
                   config_.retry.max_attempts, last_error);
      continue;
    }
    if (res->status >= 200 && res->status < 300) {
      json body = json::parse(res->body, nullptr, false);
      if (body.is_discarded()) throw ProviderError("response body is not JSON");
      return parse_wire_response(body, config_.wire);
    }
    last_error = "HTTP " + std::to_string(res->status);
    if (!is_retryable_status(res->status)) {
      throw ProviderError(last_error + ": " + res->body.substr(0, 500));
    }
    spdlog::warn("attempt {}/{} failed: {}", attempt, config_.retry.max_attempts,
                 last_error);
  }
  throw ProviderError("giving up after " +
                      std::to_string(config_.retry.max_attempts) +
                      " attempts: " + last_error);
}

}  // namespace faultline
