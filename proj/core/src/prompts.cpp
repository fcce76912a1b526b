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

#include "faultline/prompts.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "faultline/text.hpp"

namespace faultline {

namespace detail {

extern const std::pair<std::string_view, std::string_view> kEmbeddedData[];
extern const std::size_t kEmbeddedDataCount;

std::string_view embedded_data(std::string_view key) noexcept {
  for (std::size_t i = 0; i < kEmbeddedDataCount; ++i) {
    if (kEmbeddedData[i].first == key) return kEmbeddedData[i].second;
  }
  return {};
}

std::vector<std::string_view> embedded_keys() {
  std::vector<std::string_view> keys;
  for (std::size_t i = 0; i < kEmbeddedDataCount; ++i) {
    keys.push_back(kEmbeddedData[i].first);
  }
  return keys;
}

}  // namespace detail

namespace {

constexpr std::string_view kPromptPrefix = "prompts/";

std::string without_final_newline(std::string_view s) {
  if (!s.empty() && s.back() == '\n') s.remove_suffix(1);
  return std::string(s);
}

}  // namespace

const PromptLibrary& PromptLibrary::builtin() {
  static const PromptLibrary lib = [] {
    PromptLibrary l;
    for (std::string_view key : detail::embedded_keys()) {
      if (!key.starts_with(kPromptPrefix)) continue;
      l.set(std::string(key.substr(kPromptPrefix.size())),
            without_final_newline(detail::embedded_data(key)));
    }
    return l;
  }();
  return lib;
}

PromptLibrary PromptLibrary::with_overrides(const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) {
    throw std::invalid_argument("prompt directory not found: " + dir.string());
  }
  PromptLibrary lib = builtin();
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".txt") continue;
    std::ifstream in(entry.path(), std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    lib.set(entry.path().stem().string(), without_final_newline(ss.str()));
  }
  return lib;
}

const std::string& PromptLibrary::get(std::string_view key) const {
  auto it = templates_.find(key);
  if (it == templates_.end()) {
    throw std::out_of_range("unknown prompt template: " + std::string(key));
  }
  return it->second;
}

std::string PromptLibrary::render(std::string_view key, const Vars& vars) const {
  return text::render_template(get(key), vars);
}

std::vector<std::string> PromptLibrary::keys() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : templates_) out.push_back(k);
  return out;
}

void PromptLibrary::set(std::string key, std::string tmpl) {
  templates_[std::move(key)] = std::move(tmpl);
}

}  // namespace faultline
