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

#ifndef FAULTLINE_PROMPTS_HPP_
#define FAULTLINE_PROMPTS_HPP_

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace faultline {

// Prompt templates keyed by name ("judge.system", "all_at_once.user", ...).
// Placeholders use the form {{name}}.
class PromptLibrary {
 public:
  using Vars = std::map<std::string, std::string, std::less<>>;

  static const PromptLibrary& builtin();
  // Built-in templates, overridden by every <key>.txt found in `dir`.
  static PromptLibrary with_overrides(const std::filesystem::path& dir);

  // Throws std::out_of_range naming the key.
  const std::string& get(std::string_view key) const;
  std::string render(std::string_view key, const Vars& vars) const;
  std::vector<std::string> keys() const;

  void set(std::string key, std::string tmpl);

 private:
  std::map<std::string, std::string, std::less<>> templates_;
};

namespace detail {
// Compiled-in copy of a data file, keyed by its path under data/ without
// the .txt suffix. Empty view when absent.
std::string_view embedded_data(std::string_view key) noexcept;
std::vector<std::string_view> embedded_keys();
}  // namespace detail

}  // namespace faultline

#endif  // FAULTLINE_PROMPTS_HPP_
