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

#ifndef FAULTLINE_TOOLS_CLI_CONFIG_HPP_
#define FAULTLINE_TOOLS_CLI_CONFIG_HPP_

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "faultline/eval.hpp"
#include "faultline/pipeline.hpp"
#include "faultline/trace.hpp"

namespace faultline::cli {

// Bad flag values, unreadable config files and the like. Maps to exit 2.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using EnvLookup = std::function<std::optional<std::string>(std::string_view)>;

// Reads the process environment.
std::optional<std::string> process_env(std::string_view name);

struct KeySpec {
  std::string name;       // config-file key, e.g. "panel_size"
  std::string flag;       // "--panel-size"
  std::string env;        // "FAULTLINE_PANEL_SIZE"
  std::optional<std::string> default_value;
  std::string help;
};

// Every setting the tool understands.
const std::vector<KeySpec>& key_specs();

// Effective settings merged from defaults < config file < environment <
// flags, each value remembering where it came from.
class CliConfig {
 public:
  struct Entry {
    std::string value;
    std::string source;  // "default", "file:<path>", "env:<NAME>", "flag:<--x>"
  };

  // `flags` maps key names to values given on the command line. The config
  // file is taken from flags["config"], else FAULTLINE_CONFIG.
  static CliConfig resolve(const std::map<std::string, std::string>& flags,
                           const EnvLookup& env = process_env);

  std::optional<std::string> get(std::string_view key) const;
  const Entry* entry(std::string_view key) const;
  std::string value_or(std::string_view key, std::string fallback) const;

  // Typed views. Throw InputError naming the key and its source.
  PipelineConfig pipeline() const;
  ScoreOptions score() const;
  TraceParseOptions parse_options() const;
  std::vector<Subset> subsets() const;
  std::vector<std::string> strategies() const;
  bool json_output() const;
  std::size_t max_in_flight() const;

  // One line per key: name = value  [source].
  std::string explain() const;

 private:
  std::map<std::string, Entry, std::less<>> entries_;

  std::string describe(std::string_view key) const;
  bool boolean(std::string_view key) const;
  std::uint64_t unsigned_integer(std::string_view key) const;
  double real(std::string_view key) const;
};

}  // namespace faultline::cli

#endif  // FAULTLINE_TOOLS_CLI_CONFIG_HPP_
