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

#ifndef FAULTLINE_TOOLS_COMMANDS_HPP_
#define FAULTLINE_TOOLS_COMMANDS_HPP_

#include <filesystem>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "cli_config.hpp"
#include "faultline/gateway.hpp"

namespace faultline::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;
inline constexpr int kExitProvider = 3;
inline constexpr int kExitFixtureMiss = 4;

// How the provider named by the config is wrapped.
enum class ProviderMode { direct, record, replay };

// Mock backend driven by a rules file:
//   {"rules": [{"contains": "...", "reply": "...",
//               "usage": {"input_tokens": 1, "output_tokens": 2}}],
//    "default": "...", "default_usage": {...}}
// The first rule whose "contains" text occurs in the system or user prompt
// answers. Without a match and without a default the call fails.
std::shared_ptr<CompletionProvider> load_mock_provider(
    const std::filesystem::path& rules);

std::shared_ptr<CompletionProvider> make_provider(const CliConfig& config,
                                                  ProviderMode mode);

// Full command line (without the program name). Never throws.
int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err, const EnvLookup& env = process_env);

}  // namespace faultline::cli

#endif  // FAULTLINE_TOOLS_COMMANDS_HPP_
