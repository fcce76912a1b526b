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

#ifndef FAULTLINE_BASELINES_HPP_
#define FAULTLINE_BASELINES_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include <nlohmann/json_fwd.hpp>

#include "faultline/context.hpp"
#include "faultline/gateway.hpp"
#include "faultline/trace.hpp"

namespace faultline {

class PromptLibrary;

inline constexpr std::string_view kUnknownAgent = "Unknown";

// A strategy's final answer for one trace. An unresolvable step is left
// empty; an unresolvable agent is "Unknown".
struct Attribution {
  std::string mistake_agent{kUnknownAgent};
  std::optional<std::int64_t> mistake_step;
  std::string mistake_reason;
  TokenUsage usage;
  std::size_t calls = 0;

  bool is_unknown() const noexcept { return mistake_agent == kUnknownAgent; }
};

struct StrategyOptions {
  std::string model_id;
  double temperature = 0.0;             // all-at-once, step-by-step, binary search
  double step_agent_temperature = 1.0;  // context-aware step agents
  double judge_temperature = 0.0;
  int max_tokens = 4096;
  std::size_t max_in_flight = 3;
  const PromptLibrary* prompts = nullptr;
};

// "Step i - name (role):\n<content>\n" for steps [begin, end).
std::string render_steps(const InteractionTrace& trace, std::size_t begin,
                         std::size_t end);

// Reads {mistake_agent, mistake_step, mistake_reason} from the first
// <json></json> span (or first JSON object). mistake_step may be an integer
// or a string containing one ("3", "step_3"). Returns the "Unknown"
// sentinel with reason "Error parsing response" on failure.
Attribution parse_attribution_reply(std::string_view text);

// Leading yes/no of a reply, if any.
std::optional<bool> parse_yes_no(std::string_view text);

enum class SearchHalf { first, second };
std::optional<SearchHalf> parse_half(std::string_view text);

// Whole trace in one call.
Attribution all_at_once(CompletionProvider& provider,
                        const InteractionTrace& trace, bool with_ground_truth,
                        const StrategyOptions& options = {});

// One yes/no call per step until the first "yes". Call failures count as
// "no". With no "yes", the last step is attributed.
Attribution step_by_step(CompletionProvider& provider,
                         const InteractionTrace& trace, bool with_ground_truth,
                         const StrategyOptions& options = {});

inline constexpr std::string_view kNoErrorDetected =
    "no error detected before trace end";

// Halves [lo, hi) at (lo + hi) / 2 until one step is left. Unparseable
// answers and failed calls pick the first half.
Attribution binary_search(CompletionProvider& provider,
                          const InteractionTrace& trace,
                          bool with_ground_truth,
                          const StrategyOptions& options = {});

struct StepArgument {
  std::string step_id;  // "step_<index>"
  std::string agent_name;
  std::string analysis;
  TokenUsage usage;
  bool available = true;
};

inline constexpr std::string_view kArgumentUnavailable = "unavailable";

std::string step_id_for(std::size_t index);
std::optional<std::size_t> parse_step_id(std::string_view step_id);

// Context-aware step agent: argues that its own step caused the failure.
StepArgument argue_step(CompletionProvider& provider,
                        const FixedWindowContext& ctx,
                        const InteractionTrace& trace, bool with_ground_truth,
                        const StrategyOptions& options = {});
StepArgument argue_step(CompletionProvider& provider,
                        const HierarchicalContext& ctx,
                        const InteractionTrace& trace, bool with_ground_truth,
                        const StrategyOptions& options = {});

// Final judge over the step agents' arguments. Throws std::invalid_argument
// when `arguments` is empty.
Attribution judge(CompletionProvider& provider,
                  std::span<const StepArgument> arguments,
                  const InteractionTrace& trace, bool with_ground_truth,
                  const StrategyOptions& options = {});

// Fixed +-1 window step agents followed by the judge.
Attribution fixed_window_judge(CompletionProvider& provider,
                               const InteractionTrace& trace,
                               bool with_ground_truth,
                               const StrategyOptions& options = {});
// Same with hierarchical contexts.
Attribution hierarchical_judge(CompletionProvider& provider,
                               const InteractionTrace& trace,
                               bool with_ground_truth,
                               const StrategyOptions& options = {},
                               std::optional<ContextType> type = std::nullopt);

void to_json(nlohmann::json& j, const Attribution& a);
void to_json(nlohmann::json& j, const StepArgument& a);

}  // namespace faultline

#endif  // FAULTLINE_BASELINES_HPP_
