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

#ifndef FAULTLINE_ANALYST_HPP_
#define FAULTLINE_ANALYST_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "faultline/context.hpp"
#include "faultline/gateway.hpp"
#include "faultline/trace.hpp"

namespace faultline {

class PromptLibrary;

enum class AnalystRole {
  conservative,
  liberal,
  detail_focused,
  pattern_focused,
  skeptical,
  general,
};

std::string_view to_string(AnalystRole r) noexcept;
// Unknown names map to `general`.
AnalystRole analyst_role_or_general(std::string_view s) noexcept;

inline constexpr double kMinAnalystTemperature = 0.3;
inline constexpr double kMaxAnalystTemperature = 0.9;

struct AnalystProfile {
  AnalystRole role = AnalystRole::general;
  std::string focus_instructions;
  double temperature = 0.7;

  bool operator==(const AnalystProfile&) const = default;
};

// The six specialist roles, in declaration order, at temperature 0.7.
std::vector<AnalystProfile> builtin_profiles();
// Profile for a role name; unknown names get the general profile.
AnalystProfile profile_for(std::string_view role_name);

// Draws k distinct profiles without replacement from a generator seeded
// with `seed`, then assigns temperatures evenly spaced over [0.3, 0.9]
// (k = 1 gets the midpoint). Throws std::invalid_argument unless
// 1 <= k <= pool.size().
std::vector<AnalystProfile> sample_panel(std::span<const AnalystProfile> pool,
                                         std::size_t k, std::uint64_t seed);

enum class ConclusionKind { single_agent, multi_agent };

std::string_view to_string(ConclusionKind k) noexcept;

struct AgentEvaluation {
  std::string agent_name;
  std::optional<std::int64_t> step_index;
  double error_likelihood = 0.0;
  std::string reasoning;
  std::string evidence;

  bool operator==(const AgentEvaluation&) const = default;
};

struct Conclusion {
  ConclusionKind kind = ConclusionKind::single_agent;
  std::vector<std::string> attribution;  // empty: no attribution
  std::optional<std::int64_t> mistake_step;
  double confidence = 0.0;
  std::string reasoning;
  // Producing analyst, when the conclusion came from a panel slot.
  std::optional<std::size_t> analyst_id;

  bool operator==(const Conclusion&) const = default;
};

inline constexpr std::string_view kParseFailureReasoning =
    "Failed to parse analysis response";
inline constexpr std::string_view kParseFailureSummary =
    "Error parsing response";

struct AnalysisResult {
  std::string analysis_summary;
  std::vector<AgentEvaluation> agent_evaluations;
  Conclusion primary_conclusion;
  std::vector<Conclusion> alternative_hypotheses;
  std::size_t analyst_id = 0;
  std::string raw_response;
  TokenUsage usage;
  bool parsed = false;
  std::string provider_error;  // non-empty when the call itself failed

  bool operator==(const AnalysisResult&) const = default;
};

// The fallback verdict used whenever a response cannot be parsed.
AnalysisResult fallback_analysis(std::string raw_response);

enum class AnalysisPhase { unified, agent, step };

std::string_view to_string(AnalysisPhase p) noexcept;
AnalysisPhase parse_analysis_phase(std::string_view s);

struct PhaseAnalyses {
  AnalysisPhase phase = AnalysisPhase::unified;
  std::vector<AnalysisResult> results;  // panel order
};

// "=== CONVERSATION AGENTS ===" listing of every step followed by the first
// step's rendered hierarchical context (cut at 1000 characters).
std::string compose_summary(const InteractionTrace& trace,
                            std::span<const HierarchicalContext> contexts);

struct PromptPair {
  std::string system_prompt;
  std::string user_prompt;
};

// `prior_attribution` is used by the step phase to name the agents the
// agent phase settled on.
PromptPair compose_analysis_prompt(
    std::string_view summary, const InteractionTrace& trace,
    const AnalystProfile& profile, AnalysisPhase phase, bool with_ground_truth,
    std::span<const std::string> prior_attribution = {},
    const PromptLibrary* prompts = nullptr);

// Never throws. Failures collapse to fallback_analysis(text).
AnalysisResult parse_analysis_output(std::string_view text);

struct PanelOptions {
  std::string model_id;
  double top_p = 0.9;
  int max_tokens = 4096;
  std::size_t max_in_flight = 3;
  std::vector<std::string> prior_attribution;
  const PromptLibrary* prompts = nullptr;
};

// One completion per analyst at the analyst's temperature, run concurrently
// up to options.max_in_flight. A failing analyst degrades to its fallback
// result; the panel never aborts.
PhaseAnalyses run_panel(CompletionProvider& provider,
                        const InteractionTrace& trace,
                        std::span<const HierarchicalContext> contexts,
                        std::span<const AnalystProfile> panel,
                        AnalysisPhase phase, bool with_ground_truth,
                        const PanelOptions& options = {});

void to_json(nlohmann::json& j, const AgentEvaluation& e);
void to_json(nlohmann::json& j, const Conclusion& c);
void to_json(nlohmann::json& j, const AnalysisResult& r);
void to_json(nlohmann::json& j, const AnalystProfile& p);

}  // namespace faultline

#endif  // FAULTLINE_ANALYST_HPP_
