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

#ifndef FAULTLINE_PIPELINE_HPP_
#define FAULTLINE_PIPELINE_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "faultline/analyst.hpp"
#include "faultline/baselines.hpp"
#include "faultline/consensus.hpp"
#include "faultline/context.hpp"
#include "faultline/gateway.hpp"
#include "faultline/trace.hpp"

namespace faultline {

class PromptLibrary;

enum class PhaseMode { unified, decoupled };
enum class ExtractionMode { pattern, model };

std::string_view to_string(PhaseMode m) noexcept;
PhaseMode parse_phase_mode(std::string_view s);
std::string_view to_string(ExtractionMode m) noexcept;
ExtractionMode parse_extraction_mode(std::string_view s);

struct PipelineConfig {
  std::size_t panel_size = 3;
  double threshold = 0.3;
  PhaseMode phase = PhaseMode::decoupled;
  std::optional<ContextType> context_type;
  bool with_ground_truth = true;
  std::uint64_t seed = 0;
  ExtractionMode extraction = ExtractionMode::pattern;
  // Draw a fresh panel for the step phase instead of reusing the agent
  // phase's panel.
  bool resample_step_panel = false;
  std::size_t max_in_flight = 3;
  std::string model_id;

  void validate() const;  // throws std::invalid_argument

  bool operator==(const PipelineConfig&) const = default;
};

void to_json(nlohmann::json& j, const PipelineConfig& c);
void from_json(const nlohmann::json& j, PipelineConfig& c);

inline constexpr std::string_view kStepIndeterminate =
    "step could not be determined by consensus";

struct EchoOutcome {
  Attribution attribution;
  // Unified: the single consensus. Decoupled: the agent-phase consensus
  // with the step-phase step (and its step votes) merged in.
  ConsensusResult consensus;
  std::optional<ConsensusResult> agent_phase;
  std::optional<ConsensusResult> step_phase;
  std::vector<AnalystProfile> panel;
  std::vector<AnalystProfile> step_panel;  // decoupled only
  std::vector<PhaseAnalyses> analyses;
  TokenUsage usage;
  std::size_t calls = 0;
  std::size_t failed_calls = 0;
  std::vector<std::string> request_digests;  // sorted
  std::vector<std::string> missing_digests;  // replay misses, sorted
};

// Panel seed for one case: the run seed mixed with a stable hash of the
// case key, so panels are re-drawn per case but reproducible.
std::uint64_t case_seed(std::uint64_t seed, std::string_view case_key);

// Hierarchical contexts, then one panel (unified) or an agent-phase panel
// followed by a step-phase panel conditioned on its attribution
// (decoupled), then consensus. Never throws for provider failures.
EchoOutcome run_echo(CompletionProvider& provider,
                     const InteractionTrace& trace,
                     const PipelineConfig& config,
                     std::string_view case_key = {},
                     const PromptLibrary* prompts = nullptr);

// Final attribution: first agent of the agent consensus and the step of the
// step consensus.
Attribution project_attribution(const ConsensusResult& agent_consensus,
                                const ConsensusResult& step_consensus);

// Config, panel composition and request digests of a run.
nlohmann::json run_manifest(const PipelineConfig& config,
                            const EchoOutcome& outcome);
// Reads the config back out of a manifest.
PipelineConfig config_from_manifest(const nlohmann::json& manifest);

void to_json(nlohmann::json& j, const EchoOutcome& o);

}  // namespace faultline

#endif  // FAULTLINE_PIPELINE_HPP_
