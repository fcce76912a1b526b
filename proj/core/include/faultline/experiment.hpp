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

#ifndef FAULTLINE_EXPERIMENT_HPP_
#define FAULTLINE_EXPERIMENT_HPP_

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "faultline/baselines.hpp"
#include "faultline/eval.hpp"
#include "faultline/gateway.hpp"
#include "faultline/pipeline.hpp"
#include "faultline/trace.hpp"

namespace faultline {

// An attribution method comparable in the experiment matrix.
class Strategy {
 public:
  virtual ~Strategy() = default;
  virtual std::string name() const = 0;
  // Per-case audit payload (verdicts, consensus) goes into `audit`.
  virtual Attribution attribute(CompletionProvider& provider,
                                const LabeledCase& c, bool with_ground_truth,
                                nlohmann::json& audit) const = 0;
};

// echo (phase from config), echo_unified, echo_decoupled, all_at_once,
// step_by_step, binary_search, fixed_window_judge, hierarchical_judge.
std::vector<std::string> strategy_names();
// Throws std::invalid_argument for unknown names.
std::unique_ptr<Strategy> make_strategy(std::string_view name,
                                        const PipelineConfig& pipeline,
                                        const StrategyOptions& options,
                                        const PromptLibrary* prompts = nullptr);

struct ExperimentConfig {
  std::vector<std::string> strategies;
  std::vector<Condition> conditions{Condition::with_gt, Condition::without_gt};
  std::vector<Subset> subsets{Subset::hand_crafted,
                              Subset::algorithm_generated};
  PipelineConfig pipeline;
  StrategyOptions strategy_options;
  ScoreOptions score;
  // Audit files go here when set.
  std::optional<std::filesystem::path> run_dir;
};

void to_json(nlohmann::json& j, const ExperimentConfig& c);

struct CellKey {
  Condition condition;
  Subset subset;
  auto operator<=>(const CellKey&) const = default;
};

struct ExperimentResult {
  std::vector<EvalReport> reports;  // strategy x condition x subset
  std::map<Subset, RandomBaseline> random;
  TokenUsage total_usage;
  std::size_t total_calls = 0;
  std::size_t failed_calls = 0;
  std::size_t fixture_misses = 0;
  std::vector<std::string> missing_digests;
};

// Runs every strategy on every case of every selected subset under every
// condition. Strategies may be user-supplied. Per-case audit files are
// written under config.run_dir when set.
ExperimentResult run_experiment(
    const ExperimentConfig& config,
    const std::map<Subset, std::vector<LabeledCase>>& datasets,
    CompletionProvider& provider,
    std::span<const std::shared_ptr<const Strategy>> strategies);

// Convenience overload building strategies from config.strategies.
ExperimentResult run_experiment(
    const ExperimentConfig& config,
    const std::map<Subset, std::vector<LabeledCase>>& datasets,
    CompletionProvider& provider, const PromptLibrary* prompts = nullptr);

// Machine-readable report document.
nlohmann::json report_document(const ExperimentConfig& config,
                               const ExperimentResult& result);
// Plain-text table: rows are strategies, columns are the
// (subset, condition) cells, with agent, exact-step, tolerance and token
// sections.
std::string format_report_table(const ExperimentConfig& config,
                                const ExperimentResult& result);

}  // namespace faultline

#endif  // FAULTLINE_EXPERIMENT_HPP_
