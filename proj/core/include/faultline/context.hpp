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

#ifndef FAULTLINE_CONTEXT_HPP_
#define FAULTLINE_CONTEXT_HPP_

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "faultline/patterns.hpp"
#include "faultline/trace.hpp"

namespace faultline {

class CompletionProvider;
class PromptLibrary;

// Detail kept for a step, chosen by its distance from the target step:
// 1 -> full, 2-3 -> key_decisions, 4-6 -> summary, >6 -> milestones.
enum class DetailLevel { full, key_decisions, summary, milestones };

std::string_view to_string(DetailLevel d) noexcept;
DetailLevel detail_level_for_distance(std::size_t distance) noexcept;
// Word budget of the level's extractor; 0 for `full` (no budget).
std::size_t word_budget(DetailLevel d) noexcept;

// Context type a layer uses when no explicit type is requested
// (key decisions: decision_quality; summary and milestones: general).
ContextType default_context_type(DetailLevel d) noexcept;

inline constexpr std::string_view kNoContent = "No content available";
inline constexpr std::string_view kNoMilestones = "No milestones available";

// Pattern-based extractors. Pure functions of their arguments.
std::string extract_key_decision(
    std::string_view content, std::size_t max_words = 50,
    ContextType type = ContextType::decision_quality,
    const PatternTable& table = PatternTable::builtin());
std::string summarize_agent(std::string_view content,
                            std::size_t max_words = 20,
                            ContextType type = ContextType::general,
                            const PatternTable& table = PatternTable::builtin());
std::string obtain_milestones(
    std::string_view content, std::size_t max_words = 15,
    ContextType type = ContextType::general,
    const PatternTable& table = PatternTable::builtin());

struct ContextEntry {
  std::size_t index = 0;
  std::string name;
  std::string role;
  std::size_t distance = 0;
  DetailLevel detail_level = DetailLevel::full;
  std::string content;

  bool operator==(const ContextEntry&) const = default;
};

struct HierarchicalContext {
  AgentStep target;
  std::vector<ContextEntry> immediate;   // distance 1
  std::vector<ContextEntry> nearby;      // distance 2-3
  std::vector<ContextEntry> distant;     // distance 4-6
  std::vector<ContextEntry> milestones;  // distance > 6

  const std::vector<ContextEntry>& level(DetailLevel d) const noexcept;
  std::vector<ContextEntry>& level(DetailLevel d) noexcept;

  bool operator==(const HierarchicalContext&) const = default;
};

struct FixedWindowContext {
  std::optional<AgentStep> prev;
  AgentStep current;
  std::optional<AgentStep> next;
};

// Produces the compressed text for one step at one level.
class ContentExtractor {
 public:
  virtual ~ContentExtractor() = default;
  // `type` unset means default_context_type(level).
  virtual std::string extract(std::string_view content, DetailLevel level,
                              std::optional<ContextType> type) const = 0;
};

class PatternExtractor final : public ContentExtractor {
 public:
  explicit PatternExtractor(const PatternTable& table = PatternTable::builtin())
      : table_(&table) {}
  std::string extract(std::string_view content, DetailLevel level,
                      std::optional<ContextType> type) const override;

 private:
  const PatternTable* table_;
};

struct ModelExtractionOptions {
  std::string model_id;
  double temperature = 0.0;
  int max_tokens = 256;
};

// Asks a completion provider to compress a step. Budgets match the
// pattern-based layer; provider errors fall back to the pattern extractor
// for the same input.
std::string extract_with_model(CompletionProvider& provider,
                               std::string_view content, DetailLevel layer,
                               ContextType type,
                               const ModelExtractionOptions& options = {},
                               const PromptLibrary* prompts = nullptr,
                               const PatternTable& table = PatternTable::builtin());

class ModelExtractor final : public ContentExtractor {
 public:
  explicit ModelExtractor(CompletionProvider& provider,
                          ModelExtractionOptions options = {},
                          const PromptLibrary* prompts = nullptr,
                          const PatternTable& table = PatternTable::builtin())
      : provider_(&provider),
        options_(std::move(options)),
        prompts_(prompts),
        table_(&table) {}
  std::string extract(std::string_view content, DetailLevel level,
                      std::optional<ContextType> type) const override;

 private:
  CompletionProvider* provider_;
  ModelExtractionOptions options_;
  const PromptLibrary* prompts_;
  const PatternTable* table_;
};

// One context per step. Each (step, level) pair is extracted once per call,
// so a model-backed extractor makes at most one call per compressed step
// and level.
std::vector<HierarchicalContext> build_hierarchical_contexts(
    const InteractionTrace& trace,
    std::optional<ContextType> type = std::nullopt,
    const ContentExtractor& extractor = PatternExtractor());

std::vector<FixedWindowContext> extract_fixed_window_contexts(
    const InteractionTrace& trace);

// Deterministic prompt rendering. Empty levels are omitted.
std::string format_hierarchical_context(const HierarchicalContext& ctx);
std::string format_fixed_window_context(const FixedWindowContext& ctx);

}  // namespace faultline

#endif  // FAULTLINE_CONTEXT_HPP_
