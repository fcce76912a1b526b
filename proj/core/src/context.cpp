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

#include "faultline/context.hpp"

#include <array>
#include <stdexcept>

#include <spdlog/spdlog.h>

#include "faultline/gateway.hpp"
#include "faultline/prompts.hpp"
#include "faultline/text.hpp"

namespace faultline {

std::string_view to_string(DetailLevel d) noexcept {
  switch (d) {
    case DetailLevel::full:
      return "full";
    case DetailLevel::key_decisions:
      return "key_decisions";
    case DetailLevel::summary:
      return "summary";
    case DetailLevel::milestones:
      return "milestones";
  }
  return "full";
}

DetailLevel detail_level_for_distance(std::size_t distance) noexcept {
  if (distance <= 1) return DetailLevel::full;
  if (distance <= 3) return DetailLevel::key_decisions;
  if (distance <= 6) return DetailLevel::summary;
  return DetailLevel::milestones;
}

std::size_t word_budget(DetailLevel d) noexcept {
  switch (d) {
    case DetailLevel::full:
      return 0;
    case DetailLevel::key_decisions:
      return 50;
    case DetailLevel::summary:
      return 20;
    case DetailLevel::milestones:
      return 15;
  }
  return 0;
}

ContextType default_context_type(DetailLevel d) noexcept {
  return d == DetailLevel::key_decisions ? ContextType::decision_quality
                                         : ContextType::general;
}

namespace {

void require_budget(std::size_t max_words) {
  if (max_words == 0) throw std::invalid_argument("max_words must be positive");
}

// Shared tail of the summary and milestone extractors, which run on
// whitespace-collapsed content and do not append a period.
std::string compressed_extract(std::string_view content, std::size_t max_words,
                               ContextType type, ExtractionLayer layer,
                               std::string_view blank_literal,
                               const PatternTable& table) {
  require_budget(max_words);
  if (text::is_blank(content)) return std::string(blank_literal);
  const std::string cleaned = text::collapse_whitespace(content);
  if (auto hit = table.first_capture(cleaned, type, layer)) {
    return text::truncate_words(*hit, max_words);
  }
  std::string_view first = text::strip(text::split_on(cleaned, ". ").front());
  if (first.empty()) return text::truncate_words(cleaned, max_words);
  return text::truncate_words(first, max_words);
}

}  // namespace

std::string extract_key_decision(std::string_view content, std::size_t max_words,
                                 ContextType type, const PatternTable& table) {
  require_budget(max_words);
  if (text::is_blank(content)) return std::string(kNoContent);
  if (auto hit = table.first_capture(content, type, ExtractionLayer::key_decision)) {
    return text::truncate_words(*hit, max_words);
  }
  std::string first(text::strip(text::split_on(content, ". ").front()));
  if (!first.ends_with('.')) first.push_back('.');
  return text::truncate_words(first, max_words);
}

std::string summarize_agent(std::string_view content, std::size_t max_words,
                            ContextType type, const PatternTable& table) {
  return compressed_extract(content, max_words, type, ExtractionLayer::summary,
                            kNoContent, table);
}

std::string obtain_milestones(std::string_view content, std::size_t max_words,
                              ContextType type, const PatternTable& table) {
  return compressed_extract(content, max_words, type, ExtractionLayer::milestone,
                            kNoMilestones, table);
}

const std::vector<ContextEntry>& HierarchicalContext::level(
    DetailLevel d) const noexcept {
  switch (d) {
    case DetailLevel::full:
      return immediate;
    case DetailLevel::key_decisions:
      return nearby;
    case DetailLevel::summary:
      return distant;
    case DetailLevel::milestones:
      return milestones;
  }
  return immediate;
}

std::vector<ContextEntry>& HierarchicalContext::level(DetailLevel d) noexcept {
  return const_cast<std::vector<ContextEntry>&>(
      static_cast<const HierarchicalContext&>(*this).level(d));
}

namespace {

std::string pattern_extract(std::string_view content, DetailLevel level,
                            ContextType type, const PatternTable& table) {
  switch (level) {
    case DetailLevel::full:
      return text::is_blank(content) ? std::string(kNoContent)
                                     : std::string(content);
    case DetailLevel::key_decisions:
      return extract_key_decision(content, word_budget(level), type, table);
    case DetailLevel::summary:
      return summarize_agent(content, word_budget(level), type, table);
    case DetailLevel::milestones:
      return obtain_milestones(content, word_budget(level), type, table);
  }
  return std::string(content);
}

std::string_view layer_focus(DetailLevel level) {
  switch (level) {
    case DetailLevel::key_decisions:
      return "the key decision or main point (conclusions and logical transitions)";
    case DetailLevel::summary:
      return "a brief outcome summary (state changes, error conditions, handoffs)";
    case DetailLevel::milestones:
      return "only milestones (major state transitions, persistent errors, "
             "cross-agent dependencies)";
    case DetailLevel::full:
      break;
  }
  return "everything";
}

std::string_view context_focus(ContextType type) {
  switch (type) {
    case ContextType::handoff:
      return "information received from or passed to other agents";
    case ContextType::decision_quality:
      return "decisions and conclusions";
    case ContextType::error_propagation:
      return "errors, failures and their causes";
    case ContextType::general:
      break;
  }
  return "the most important point";
}

}  // namespace

std::string PatternExtractor::extract(std::string_view content,
                                      DetailLevel level,
                                      std::optional<ContextType> type) const {
  return pattern_extract(content, level, type.value_or(default_context_type(level)),
                         *table_);
}

std::string extract_with_model(CompletionProvider& provider,
                               std::string_view content, DetailLevel layer,
                               ContextType type,
                               const ModelExtractionOptions& options,
                               const PromptLibrary* prompts,
                               const PatternTable& table) {
  if (layer == DetailLevel::full || text::is_blank(content)) {
    return pattern_extract(content, layer, type, table);
  }
  const PromptLibrary& lib = prompts ? *prompts : PromptLibrary::builtin();
  const std::size_t budget = word_budget(layer);
  CompletionRequest req;
  req.system_prompt = lib.get("context_extraction.system");
  req.user_prompt = lib.render(
      "context_extraction.user",
      {{"max_words", std::to_string(budget)},
       {"layer_focus", std::string(layer_focus(layer))},
       {"context_focus", std::string(context_focus(type))},
       {"content", std::string(content)}});
  req.temperature = options.temperature;
  req.max_tokens = options.max_tokens;
  req.model_id = options.model_id;
  try {
    CompletionResponse resp = provider.complete(req);
    std::string out = text::truncate_words(resp.text, budget);
    if (!out.empty()) return out;
    spdlog::warn("model extraction returned empty text; using patterns");
  } catch (const std::exception& e) {
    spdlog::warn("model extraction failed ({}); using patterns", e.what());
  }
  return pattern_extract(content, layer, type, table);
}

std::string ModelExtractor::extract(std::string_view content, DetailLevel level,
                                    std::optional<ContextType> type) const {
  return extract_with_model(*provider_, content, level,
                            type.value_or(default_context_type(level)), options_,
                            prompts_, *table_);
}

std::vector<HierarchicalContext> build_hierarchical_contexts(
    const InteractionTrace& trace, std::optional<ContextType> type,
    const ContentExtractor& extractor) {
  const auto& steps = trace.steps;
  const std::size_t n = steps.size();
  std::vector<std::array<std::optional<std::string>, 4>> memo(n);
  auto compressed = [&](std::size_t j, DetailLevel level) -> const std::string& {
    auto& cell = memo[j][static_cast<std::size_t>(level)];
    if (!cell) cell = extractor.extract(steps[j].content, level, type);
    return *cell;
  };

  std::vector<HierarchicalContext> contexts;
  contexts.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    HierarchicalContext ctx;
    ctx.target = steps[i];
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const std::size_t distance = i > j ? i - j : j - i;
      const DetailLevel level = detail_level_for_distance(distance);
      ctx.level(level).push_back(ContextEntry{
          .index = j,
          .name = steps[j].name,
          .role = steps[j].role,
          .distance = distance,
          .detail_level = level,
          .content = compressed(j, level),
      });
    }
    contexts.push_back(std::move(ctx));
  }
  return contexts;
}

std::vector<FixedWindowContext> extract_fixed_window_contexts(
    const InteractionTrace& trace) {
  const auto& steps = trace.steps;
  std::vector<FixedWindowContext> out;
  out.reserve(steps.size());
  for (std::size_t i = 0; i < steps.size(); ++i) {
    FixedWindowContext ctx;
    if (i > 0) ctx.prev = steps[i - 1];
    ctx.current = steps[i];
    if (i + 1 < steps.size()) ctx.next = steps[i + 1];
    out.push_back(std::move(ctx));
  }
  return out;
}

namespace {

std::string step_header(std::size_t index, std::string_view name,
                        std::string_view role) {
  return "Step " + std::to_string(index) + " - " + std::string(name) + " (" +
         std::string(role) + ")";
}

std::string_view level_label(DetailLevel d) {
  switch (d) {
    case DetailLevel::full:
      return "Immediate context (full detail)";
    case DetailLevel::key_decisions:
      return "Nearby context (key decisions)";
    case DetailLevel::summary:
      return "Distant context (brief summaries)";
    case DetailLevel::milestones:
      return "Global context (milestones)";
  }
  return "";
}

}  // namespace

std::string format_hierarchical_context(const HierarchicalContext& ctx) {
  std::string out = "Target: " +
                    step_header(ctx.target.index, ctx.target.name, ctx.target.role) +
                    ":\n";
  out += text::is_blank(ctx.target.content) ? std::string(kNoContent)
                                            : ctx.target.content;
  out += "\n";
  for (auto d : {DetailLevel::full, DetailLevel::key_decisions,
                 DetailLevel::summary, DetailLevel::milestones}) {
    const auto& entries = ctx.level(d);
    if (entries.empty()) continue;
    out += "\n[" + std::string(level_label(d)) + "]\n";
    for (const auto& e : entries) {
      out += step_header(e.index, e.name, e.role) + " [distance " +
             std::to_string(e.distance) + "]: " + e.content + "\n";
    }
  }
  return out;
}

std::string format_fixed_window_context(const FixedWindowContext& ctx) {
  auto block = [](std::string_view label, const std::optional<AgentStep>& s) {
    std::string out(label);
    if (!s) return out + ": none\n";
    out += ": " + step_header(s->index, s->name, s->role) + ":\n" + s->content + "\n";
    return out;
  };
  return block("Previous agent", ctx.prev) + "\n" +
         block("Current agent", ctx.current) + "\n" +
         block("Next agent", ctx.next);
}

}  // namespace faultline
