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

#include "faultline/baselines.hpp"

#include <cctype>
#include <cmath>
#include <functional>
#include <stdexcept>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "faultline/prompts.hpp"
#include "faultline/text.hpp"
#include "internal.hpp"

namespace faultline {

using nlohmann::json;

namespace {

const PromptLibrary& library(const StrategyOptions& options) {
  return options.prompts ? *options.prompts : PromptLibrary::builtin();
}

PromptLibrary::Vars trace_vars(const InteractionTrace& trace, bool with_gt) {
  return {{"query", trace.query},
          {"ground_truth_section", detail::ground_truth_section(trace, with_gt)},
          {"final_answer", trace.final_answer}};
}

CompletionRequest make_request(std::string system, std::string user,
                               double temperature, const StrategyOptions& options) {
  CompletionRequest req;
  req.system_prompt = std::move(system);
  req.user_prompt = std::move(user);
  req.temperature = temperature;
  req.max_tokens = options.max_tokens;
  req.model_id = options.model_id;
  return req;
}

// Accounts the call on `a` whether or not it succeeds.
std::optional<CompletionResponse> call(CompletionProvider& provider,
                                       const CompletionRequest& req,
                                       Attribution& a) {
  ++a.calls;
  try {
    CompletionResponse resp = provider.complete(req);
    a.usage += resp.usage;
    return resp;
  } catch (const std::exception& e) {
    spdlog::warn("baseline call failed: {}", e.what());
    return std::nullopt;
  }
}

std::optional<json> tagged_or_first_object(std::string_view text) {
  auto parse = [](std::string_view s) -> std::optional<json> {
    json doc = json::parse(s.begin(), s.end(), nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) return std::nullopt;
    return doc;
  };
  if (auto open = text.find("<json>"); open != std::string_view::npos) {
    if (auto close = text.find("</json>", open + 6); close != std::string_view::npos) {
      if (auto doc = parse(text::strip(text.substr(open + 6, close - open - 6)))) return doc;
    }
  }
  const auto open = text.find('{');
  const auto close = text.rfind('}');
  if (open != std::string_view::npos && close != std::string_view::npos && close > open) {
    return parse(text.substr(open, close - open + 1));
  }
  return std::nullopt;
}

std::optional<std::int64_t> step_value(const json& v) {
  if (v.is_number_integer()) return v.get<std::int64_t>();
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (std::isfinite(d) && std::floor(d) == d && std::fabs(d) < 9.0e15) {
      return static_cast<std::int64_t>(d);
    }
    return std::nullopt;
  }
  if (!v.is_string()) return std::nullopt;
  std::string s = text::to_lower(text::strip(v.get_ref<const std::string&>()));
  if (s.starts_with("step")) {
    s.erase(0, 4);
    if (!s.empty() && (s.front() == '_' || s.front() == ' ' || s.front() == '-')) {
      s.erase(0, 1);
    }
  }
  if (s.empty() || s.size() > 18 ||
      !std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; })) {
    return std::nullopt;
  }
  return std::stoll(s);
}

Attribution unknown(std::string reason) {
  Attribution a;
  a.mistake_reason = std::move(reason);
  return a;
}

// Drops a step the trace does not have.
void bound_step(Attribution& a, const InteractionTrace& trace) {
  if (a.mistake_step &&
      (*a.mistake_step < 0 || static_cast<std::uint64_t>(*a.mistake_step) >= trace.size())) {
    a.mistake_step.reset();
  }
}

std::string_view first_word(std::string_view text, std::string& storage) {
  std::size_t i = 0;
  while (i < text.size() && !std::isalpha(static_cast<unsigned char>(text[i]))) ++i;
  std::size_t j = i;
  while (j < text.size() && std::isalpha(static_cast<unsigned char>(text[j]))) ++j;
  storage = text::to_lower(text.substr(i, j - i));
  return storage;
}

}  // namespace

std::string render_steps(const InteractionTrace& trace, std::size_t begin,
                         std::size_t end) {
  std::string out;
  end = std::min(end, trace.size());
  for (std::size_t i = begin; i < end; ++i) {
    const auto& s = trace.steps[i];
    out += "Step " + std::to_string(s.index) + " - " + s.name + " (" + s.role +
           "):\n" + s.content + "\n";
  }
  return out;
}

Attribution parse_attribution_reply(std::string_view text) {
  std::optional<json> doc;
  try {
    doc = tagged_or_first_object(text);
  } catch (const std::exception&) {
    doc.reset();
  }
  if (!doc) return unknown("Error parsing response");
  Attribution a;
  if (auto it = doc->find("mistake_agent"); it != doc->end() && it->is_string()) {
    std::string name(text::strip(it->get_ref<const std::string&>()));
    if (!name.empty()) a.mistake_agent = std::move(name);
  }
  if (auto it = doc->find("mistake_step"); it != doc->end()) a.mistake_step = step_value(*it);
  if (auto it = doc->find("mistake_reason"); it != doc->end() && it->is_string()) {
    a.mistake_reason = it->get<std::string>();
  }
  return a;
}

std::optional<bool> parse_yes_no(std::string_view text) {
  std::string word;
  first_word(text, word);
  if (word == "yes") return true;
  if (word == "no") return false;
  return std::nullopt;
}

std::optional<SearchHalf> parse_half(std::string_view text) {
  std::string word;
  first_word(text, word);
  if (word == "first") return SearchHalf::first;
  if (word == "second") return SearchHalf::second;
  const std::string lower = text::to_lower(text);
  const bool first = lower.find("first") != std::string::npos;
  const bool second = lower.find("second") != std::string::npos;
  if (first != second) return first ? SearchHalf::first : SearchHalf::second;
  return std::nullopt;
}

Attribution all_at_once(CompletionProvider& provider, const InteractionTrace& trace,
                        bool with_ground_truth, const StrategyOptions& options) {
  const auto& lib = library(options);
  auto vars = trace_vars(trace, with_ground_truth);
  vars["conversation"] = render_steps(trace, 0, trace.size());
  Attribution acc;
  auto resp = call(provider,
                   make_request(lib.get("all_at_once.system"),
                                lib.render("all_at_once.user", vars),
                                options.temperature, options),
                   acc);
  Attribution a = resp ? parse_attribution_reply(resp->text)
                       : unknown("Error parsing response");
  a.usage = acc.usage;
  a.calls = acc.calls;
  bound_step(a, trace);
  return a;
}

Attribution step_by_step(CompletionProvider& provider, const InteractionTrace& trace,
                         bool with_ground_truth, const StrategyOptions& options) {
  const auto& lib = library(options);
  Attribution a;
  for (std::size_t i = 0; i < trace.size(); ++i) {
    auto vars = trace_vars(trace, with_ground_truth);
    vars["conversation"] = render_steps(trace, 0, i + 1);
    vars["step"] = std::to_string(trace.steps[i].index);
    vars["agent"] = trace.steps[i].name;
    auto resp = call(provider,
                     make_request(lib.get("step_by_step.system"),
                                  lib.render("step_by_step.user", vars),
                                  options.temperature, options),
                     a);
    if (resp && parse_yes_no(resp->text).value_or(false)) {
      a.mistake_agent = trace.steps[i].name;
      a.mistake_step = static_cast<std::int64_t>(i);
      a.mistake_reason = std::string(text::strip(resp->text));
      return a;
    }
  }
  if (!trace.steps.empty()) {
    a.mistake_agent = trace.steps.back().name;
    a.mistake_step = static_cast<std::int64_t>(trace.size() - 1);
  }
  a.mistake_reason = std::string(kNoErrorDetected);
  return a;
}

Attribution binary_search(CompletionProvider& provider, const InteractionTrace& trace,
                          bool with_ground_truth, const StrategyOptions& options) {
  Attribution a;
  if (trace.steps.empty()) return unknown("empty trace");
  const auto& lib = library(options);
  std::size_t lo = 0;
  std::size_t hi = trace.size();
  while (hi - lo > 1) {
    const std::size_t mid = (lo + hi) / 2;
    auto vars = trace_vars(trace, with_ground_truth);
    vars["first_begin"] = std::to_string(lo);
    vars["first_end"] = std::to_string(mid - 1);
    vars["first_half"] = render_steps(trace, lo, mid);
    vars["second_begin"] = std::to_string(mid);
    vars["second_end"] = std::to_string(hi - 1);
    vars["second_half"] = render_steps(trace, mid, hi);
    auto resp = call(provider,
                     make_request(lib.get("binary_search.system"),
                                  lib.render("binary_search.user", vars),
                                  options.temperature, options),
                     a);
    const auto half = resp ? parse_half(resp->text) : std::nullopt;
    if (half == SearchHalf::second) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  a.mistake_agent = trace.steps[lo].name;
  a.mistake_step = static_cast<std::int64_t>(lo);
  a.mistake_reason = "binary search narrowed the failure to step " + std::to_string(lo);
  return a;
}

std::string step_id_for(std::size_t index) { return "step_" + std::to_string(index); }

std::optional<std::size_t> parse_step_id(std::string_view step_id) {
  if (!step_id.starts_with("step_")) return std::nullopt;
  step_id.remove_prefix(5);
  if (step_id.empty() || step_id.size() > 18 ||
      !std::all_of(step_id.begin(), step_id.end(),
                   [](char c) { return c >= '0' && c <= '9'; })) {
    return std::nullopt;
  }
  return static_cast<std::size_t>(std::stoull(std::string(step_id)));
}

namespace {

StepArgument argue(CompletionProvider& provider, const AgentStep& current,
                   std::string agent_context, std::string_view user_key,
                   const InteractionTrace& trace, bool with_ground_truth,
                   const StrategyOptions& options) {
  const auto& lib = library(options);
  auto vars = trace_vars(trace, with_ground_truth);
  vars["agent_context"] = std::move(agent_context);
  StepArgument arg;
  arg.step_id = step_id_for(current.index);
  arg.agent_name = current.name;
  try {
    CompletionResponse resp = provider.complete(
        make_request(lib.get("step_agent.system"), lib.render(user_key, vars),
                     options.step_agent_temperature, options));
    arg.analysis = std::move(resp.text);
    arg.usage = resp.usage;
  } catch (const std::exception& e) {
    spdlog::warn("step agent for {} failed: {}", arg.step_id, e.what());
    arg.analysis = std::string(kArgumentUnavailable);
    arg.available = false;
  }
  return arg;
}

Attribution run_judged(CompletionProvider& provider, std::size_t n,
                       const std::function<StepArgument(std::size_t)>& argue_one,
                       const InteractionTrace& trace, bool with_ground_truth,
                       const StrategyOptions& options) {
  std::vector<StepArgument> args(n);
  detail::parallel_for(n, options.max_in_flight,
                       [&](std::size_t i) { args[i] = argue_one(i); });
  Attribution a = judge(provider, args, trace, with_ground_truth, options);
  for (const auto& arg : args) a.usage += arg.usage;
  a.calls += n;
  return a;
}

}  // namespace

StepArgument argue_step(CompletionProvider& provider, const FixedWindowContext& ctx,
                        const InteractionTrace& trace, bool with_ground_truth,
                        const StrategyOptions& options) {
  return argue(provider, ctx.current, format_fixed_window_context(ctx),
               "step_agent.user", trace, with_ground_truth, options);
}

StepArgument argue_step(CompletionProvider& provider, const HierarchicalContext& ctx,
                        const InteractionTrace& trace, bool with_ground_truth,
                        const StrategyOptions& options) {
  return argue(provider, ctx.target, format_hierarchical_context(ctx),
               "step_agent_hierarchical.user", trace, with_ground_truth, options);
}

Attribution judge(CompletionProvider& provider, std::span<const StepArgument> arguments,
                  const InteractionTrace& trace, bool with_ground_truth,
                  const StrategyOptions& options) {
  if (arguments.empty()) throw std::invalid_argument("judge needs at least one argument");
  const auto& lib = library(options);
  nlohmann::ordered_json list = nlohmann::ordered_json::array();
  for (const auto& arg : arguments) {
    list.push_back({{"step_id", arg.step_id},
                    {"agent_name", arg.agent_name},
                    {"analysis", arg.analysis}});
  }
  auto vars = trace_vars(trace, with_ground_truth);
  vars["arguments"] = list.dump(2, ' ', true);
  Attribution acc;
  auto resp = call(provider,
                   make_request(lib.get("judge.system"), lib.render("judge.user", vars),
                                options.judge_temperature, options),
                   acc);
  Attribution a = resp ? parse_attribution_reply(resp->text)
                       : unknown("Error parsing response");
  a.usage = acc.usage;
  a.calls = acc.calls;
  bound_step(a, trace);
  return a;
}

Attribution fixed_window_judge(CompletionProvider& provider, const InteractionTrace& trace,
                               bool with_ground_truth, const StrategyOptions& options) {
  const auto contexts = extract_fixed_window_contexts(trace);
  return run_judged(
      provider, contexts.size(),
      [&](std::size_t i) {
        return argue_step(provider, contexts[i], trace, with_ground_truth, options);
      },
      trace, with_ground_truth, options);
}

Attribution hierarchical_judge(CompletionProvider& provider, const InteractionTrace& trace,
                               bool with_ground_truth, const StrategyOptions& options,
                               std::optional<ContextType> type) {
  const auto contexts = build_hierarchical_contexts(trace, type);
  return run_judged(
      provider, contexts.size(),
      [&](std::size_t i) {
        return argue_step(provider, contexts[i], trace, with_ground_truth, options);
      },
      trace, with_ground_truth, options);
}

void to_json(json& j, const Attribution& a) {
  j = json{{"mistake_agent", a.mistake_agent},
           {"mistake_step", a.mistake_step ? json(*a.mistake_step) : json(nullptr)},
           {"mistake_reason", a.mistake_reason},
           {"calls", a.calls},
           {"token_usage",
            {{"input_tokens", a.usage.input_tokens},
             {"output_tokens", a.usage.output_tokens}}}};
}

void to_json(json& j, const StepArgument& a) {
  j = json{{"step_id", a.step_id},
           {"agent_name", a.agent_name},
           {"analysis", a.analysis},
           {"available", a.available},
           {"token_usage",
            {{"input_tokens", a.usage.input_tokens},
             {"output_tokens", a.usage.output_tokens}}}};
}

}  // namespace faultline
