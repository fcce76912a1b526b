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

#include "faultline/analyst.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "faultline/prompts.hpp"
#include "faultline/text.hpp"
#include "internal.hpp"

namespace faultline {

using nlohmann::json;

std::string_view to_string(AnalystRole r) noexcept {
  switch (r) {
    case AnalystRole::conservative:
      return "conservative";
    case AnalystRole::liberal:
      return "liberal";
    case AnalystRole::detail_focused:
      return "detail_focused";
    case AnalystRole::pattern_focused:
      return "pattern_focused";
    case AnalystRole::skeptical:
      return "skeptical";
    case AnalystRole::general:
      return "general";
  }
  return "general";
}

AnalystRole analyst_role_or_general(std::string_view s) noexcept {
  for (auto r : {AnalystRole::conservative, AnalystRole::liberal,
                 AnalystRole::detail_focused, AnalystRole::pattern_focused,
                 AnalystRole::skeptical}) {
    if (s == to_string(r)) return r;
  }
  return AnalystRole::general;
}

namespace {

std::string_view focus_text(AnalystRole r) {
  switch (r) {
    case AnalystRole::conservative:
      return "You are a conservative analyst with high confidence thresholds. "
             "Only attribute errors when you have strong, clear evidence. Prefer "
             "single-agent attributions over multi-agent ones. Be cautious about "
             "making attributions without definitive proof.";
    case AnalystRole::liberal:
      return "You are a liberal analyst more willing to make attributions based "
             "on reasonable evidence. Consider multi-agent scenarios and subtle "
             "errors that might be overlooked. Be open to making attributions "
             "even with moderate confidence.";
    case AnalystRole::detail_focused:
      return "You are detail-oriented and focus on specific evidence, exact "
             "wording, and fine-grained analysis. Look for subtle "
             "inconsistencies, minor logical gaps, and precise factual "
             "inaccuracies. Prioritize concrete evidence over general patterns.";
    case AnalystRole::pattern_focused:
      return "You are focused on recognizing broader patterns and systemic "
             "issues in reasoning chains. Look for recurring themes, logical "
             "flow problems, and how errors propagate through the conversation. "
             "Consider the overall reasoning structure.";
    case AnalystRole::skeptical:
      return "You are highly skeptical and question all assumptions. Look for "
             "alternative explanations, consider whether apparent errors might "
             "be valid reasoning, and examine if the ground truth itself could "
             "be questioned. Challenge conventional attributions.";
    case AnalystRole::general:
      break;
  }
  return "You are a balanced general analyst with no specific specialization. "
         "Approach the analysis with broad perspective, considering all types "
         "of evidence equally. Look for the most obvious and impactful mistakes "
         "based on objective evaluation.";
}

constexpr AnalystRole kAllRoles[] = {
    AnalystRole::conservative,    AnalystRole::liberal,
    AnalystRole::detail_focused,  AnalystRole::pattern_focused,
    AnalystRole::skeptical,       AnalystRole::general,
};

// Unbiased draw in [0, range) by rejection. Defined here rather than via
// std::uniform_int_distribution so panels are identical across standard
// library implementations.
std::uint64_t bounded(std::mt19937_64& gen, std::uint64_t range) {
  const std::uint64_t limit =
      std::numeric_limits<std::uint64_t>::max() -
      std::numeric_limits<std::uint64_t>::max() % range;
  std::uint64_t x;
  do {
    x = gen();
  } while (x >= limit);
  return x % range;
}

}  // namespace

std::vector<AnalystProfile> builtin_profiles() {
  std::vector<AnalystProfile> out;
  for (auto r : kAllRoles) out.push_back({r, std::string(focus_text(r)), 0.7});
  return out;
}

AnalystProfile profile_for(std::string_view role_name) {
  const AnalystRole r = analyst_role_or_general(role_name);
  return {r, std::string(focus_text(r)), 0.7};
}

std::vector<AnalystProfile> sample_panel(std::span<const AnalystProfile> pool,
                                         std::size_t k, std::uint64_t seed) {
  if (k < 1 || k > pool.size()) {
    throw std::invalid_argument("panel size must be within [1, " +
                                std::to_string(pool.size()) + "]");
  }
  std::vector<std::size_t> order(pool.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::mt19937_64 gen(seed);
  std::vector<AnalystProfile> panel;
  panel.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + bounded(gen, order.size() - i);
    std::swap(order[i], order[j]);
    AnalystProfile p = pool[order[i]];
    p.temperature =
        k == 1 ? (kMinAnalystTemperature + kMaxAnalystTemperature) / 2
               : kMinAnalystTemperature +
                     (kMaxAnalystTemperature - kMinAnalystTemperature) *
                         static_cast<double>(i) / static_cast<double>(k - 1);
    p.temperature = std::clamp(p.temperature, kMinAnalystTemperature, kMaxAnalystTemperature);
    panel.push_back(std::move(p));
  }
  return panel;
}

std::string_view to_string(ConclusionKind k) noexcept {
  return k == ConclusionKind::multi_agent ? "multi_agent" : "single_agent";
}

AnalysisResult fallback_analysis(std::string raw_response) {
  AnalysisResult r;
  r.analysis_summary = std::string(kParseFailureSummary);
  r.primary_conclusion.kind = ConclusionKind::single_agent;
  r.primary_conclusion.confidence = 0.0;
  r.primary_conclusion.reasoning = std::string(kParseFailureReasoning);
  r.raw_response = std::move(raw_response);
  r.parsed = false;
  return r;
}

std::string_view to_string(AnalysisPhase p) noexcept {
  switch (p) {
    case AnalysisPhase::unified:
      return "unified";
    case AnalysisPhase::agent:
      return "agent";
    case AnalysisPhase::step:
      return "step";
  }
  return "unified";
}

AnalysisPhase parse_analysis_phase(std::string_view s) {
  if (s == "unified") return AnalysisPhase::unified;
  if (s == "agent") return AnalysisPhase::agent;
  if (s == "step") return AnalysisPhase::step;
  throw std::invalid_argument("unknown analysis phase '" + std::string(s) + "'");
}

std::string compose_summary(const InteractionTrace& trace,
                            std::span<const HierarchicalContext> contexts) {
  std::vector<std::string> lines;
  lines.emplace_back("=== CONVERSATION AGENTS ===");
  for (const auto& s : trace.steps) {
    lines.push_back("Step " + std::to_string(s.index) + " - " + s.name + " (" +
                    s.role + "):");
    lines.push_back(s.content);
    lines.emplace_back();
  }
  lines.emplace_back("=== HIERARCHICAL CONTEXT EXAMPLE ===");
  if (!contexts.empty()) {
    const std::string sample = format_hierarchical_context(contexts.front());
    lines.emplace_back(
        "Context structure for Agent 1 (showing hierarchical detail levels):");
    if (text::utf8_length(sample) > 1000) {
      lines.push_back(std::string(text::utf8_prefix(sample, 1000)) + "...");
    } else {
      lines.push_back(sample);
    }
  }
  std::string out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (i) out.push_back('\n');
    out += lines[i];
  }
  return out;
}

PromptPair compose_analysis_prompt(std::string_view summary,
                                   const InteractionTrace& trace,
                                   const AnalystProfile& profile,
                                   AnalysisPhase phase, bool with_ground_truth,
                                   std::span<const std::string> prior_attribution,
                                   const PromptLibrary* prompts) {
  const PromptLibrary& lib = prompts ? *prompts : PromptLibrary::builtin();
  PromptPair out;
  out.system_prompt = lib.render("objective_analyst.system",
                                 {{"focus_instructions", profile.focus_instructions}});

  std::string phase_text;
  if (phase == AnalysisPhase::agent) {
    phase_text = lib.get("phase_agent");
  } else if (phase == AnalysisPhase::step) {
    std::string agents;
    for (const auto& a : prior_attribution) {
      if (!agents.empty()) agents += ", ";
      agents += a;
    }
    phase_text = lib.render("phase_step",
                            {{"attributed_agents", agents.empty() ? "(none)" : agents}});
  }
  const std::string gt_section =
      detail::ground_truth_section(trace, with_ground_truth);
  out.user_prompt = lib.render("objective_analyst.user",
                               {{"query", trace.query},
                                {"ground_truth_section", gt_section},
                                {"final_answer", trace.final_answer},
                                {"summary", std::string(summary)},
                                {"phase_instructions", phase_text}});
  return out;
}

// --- verdict parsing ---------------------------------------------------------

namespace {

// End (one past the closing brace) of the balanced object opening at
// `open`, honouring string literals and escapes.
std::optional<std::size_t> balanced_end(std::string_view s, std::size_t open) {
  int depth = 0;
  bool in_string = false;
  bool escaped = false;
  for (std::size_t i = open; i < s.size(); ++i) {
    const char c = s[i];
    if (in_string) {
      if (escaped) {
        escaped = false;
      } else if (c == '\\') {
        escaped = true;
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (c == '"') {
      in_string = true;
    } else if (c == '{') {
      ++depth;
    } else if (c == '}') {
      if (--depth == 0) return i + 1;
    }
  }
  return std::nullopt;
}

std::optional<json> parse_object(std::string_view s) {
  json doc = json::parse(s.begin(), s.end(), nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) return std::nullopt;
  return doc;
}

std::optional<json> locate_json(std::string_view text) {
  if (auto open = text.find("<json>"); open != std::string_view::npos) {
    const std::size_t start = open + 6;
    if (auto close = text.find("</json>", start); close != std::string_view::npos) {
      if (auto doc = parse_object(text::strip(text.substr(start, close - start)))) {
        return doc;
      }
    }
  }
  for (std::size_t pos = text.find('{'); pos != std::string_view::npos;
       pos = text.find('{', pos + 1)) {
    auto end = balanced_end(text, pos);
    if (!end) break;  // no later brace can close either
    if (auto doc = parse_object(text.substr(pos, *end - pos))) return doc;
  }
  return std::nullopt;
}

double unit_interval(const json& v) {
  double x = 0.0;
  if (v.is_number()) {
    x = v.get<double>();
  } else if (v.is_string()) {
    const std::string s(text::strip(v.get_ref<const std::string&>()));
    try {
      std::size_t used = 0;
      x = std::stod(s, &used);
      if (used != s.size()) x = 0.0;
    } catch (const std::exception&) {
      x = 0.0;
    }
  }
  if (std::isnan(x)) return 0.0;
  return std::clamp(x, 0.0, 1.0);
}

std::optional<std::int64_t> lenient_step(const json& v) {
  if (v.is_number_integer()) return v.get<std::int64_t>();
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (std::isfinite(d) && std::floor(d) == d && std::fabs(d) < 9.0e15) {
      return static_cast<std::int64_t>(d);
    }
    return std::nullopt;
  }
  if (v.is_string()) {
    std::string_view s = text::strip(v.get_ref<const std::string&>());
    if (s.empty() || s.size() > 18) return std::nullopt;
    if (!std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; })) {
      return std::nullopt;
    }
    return std::stoll(std::string(s));
  }
  return std::nullopt;
}

std::string string_or_empty(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_string()) return {};
  return it->get<std::string>();
}

Conclusion parse_conclusion(const json& obj, std::size_t analyst_id) {
  Conclusion c;
  c.kind = string_or_empty(obj, "type") == "multi_agent" ? ConclusionKind::multi_agent
                                                         : ConclusionKind::single_agent;
  if (auto it = obj.find("attribution"); it != obj.end()) {
    auto take = [&](const json& v) {
      if (!v.is_string()) return;
      std::string name(text::strip(v.get_ref<const std::string&>()));
      if (!name.empty()) c.attribution.push_back(std::move(name));
    };
    if (it->is_array()) {
      for (const auto& v : *it) take(v);
    } else {
      take(*it);
    }
  }
  if (c.kind == ConclusionKind::single_agent && c.attribution.size() > 1) {
    c.attribution.resize(1);
  }
  if (auto it = obj.find("mistake_step"); it != obj.end()) c.mistake_step = lenient_step(*it);
  if (auto it = obj.find("confidence"); it != obj.end()) c.confidence = unit_interval(*it);
  c.reasoning = string_or_empty(obj, "reasoning");
  c.analyst_id = analyst_id;
  return c;
}

}  // namespace

AnalysisResult parse_analysis_output(std::string_view text) {
  std::optional<json> doc;
  try {
    doc = locate_json(text);
  } catch (const std::exception&) {
    doc.reset();
  }
  if (!doc) return fallback_analysis(std::string(text));
  auto primary = doc->find("primary_conclusion");
  if (primary == doc->end() || !primary->is_object()) {
    return fallback_analysis(std::string(text));
  }
  AnalysisResult r;
  try {
    r.analysis_summary = string_or_empty(*doc, "analysis_summary");
    r.primary_conclusion = parse_conclusion(*primary, 0);
    if (auto it = doc->find("agent_evaluations"); it != doc->end() && it->is_array()) {
      for (const auto& e : *it) {
        if (!e.is_object()) continue;
        AgentEvaluation ev;
        ev.agent_name = string_or_empty(e, "agent_name");
        if (auto s = e.find("step_index"); s != e.end()) ev.step_index = lenient_step(*s);
        if (auto l = e.find("error_likelihood"); l != e.end()) {
          ev.error_likelihood = unit_interval(*l);
        }
        ev.reasoning = string_or_empty(e, "reasoning");
        ev.evidence = string_or_empty(e, "evidence");
        r.agent_evaluations.push_back(std::move(ev));
      }
    }
    if (auto it = doc->find("alternative_hypotheses"); it != doc->end() && it->is_array()) {
      for (const auto& h : *it) {
        if (h.is_object()) r.alternative_hypotheses.push_back(parse_conclusion(h, 0));
      }
    }
  } catch (const std::exception&) {
    return fallback_analysis(std::string(text));
  }
  r.raw_response = std::string(text);
  r.parsed = true;
  return r;
}

namespace {

void stamp_analyst(AnalysisResult& r, std::size_t id) {
  r.analyst_id = id;
  r.primary_conclusion.analyst_id = id;
  for (auto& h : r.alternative_hypotheses) h.analyst_id = id;
}

}  // namespace

PhaseAnalyses run_panel(CompletionProvider& provider,
                        const InteractionTrace& trace,
                        std::span<const HierarchicalContext> contexts,
                        std::span<const AnalystProfile> panel,
                        AnalysisPhase phase, bool with_ground_truth,
                        const PanelOptions& options) {
  const std::string summary = compose_summary(trace, contexts);
  PhaseAnalyses out;
  out.phase = phase;
  out.results.resize(panel.size());

  auto run_one = [&](std::size_t i) {
    const auto prompt = compose_analysis_prompt(summary, trace, panel[i], phase,
                                                with_ground_truth,
                                                options.prior_attribution,
                                                options.prompts);
    CompletionRequest req;
    req.system_prompt = prompt.system_prompt;
    req.user_prompt = prompt.user_prompt;
    req.temperature = panel[i].temperature;
    req.top_p = options.top_p;
    req.max_tokens = options.max_tokens;
    req.model_id = options.model_id;
    AnalysisResult r;
    try {
      CompletionResponse resp = provider.complete(req);
      r = parse_analysis_output(resp.text);
      r.usage = resp.usage;
    } catch (const std::exception& e) {
      r = fallback_analysis("");
      r.provider_error = e.what();
    }
    stamp_analyst(r, i);
    out.results[i] = std::move(r);
  };

  detail::parallel_for(panel.size(), options.max_in_flight, run_one);
  return out;
}

// --- serialization -----------------------------------------------------------

namespace {

json optional_int(const std::optional<std::int64_t>& v) {
  return v ? json(*v) : json(nullptr);
}

}  // namespace

void to_json(json& j, const AgentEvaluation& e) {
  j = json{{"agent_name", e.agent_name},
           {"step_index", optional_int(e.step_index)},
           {"error_likelihood", e.error_likelihood},
           {"reasoning", e.reasoning},
           {"evidence", e.evidence}};
}

void to_json(json& j, const Conclusion& c) {
  j = json{{"type", to_string(c.kind)},
           {"attribution", c.attribution},
           {"mistake_step", optional_int(c.mistake_step)},
           {"confidence", c.confidence},
           {"reasoning", c.reasoning}};
  if (c.analyst_id) j["analyst_id"] = *c.analyst_id;
}

void to_json(json& j, const AnalysisResult& r) {
  j = json{{"analyst_id", r.analyst_id},
           {"analysis_summary", r.analysis_summary},
           {"agent_evaluations", r.agent_evaluations},
           {"primary_conclusion", r.primary_conclusion},
           {"alternative_hypotheses", r.alternative_hypotheses},
           {"parsed", r.parsed},
           {"raw_response", r.raw_response},
           {"token_usage",
            {{"input_tokens", r.usage.input_tokens},
             {"output_tokens", r.usage.output_tokens}}}};
  if (!r.provider_error.empty()) j["provider_error"] = r.provider_error;
}

void to_json(json& j, const AnalystProfile& p) {
  j = json{{"role", to_string(p.role)},
           {"temperature", p.temperature},
           {"focus_instructions", p.focus_instructions}};
}

}  // namespace faultline
