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

#include "faultline/pipeline.hpp"

#include <algorithm>
#include <memory>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "faultline/text.hpp"

namespace faultline {

using nlohmann::json;

std::string_view to_string(PhaseMode m) noexcept {
  return m == PhaseMode::unified ? "unified" : "decoupled";
}

PhaseMode parse_phase_mode(std::string_view s) {
  if (s == "unified") return PhaseMode::unified;
  if (s == "decoupled") return PhaseMode::decoupled;
  throw std::invalid_argument("unknown phase mode '" + std::string(s) + "'");
}

std::string_view to_string(ExtractionMode m) noexcept {
  return m == ExtractionMode::model ? "model" : "pattern";
}

ExtractionMode parse_extraction_mode(std::string_view s) {
  if (s == "pattern") return ExtractionMode::pattern;
  if (s == "model") return ExtractionMode::model;
  throw std::invalid_argument("unknown extraction mode '" + std::string(s) + "'");
}

void PipelineConfig::validate() const {
  const std::size_t roles = builtin_profiles().size();
  if (panel_size < 1 || panel_size > roles) {
    throw std::invalid_argument("panel_size must be within [1, " + std::to_string(roles) +
                                "]");
  }
  if (!(threshold >= 0.0 && threshold <= 1.0)) {
    throw std::invalid_argument("threshold must be within [0, 1]");
  }
  if (max_in_flight < 1) throw std::invalid_argument("max_in_flight must be at least 1");
}

void to_json(json& j, const PipelineConfig& c) {
  j = json{{"panel_size", c.panel_size},
           {"threshold", c.threshold},
           {"phase", to_string(c.phase)},
           {"context_type", c.context_type ? json(to_string(*c.context_type)) : json(nullptr)},
           {"with_ground_truth", c.with_ground_truth},
           {"seed", c.seed},
           {"extraction", to_string(c.extraction)},
           {"resample_step_panel", c.resample_step_panel},
           {"max_in_flight", c.max_in_flight},
           {"model_id", c.model_id}};
}

void from_json(const json& j, PipelineConfig& c) {
  if (!j.is_object()) throw std::invalid_argument("pipeline config must be an object");
  for (const auto& [key, v] : j.items()) {
    if (key == "panel_size") {
      c.panel_size = v.get<std::size_t>();
    } else if (key == "threshold") {
      c.threshold = v.get<double>();
    } else if (key == "phase") {
      c.phase = parse_phase_mode(v.get<std::string>());
    } else if (key == "context_type") {
      if (v.is_null()) {
        c.context_type.reset();
      } else {
        c.context_type = parse_context_type(v.get<std::string>());
      }
    } else if (key == "with_ground_truth") {
      c.with_ground_truth = v.get<bool>();
    } else if (key == "seed") {
      c.seed = v.get<std::uint64_t>();
    } else if (key == "extraction") {
      c.extraction = parse_extraction_mode(v.get<std::string>());
    } else if (key == "resample_step_panel") {
      c.resample_step_panel = v.get<bool>();
    } else if (key == "max_in_flight") {
      c.max_in_flight = v.get<std::size_t>();
    } else if (key == "model_id") {
      c.model_id = v.get<std::string>();
    } else {
      throw std::invalid_argument("unknown pipeline config key '" + key + "'");
    }
  }
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Borrowed view of a caller-owned provider for the shared_ptr-based wrappers.
std::shared_ptr<CompletionProvider> borrow(CompletionProvider& p) {
  return std::shared_ptr<CompletionProvider>(&p, [](CompletionProvider*) {});
}

}  // namespace

std::uint64_t case_seed(std::uint64_t seed, std::string_view case_key) {
  return splitmix64(seed ^ splitmix64(text::fnv1a64(case_key)));
}

Attribution project_attribution(const ConsensusResult& agent_consensus,
                                const ConsensusResult& step_consensus) {
  Attribution a;
  if (!agent_consensus.conclusion.attribution.empty()) {
    a.mistake_agent = agent_consensus.conclusion.attribution.front();
  }
  a.mistake_step = step_consensus.conclusion.mistake_step;
  a.mistake_reason = agent_consensus.conclusion.reasoning;
  if (!a.mistake_step) {
    a.mistake_reason = a.mistake_reason.empty()
                           ? std::string(kStepIndeterminate)
                           : a.mistake_reason + " (" + std::string(kStepIndeterminate) + ")";
  }
  return a;
}

EchoOutcome run_echo(CompletionProvider& provider, const InteractionTrace& trace,
                     const PipelineConfig& config, std::string_view case_key,
                     const PromptLibrary* prompts) {
  config.validate();
  MeteredProvider metered(borrow(provider));

  std::unique_ptr<ContentExtractor> extractor;
  if (config.extraction == ExtractionMode::model) {
    ModelExtractionOptions mo;
    mo.model_id = config.model_id;
    extractor = std::make_unique<ModelExtractor>(metered, mo, prompts);
  } else {
    extractor = std::make_unique<PatternExtractor>();
  }
  const auto contexts = build_hierarchical_contexts(trace, config.context_type, *extractor);

  const auto pool = builtin_profiles();
  const std::uint64_t seed = case_seed(config.seed, case_key);
  EchoOutcome out;
  out.panel = sample_panel(pool, config.panel_size, seed);

  PanelOptions opts;
  opts.model_id = config.model_id;
  opts.max_in_flight = config.max_in_flight;
  opts.prompts = prompts;
  const ConsensusConfig cc{config.threshold};

  if (config.phase == PhaseMode::unified) {
    out.analyses.push_back(run_panel(metered, trace, contexts, out.panel,
                                     AnalysisPhase::unified, config.with_ground_truth, opts));
    out.consensus = aggregate(out.analyses.back().results, cc, trace);
    out.attribution = project_attribution(out.consensus, out.consensus);
  } else {
    out.analyses.push_back(run_panel(metered, trace, contexts, out.panel,
                                     AnalysisPhase::agent, config.with_ground_truth, opts));
    ConsensusResult agent = aggregate(out.analyses.back().results, cc, trace);

    out.step_panel = config.resample_step_panel
                         ? sample_panel(pool, config.panel_size, splitmix64(seed))
                         : out.panel;
    opts.prior_attribution = agent.conclusion.attribution;
    out.analyses.push_back(run_panel(metered, trace, contexts, out.step_panel,
                                     AnalysisPhase::step, config.with_ground_truth, opts));
    ConsensusResult step = aggregate(out.analyses.back().results, cc, trace);

    out.attribution = project_attribution(agent, step);
    out.consensus = agent;
    out.consensus.conclusion.mistake_step = step.conclusion.mistake_step;
    out.consensus.voting.step_votes = step.voting.step_votes;
    out.agent_phase = std::move(agent);
    out.step_phase = std::move(step);
  }

  const auto snap = metered.snapshot();
  out.usage = snap.usage;
  out.calls = snap.calls;
  out.failed_calls = snap.failures;
  out.request_digests = snap.request_digests;
  std::sort(out.request_digests.begin(), out.request_digests.end());
  out.missing_digests = snap.missing_digests;
  std::sort(out.missing_digests.begin(), out.missing_digests.end());
  out.attribution.usage = out.usage;
  out.attribution.calls = out.calls;
  return out;
}

json run_manifest(const PipelineConfig& config, const EchoOutcome& outcome) {
  json m = {{"config", config},
            {"panel", outcome.panel},
            {"request_digests", outcome.request_digests}};
  if (!outcome.step_panel.empty()) m["step_panel"] = outcome.step_panel;
  return m;
}

PipelineConfig config_from_manifest(const json& manifest) {
  PipelineConfig c;
  from_json(manifest.at("config"), c);
  c.validate();
  return c;
}

void to_json(json& j, const EchoOutcome& o) {
  json analyses = json::array();
  for (const auto& phase : o.analyses) {
    analyses.push_back({{"phase", to_string(phase.phase)}, {"results", phase.results}});
  }
  j = json{{"attribution", o.attribution},
           {"consensus", o.consensus},
           {"panel", o.panel},
           {"analyses", std::move(analyses)},
           {"calls", o.calls},
           {"failed_calls", o.failed_calls},
           {"token_usage",
            {{"input_tokens", o.usage.input_tokens}, {"output_tokens", o.usage.output_tokens}}},
           {"request_digests", o.request_digests}};
  if (!o.step_panel.empty()) j["step_panel"] = o.step_panel;
  if (o.agent_phase) j["agent_phase"] = *o.agent_phase;
  if (o.step_phase) j["step_phase"] = *o.step_phase;
  if (!o.missing_digests.empty()) j["missing_digests"] = o.missing_digests;
}

}  // namespace faultline
