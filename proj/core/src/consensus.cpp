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

#include "faultline/consensus.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "faultline/text.hpp"

namespace faultline {

using nlohmann::json;

void ConsensusConfig::validate() const {
  if (!(min_confidence_threshold >= 0.0 && min_confidence_threshold <= 1.0)) {
    throw std::invalid_argument("min_confidence_threshold must be within [0, 1]");
  }
}

bool ConsensusResult::is_empty() const noexcept {
  return voting.conclusion_votes.empty();
}

ConsensusResult empty_consensus(std::size_t num_analysts) {
  ConsensusResult r;
  r.conclusion.kind = ConclusionKind::single_agent;
  r.conclusion.confidence = 0.0;
  r.conclusion.reasoning = std::string(kNoAnalysesReasoning);
  r.voting.disagreement.requires_review = true;
  r.num_analysts = num_analysts;
  return r;
}

VotesByKind filter_votes(std::span<const AnalysisResult> analyses,
                         const ConsensusConfig& config) {
  VotesByKind out;
  for (std::size_t i = 0; i < analyses.size(); ++i) {
    const Conclusion& c = analyses[i].primary_conclusion;
    if (!(c.confidence >= config.min_confidence_threshold)) continue;
    out[c.kind].push_back(Vote{
        .confidence = c.confidence,
        .attribution = c.attribution,
        .mistake_step = c.mistake_step,
        .reasoning = c.reasoning,
        .analyst_id = i,
    });
  }
  return out;
}

namespace {

double total_confidence(std::span<const Vote> votes) {
  double total = 0.0;
  for (const auto& v : votes) total += v.confidence;
  return total;
}

// Key with the largest score; earlier keys win ties within kScoreTolerance.
template <typename Map>
std::optional<typename Map::key_type> argmax(const Map& scores) {
  std::optional<typename Map::key_type> best;
  double best_score = 0.0;
  for (const auto& [key, score] : scores) {
    if (!best || score > best_score + kScoreTolerance) {
      best = key;
      best_score = score;
    }
  }
  return best;
}

std::string synthesize_reasoning(std::span<const Vote> votes, double mean) {
  std::vector<const std::string*> reasonings;
  for (const auto& v : votes) {
    if (!v.reasoning.empty()) reasonings.push_back(&v.reasoning);
  }
  if (reasonings.empty()) {
    return fmt::format("Consensus reached by {} analysts with average confidence {:.2f}.",
                       votes.size(), mean);
  }
  std::string out = fmt::format(
      "Consensus reached by {} analysts (avg confidence: {:.2f}). Primary reasoning: {}...",
      votes.size(), mean, text::utf8_prefix(*reasonings.front(), 200));
  if (reasonings.size() > 1) {
    out += fmt::format(" Additional supporting analysis from {} other analysts.",
                       reasonings.size() - 1);
  }
  return out;
}

}  // namespace

StepVote vote_step(std::span<const Vote> votes, std::size_t n) {
  StepVote out;
  for (const auto& v : votes) {
    if (v.mistake_step) out.step_votes[*v.mistake_step] += v.confidence;
  }
  std::map<std::int64_t, double> valid;
  for (const auto& [step, score] : out.step_votes) {
    if (step >= 0 && static_cast<std::uint64_t>(step) < n) valid.emplace(step, score);
  }
  out.step = argmax(valid);
  return out;
}

DisagreementAnalysis analyze_disagreements(const VotesByKind& votes) {
  DisagreementAnalysis d;
  d.num_different_conclusions = votes.size();
  d.high_disagreement =
      votes.size() > 2 &&
      std::all_of(votes.begin(), votes.end(), [](const auto& kv) { return !kv.second.empty(); });
  bool any = false;
  double lo = 0.0;
  double hi = 0.0;
  for (const auto& [kind, list] : votes) {
    for (const auto& v : list) {
      if (!any) {
        lo = hi = v.confidence;
        any = true;
      }
      lo = std::min(lo, v.confidence);
      hi = std::max(hi, v.confidence);
    }
  }
  d.confidence_spread = any ? hi - lo : 0.0;
  d.requires_review = d.high_disagreement || d.confidence_spread > 0.5 + kScoreTolerance;
  return d;
}

std::map<std::string, AgentEvaluationSummary> summarize_agent_evaluations(
    std::span<const AnalysisResult> analyses) {
  std::map<std::string, AgentEvaluationSummary> out;
  for (std::size_t i = 0; i < analyses.size(); ++i) {
    for (const auto& e : analyses[i].agent_evaluations) {
      if (e.agent_name.empty()) continue;
      out[e.agent_name].evaluations.push_back(
          {e.error_likelihood, e.reasoning, e.evidence, i});
    }
  }
  for (auto& [name, s] : out) {
    double sum = 0.0;
    for (const auto& e : s.evaluations) sum += e.error_likelihood;
    s.num_evaluations = s.evaluations.size();
    s.avg_error_likelihood = sum / static_cast<double>(s.num_evaluations);
  }
  return out;
}

ConsensusResult aggregate(std::span<const AnalysisResult> analyses,
                          const ConsensusConfig& config,
                          const InteractionTrace& trace) {
  config.validate();
  VotesByKind votes = filter_votes(analyses, config);

  std::map<ConclusionKind, double> kind_scores;
  for (const auto& [kind, list] : votes) kind_scores[kind] = total_confidence(list);
  // single_agent precedes multi_agent in the map, so it wins ties.
  const auto winner = argmax(kind_scores);
  if (!winner || !(kind_scores[*winner] > kScoreTolerance)) {
    return empty_consensus(analyses.size());
  }

  ConsensusResult r;
  r.num_analysts = analyses.size();
  const std::vector<Vote>& winning = votes.at(*winner);
  const double total = kind_scores[*winner];
  const double mean = total / static_cast<double>(winning.size());

  std::map<std::string, double> agent_scores;
  for (const auto& v : winning) {
    // An analyst naming an agent twice still casts one vote for it.
    const std::set<std::string> named(v.attribution.begin(), v.attribution.end());
    for (const auto& name : named) agent_scores[name] += v.confidence;
  }
  Conclusion& c = r.conclusion;
  c.kind = *winner;
  if (*winner == ConclusionKind::single_agent) {
    if (auto top = argmax(agent_scores)) c.attribution.push_back(*top);
  } else {
    std::vector<std::pair<std::string, double>> kept;
    for (const auto& [name, score] : agent_scores) {
      if (score >= config.min_confidence_threshold - kScoreTolerance) {
        kept.emplace_back(name, score);
      }
    }
    std::stable_sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
      if (std::fabs(a.second - b.second) > kScoreTolerance) return a.second > b.second;
      return a.first < b.first;
    });
    for (auto& [name, score] : kept) c.attribution.push_back(std::move(name));
  }

  StepVote steps = vote_step(winning, trace.size());
  c.mistake_step = steps.step;
  c.confidence = mean;
  c.reasoning = synthesize_reasoning(winning, mean);

  r.voting.step_votes = std::move(steps.step_votes);
  r.voting.best_weighted_score = total;
  r.voting.disagreement = analyze_disagreements(votes);
  r.voting.conclusion_votes = std::move(votes);
  r.agent_evaluations_summary = summarize_agent_evaluations(analyses);
  for (const auto& a : analyses) {
    for (const auto& h : a.alternative_hypotheses) {
      if (r.alternative_hypotheses.size() == 5) break;
      r.alternative_hypotheses.push_back(h);
    }
  }
  return r;
}

void to_json(json& j, const Vote& v) {
  j = json{{"confidence", v.confidence},
           {"attribution", v.attribution},
           {"mistake_step", v.mistake_step ? json(*v.mistake_step) : json(nullptr)},
           {"reasoning", v.reasoning},
           {"analyst_id", v.analyst_id}};
}

void to_json(json& j, const DisagreementAnalysis& d) {
  j = json{{"high_disagreement", d.high_disagreement},
           {"num_different_conclusions", d.num_different_conclusions},
           {"confidence_spread", d.confidence_spread},
           {"requires_review", d.requires_review}};
}

void to_json(json& j, const ConsensusResult& r) {
  json votes = json::object();
  for (const auto& [kind, list] : r.voting.conclusion_votes) {
    votes[std::string(to_string(kind))] = list;
  }
  json steps = json::object();
  for (const auto& [step, score] : r.voting.step_votes) {
    steps[std::to_string(step)] = score;
  }
  json summary = json::object();
  for (const auto& [name, s] : r.agent_evaluations_summary) {
    json evals = json::array();
    for (const auto& e : s.evaluations) {
      evals.push_back({{"error_likelihood", e.error_likelihood},
                       {"reasoning", e.reasoning},
                       {"evidence", e.evidence},
                       {"analyst_id", e.analyst_id}});
    }
    summary[name] = {{"avg_error_likelihood", s.avg_error_likelihood},
                     {"num_evaluations", s.num_evaluations},
                     {"evaluations", std::move(evals)}};
  }
  json conclusion = r.conclusion;
  conclusion.erase("analyst_id");
  j = json{{"consensus_conclusion", std::move(conclusion)},
           {"voting_details",
            {{"conclusion_votes", std::move(votes)},
             {"step_votes", std::move(steps)},
             {"best_weighted_score", r.voting.best_weighted_score},
             {"disagreement_analysis", r.voting.disagreement}}},
           {"agent_evaluations_summary", std::move(summary)},
           {"alternative_hypotheses", r.alternative_hypotheses},
           {"num_analysts", r.num_analysts},
           {"voting_method", "weighted_confidence_consensus"}};
}

}  // namespace faultline
