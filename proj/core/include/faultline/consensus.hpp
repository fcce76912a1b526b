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

#ifndef FAULTLINE_CONSENSUS_HPP_
#define FAULTLINE_CONSENSUS_HPP_

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "faultline/analyst.hpp"

namespace faultline {

struct ConsensusConfig {
  double min_confidence_threshold = 0.3;

  void validate() const;  // throws std::invalid_argument outside [0, 1]
};

// Weighted scores within this distance compare equal, so sums over the
// same votes in a different order cannot flip a tie.
inline constexpr double kScoreTolerance = 1e-9;

// A primary conclusion that cleared the confidence threshold.
struct Vote {
  double confidence = 0.0;
  std::vector<std::string> attribution;
  std::optional<std::int64_t> mistake_step;
  std::string reasoning;
  std::size_t analyst_id = 0;

  bool operator==(const Vote&) const = default;
};

using VotesByKind = std::map<ConclusionKind, std::vector<Vote>>;

struct DisagreementAnalysis {
  bool high_disagreement = false;
  std::size_t num_different_conclusions = 0;
  double confidence_spread = 0.0;
  bool requires_review = false;

  bool operator==(const DisagreementAnalysis&) const = default;
};

struct VotingDetails {
  VotesByKind conclusion_votes;
  std::map<std::int64_t, double> step_votes;  // every proposed step
  double best_weighted_score = 0.0;
  DisagreementAnalysis disagreement;
};

struct AgentEvaluationRecord {
  double error_likelihood = 0.0;
  std::string reasoning;
  std::string evidence;
  std::size_t analyst_id = 0;
};

struct AgentEvaluationSummary {
  double avg_error_likelihood = 0.0;
  std::size_t num_evaluations = 0;
  std::vector<AgentEvaluationRecord> evaluations;
};

inline constexpr std::string_view kNoAnalysesReasoning =
    "No objective analyses provided";

struct ConsensusResult {
  Conclusion conclusion;
  VotingDetails voting;
  std::map<std::string, AgentEvaluationSummary> agent_evaluations_summary;
  std::vector<Conclusion> alternative_hypotheses;  // at most 5
  std::size_t num_analysts = 0;

  // True for the no-votes shape (no analyses, or none above threshold).
  bool is_empty() const noexcept;
};

// The result returned when there is nothing to vote on: single_agent, no
// attribution, confidence 0, requires_review set.
ConsensusResult empty_consensus(std::size_t num_analysts = 0);

// Votes per kind, in analyst order, keeping conclusions with
// confidence >= threshold.
VotesByKind filter_votes(std::span<const AnalysisResult> analyses,
                         const ConsensusConfig& config);

// Sums confidence per proposed step over `votes`, discards steps outside
// [0, n) and returns the heaviest (smallest index on ties).
struct StepVote {
  std::optional<std::int64_t> step;
  std::map<std::int64_t, double> step_votes;
};
StepVote vote_step(std::span<const Vote> votes, std::size_t n);

DisagreementAnalysis analyze_disagreements(const VotesByKind& votes);

std::map<std::string, AgentEvaluationSummary> summarize_agent_evaluations(
    std::span<const AnalysisResult> analyses);

// Confidence-weighted consensus. Winner kind, agents and step are chosen
// by total confidence; ties go to single_agent, then the lexicographically
// smallest agent name, then the smallest step.
ConsensusResult aggregate(std::span<const AnalysisResult> analyses,
                          const ConsensusConfig& config,
                          const InteractionTrace& trace);

void to_json(nlohmann::json& j, const Vote& v);
void to_json(nlohmann::json& j, const DisagreementAnalysis& d);
void to_json(nlohmann::json& j, const ConsensusResult& r);

}  // namespace faultline

#endif  // FAULTLINE_CONSENSUS_HPP_
