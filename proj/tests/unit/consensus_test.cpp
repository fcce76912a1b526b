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

#include <cmath>
#include <random>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "consensus_oracle.hpp"
#include "test_support.hpp"

namespace faultline {
namespace {

using testing::make_analysis;
constexpr auto kSingle = ConclusionKind::single_agent;
constexpr auto kMulti = ConclusionKind::multi_agent;

ConsensusResult run(const std::vector<AnalysisResult>& a, double delta = 0.3,
                    std::size_t n = 10) {
  return aggregate(a, ConsensusConfig{delta}, testing::make_trace(n));
}

TEST(ConsensusTest, EmptyInputGivesEmptyShape) {
  auto r = run({});
  EXPECT_TRUE(r.is_empty());
  EXPECT_EQ(r.conclusion.kind, kSingle);
  EXPECT_TRUE(r.conclusion.attribution.empty());
  EXPECT_FALSE(r.conclusion.mistake_step);
  EXPECT_EQ(r.conclusion.confidence, 0.0);
  EXPECT_EQ(r.conclusion.reasoning, kNoAnalysesReasoning);
  EXPECT_TRUE(r.voting.disagreement.requires_review);
  EXPECT_EQ(r.voting.disagreement.num_different_conclusions, 0u);
}

TEST(ConsensusTest, UnanimousPanel) {
  std::vector<AnalysisResult> a(3, make_analysis(kSingle, {"B"}, 4, 0.9, "why"));
  auto r = run(a);
  EXPECT_EQ(r.conclusion.attribution, std::vector<std::string>{"B"});
  EXPECT_EQ(r.conclusion.mistake_step, 4);
  EXPECT_NEAR(r.conclusion.confidence, 0.9, 1e-12);
  EXPECT_NEAR(r.voting.best_weighted_score, 2.7, 1e-12);
  EXPECT_EQ(r.num_analysts, 3u);
  EXPECT_EQ(r.conclusion.reasoning,
            "Consensus reached by 3 analysts (avg confidence: 0.90). Primary "
            "reasoning: why... Additional supporting analysis from 2 other analysts.");
}

TEST(ConsensusTest, LowConfidenceVoteIsFilteredBeforeKindVote) {
  auto r = run({make_analysis(kSingle, {"A"}, 1, 0.8),
                make_analysis(kSingle, {"B"}, 2, 0.25),
                make_analysis(kMulti, {"A", "C"}, 3, 0.6)});
  EXPECT_EQ(r.conclusion.kind, kSingle);
  EXPECT_EQ(r.conclusion.attribution, std::vector<std::string>{"A"});
  EXPECT_EQ(r.voting.conclusion_votes.at(kSingle).size(), 1u);
  EXPECT_EQ(r.voting.disagreement.num_different_conclusions, 2u);
}

TEST(ConsensusTest, StepVotingSumsAndDiscardsOutOfBounds) {
  std::vector<Vote> votes{{0.9, {"A"}, 4, "", 0}, {0.8, {"A"}, 4, "", 1},
                          {0.7, {"A"}, 2, "", 2}};
  auto s = vote_step(votes, 10);
  EXPECT_EQ(s.step, 4);
  EXPECT_NEAR(s.step_votes.at(4), 1.7, 1e-12);

  std::vector<Vote> oob{{0.9, {"A"}, 12, "", 0}, {0.4, {"A"}, 3, "", 1}};
  EXPECT_EQ(vote_step(oob, 10).step, 3);
  EXPECT_EQ(vote_step(oob, 10).step_votes.size(), 2u);
  std::vector<Vote> all_oob{{0.9, {"A"}, 10, "", 0}, {0.4, {"A"}, -1, "", 1}};
  EXPECT_FALSE(vote_step(all_oob, 10).step);
}

TEST(ConsensusTest, TiesPreferSingleAgentThenNameThenStep) {
  auto r = run({make_analysis(kSingle, {"Zed"}, 5, 0.5),
                make_analysis(kSingle, {"Amy"}, 2, 0.5),
                make_analysis(kMulti, {"Bob"}, 1, 1.0)});
  EXPECT_EQ(r.conclusion.kind, kSingle);
  EXPECT_EQ(r.conclusion.attribution, std::vector<std::string>{"Amy"});
  EXPECT_EQ(r.conclusion.mistake_step, 2);
}

TEST(ConsensusTest, MultiAgentKeepsEveryAgentAboveThreshold) {
  auto r = run({make_analysis(kMulti, {"A", "B"}, 1, 0.6),
                make_analysis(kMulti, {"B", "C"}, 1, 0.5),
                make_analysis(kMulti, {"D"}, 1, 0.35)},
               0.4);
  EXPECT_EQ(r.conclusion.kind, kMulti);
  EXPECT_EQ(r.conclusion.attribution, (std::vector<std::string>{"B", "A", "C"}));
}

TEST(ConsensusTest, DisagreementSpreadIsStrict) {
  VotesByKind wide{{kSingle, {{0.9, {"A"}, 1, "", 0}, {0.35, {"B"}, 1, "", 1}}}};
  EXPECT_TRUE(analyze_disagreements(wide).requires_review);
  VotesByKind edge{{kSingle, {{0.8, {"A"}, 1, "", 0}, {0.3, {"B"}, 1, "", 1}}}};
  EXPECT_FALSE(analyze_disagreements(edge).requires_review);
  EXPECT_FALSE(analyze_disagreements(edge).high_disagreement);
  EXPECT_EQ(analyze_disagreements({}).confidence_spread, 0.0);
}

TEST(ConsensusTest, ThresholdAboveEveryConfidenceIsEmpty) {
  auto r = run({make_analysis(kSingle, {"A"}, 1, 0.5)}, 0.6);
  EXPECT_TRUE(r.is_empty());
  EXPECT_EQ(r.num_analysts, 1u);
  EXPECT_EQ(r.conclusion.reasoning, kNoAnalysesReasoning);
}

TEST(ConsensusTest, AllZeroConfidenceIsEmpty) {
  auto r = run({make_analysis(kSingle, {"A"}, 1, 0.0)}, 0.0);
  EXPECT_TRUE(r.is_empty());
}

TEST(ConsensusTest, AgentSummaryAndAlternatives) {
  std::vector<AnalysisResult> a;
  for (int i = 0; i < 3; ++i) {
    auto r = make_analysis(kSingle, {"A"}, 1, 0.7);
    r.agent_evaluations.push_back({"A", 1, i == 0 ? 0.2 : 0.4, "", ""});
    for (int h = 0; h < 3; ++h) r.alternative_hypotheses.push_back(r.primary_conclusion);
    a.push_back(r);
  }
  auto r = run(a);
  ASSERT_EQ(r.agent_evaluations_summary.count("A"), 1u);
  EXPECT_EQ(r.agent_evaluations_summary.at("A").num_evaluations, 3u);
  EXPECT_NEAR(r.agent_evaluations_summary.at("A").avg_error_likelihood, 1.0 / 3, 1e-12);
  EXPECT_EQ(r.alternative_hypotheses.size(), 5u);
  nlohmann::json j = r;
  EXPECT_EQ(j["voting_method"], "weighted_confidence_consensus");
  EXPECT_EQ(j["voting_details"]["step_votes"]["1"].get<double>(), r.voting.step_votes.at(1));
}

TEST(ConsensusTest, ScalingConfidencesKeepsTheVerdict) {
  std::mt19937_64 gen(77);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<AnalysisResult> a;
    std::uniform_int_distribution<int> pick(0, 3), step(0, 7), conf(10, 20);
    const char* names[] = {"A", "B", "C", "D"};
    for (int i = 0; i < 4; ++i) {
      a.push_back(make_analysis(pick(gen) < 2 ? kSingle : kMulti,
                                {names[pick(gen)]}, step(gen), conf(gen) / 20.0));
    }
    auto base = run(a, 0.0, 8);
    for (auto& r : a) r.primary_conclusion.confidence *= 0.5;
    auto scaled = run(a, 0.0, 8);
    EXPECT_EQ(base.conclusion.kind, scaled.conclusion.kind);
    EXPECT_EQ(base.conclusion.attribution, scaled.conclusion.attribution);
    EXPECT_EQ(base.conclusion.mistake_step, scaled.conclusion.mistake_step);
  }
}

TEST(ConsensusTest, MatchesBruteForceOracle) {
  std::mt19937_64 gen(2026);
  const char* names[] = {"Alpha", "Beta", "Gamma", "Delta"};
  for (int trial = 0; trial < 300; ++trial) {
    std::uniform_int_distribution<int> count(0, 5), grid(0, 20), coin(0, 1),
        step(0, 7), nsteps(1, 8), agents(1, 3), name(0, 3);
    std::vector<testing::GridVote> votes(count(gen));
    for (auto& v : votes) {
      v.kind = coin(gen) ? kSingle : kMulti;
      for (int k = agents(gen); k > 0; --k) v.agents.push_back(names[name(gen)]);
      if (v.kind == kSingle) v.agents.resize(1);
      if (grid(gen) > 2) v.step = step(gen);
      v.twentieths = grid(gen);
    }
    const int delta = grid(gen) / 2;
    const std::size_t n = nsteps(gen);
    auto got = aggregate(testing::to_analyses(votes), ConsensusConfig{delta / 20.0},
                         testing::make_trace(n));
    auto want = testing::enumerate_consensus(votes, delta, n);
    ASSERT_EQ(got.is_empty(), want.empty) << "trial " << trial;
    if (want.empty) continue;
    EXPECT_EQ(got.conclusion.kind, want.kind) << "trial " << trial;
    EXPECT_EQ(got.conclusion.attribution, want.agents) << "trial " << trial;
    EXPECT_EQ(got.conclusion.mistake_step, want.step) << "trial " << trial;
  }
}

TEST(ConsensusTest, ConfigValidation) {
  EXPECT_THROW(ConsensusConfig{1.5}.validate(), std::invalid_argument);
  EXPECT_THROW(ConsensusConfig{std::nan("")}.validate(), std::invalid_argument);
  EXPECT_NO_THROW(ConsensusConfig{0.0}.validate());
}

}  // namespace
}  // namespace faultline
