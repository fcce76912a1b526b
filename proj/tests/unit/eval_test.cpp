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

#include "faultline/eval.hpp"

#include <random>
#include <stdexcept>

#include <boost/math/distributions/chi_squared.hpp>
#include <gtest/gtest.h>

#include "test_support.hpp"

namespace faultline {
namespace {

GoldAnnotation gold(std::string agent, std::size_t step) {
  GoldAnnotation g;
  g.mistake_agent = std::move(agent);
  g.mistake_step = step;
  return g;
}

Attribution predicted(std::string agent, std::optional<std::int64_t> step) {
  Attribution a;
  a.mistake_agent = std::move(agent);
  a.mistake_step = step;
  return a;
}

TEST(EvalTest, AgentNamesMatchCaseInsensitivelyAfterTrim) {
  EXPECT_TRUE(agent_names_match(" WebSurfer\n", "websurfer"));
  EXPECT_FALSE(agent_names_match("Web Surfer", "WebSurfer"));
  auto sentinel = make_outcome("c", predicted("Unknown", 1), gold("Unknown", 1));
  EXPECT_FALSE(sentinel.agent_correct);
}

TEST(EvalTest, OutcomeStepError) {
  auto o = make_outcome("c", predicted("A", 7), gold("A", 5));
  EXPECT_TRUE(o.agent_correct);
  EXPECT_EQ(o.step_error, 2);
  auto none = make_outcome("c", predicted("Unknown", std::nullopt), gold("A", 5));
  EXPECT_FALSE(none.agent_correct);
  EXPECT_FALSE(none.step_error);
  auto failed = make_outcome("c", predicted("A", 5), gold("A", 5), true);
  EXPECT_FALSE(failed.agent_correct);
  EXPECT_FALSE(failed.step_error);
}

TEST(EvalTest, ScoreCountsToleranceBands) {
  std::vector<CaseOutcome> o{
      make_outcome("a", predicted("A", 5), gold("A", 5)),
      make_outcome("b", predicted("B", 7), gold("A", 5)),
      make_outcome("c", predicted("A", std::nullopt), gold("A", 5)),
      make_outcome("d", predicted("a", 0), gold("A", 5)),
  };
  auto r = score(o);
  EXPECT_EQ(r.n_cases, 4u);
  EXPECT_DOUBLE_EQ(r.agent_accuracy, 0.75);
  EXPECT_DOUBLE_EQ(r.step_accuracy_exact, 0.25);
  ASSERT_EQ(r.step_accuracy_at.size(), 6u);
  EXPECT_DOUBLE_EQ(r.step_accuracy_at[0], 0.25);
  EXPECT_DOUBLE_EQ(r.step_accuracy_at[1], 0.25);
  EXPECT_DOUBLE_EQ(r.step_accuracy_at[2], 0.5);
  EXPECT_DOUBLE_EQ(r.step_accuracy_at[5], 0.75);
  EXPECT_THROW(score(std::vector<CaseOutcome>{}), std::invalid_argument);
}

TEST(EvalTest, FailedCasesCountWrongUnlessExcluded) {
  std::vector<CaseOutcome> o{
      make_outcome("a", predicted("A", 1), gold("A", 1)),
      make_outcome("b", predicted("A", 1), gold("A", 1), true),
  };
  auto counted = score(o);
  EXPECT_EQ(counted.n_failed, 1u);
  EXPECT_DOUBLE_EQ(counted.agent_accuracy, 0.5);
  auto excluded = score(o, {.tolerance_max = 5, .exclude_failed = true});
  EXPECT_EQ(excluded.n_cases, 1u);
  EXPECT_DOUBLE_EQ(excluded.agent_accuracy, 1.0);
}

TEST(EvalTest, RandomBaselineIsAnalytic) {
  LabeledCase two;
  two.trace = testing::make_trace({{"A", "x"}, {"B", "y"}, {"A", "z"}, {"B", "w"}});
  LabeledCase four;
  four.trace = testing::make_trace(10);
  std::vector<LabeledCase> cases{two, four};
  auto b = random_baseline(cases);
  EXPECT_DOUBLE_EQ(b.agent, 0.375);
  EXPECT_DOUBLE_EQ(b.step, (0.25 + 0.1) / 2);
  LabeledCase single;
  single.trace = testing::make_trace(1);
  EXPECT_DOUBLE_EQ(random_baseline(std::vector<LabeledCase>{single}).step, 1.0);
}

struct ChiCase {
  Proportion a, b;
  bool yates;
  double statistic, p;
};

// Frozen from scipy.stats.chi2_contingency.
const ChiCase kScipy[] = {
    {{90, 100}, {10, 100}, false, 128.0, 1.1224297172982905e-29},
    {{90, 100}, {10, 100}, true, 124.82, 5.572718056952591e-29},
    {{45, 100}, {55, 100}, false, 2.0, 0.15729920705028105},
    {{45, 100}, {55, 100}, true, 1.62, 0.20309178757716426},
    {{30, 50}, {20, 50}, false, 4.0, 0.04550026389635857},
    {{30, 50}, {20, 50}, true, 3.24, 0.07186063822585143},
    {{7, 13}, {11, 29}, false, 0.9283819628647216, 0.3352837242526069},
    {{7, 13}, {11, 29}, true, 0.39224137931034486, 0.5311235844709288},
    {{0, 10}, {3, 10}, false, 3.5294117647058822, 0.06028917399060221},
    {{0, 10}, {3, 10}, true, 1.5686274509803921, 0.2104064530953678},
    {{50, 158}, {30, 126}, false, 2.127255965677411, 0.1446995916023176},
    {{50, 158}, {30, 126}, true, 1.7576120251194718, 0.18492264931398641},
    {{1, 3}, {2, 4}, false, 0.19444444444444453, 0.6592430036926306},
    {{1, 3}, {2, 4}, true, 0.0, 1.0},
};

TEST(EvalTest, ChiSquaredMatchesScipy) {
  for (const auto& c : kScipy) {
    EXPECT_NEAR(chi_squared_statistic(c.a, c.b, c.yates), c.statistic, 1e-9);
    const double p = chi_squared_p(c.a, c.b, c.yates);
    EXPECT_NEAR(p, c.p, 1e-9);
    if (c.p > 1e-300) EXPECT_NEAR(p / c.p, 1.0, 1e-9);
  }
}

TEST(EvalTest, ChiSquaredMatchesBoostMath) {
  boost::math::chi_squared dist(1.0);
  std::mt19937_64 gen(3);
  for (int i = 0; i < 500; ++i) {
    std::uniform_int_distribution<std::size_t> tot(1, 200);
    Proportion a{0, tot(gen)}, b{0, tot(gen)};
    a.correct = std::uniform_int_distribution<std::size_t>(0, a.total)(gen);
    b.correct = std::uniform_int_distribution<std::size_t>(0, b.total)(gen);
    const double x = chi_squared_statistic(a, b);
    const double want = x > 0 ? boost::math::cdf(boost::math::complement(dist, x)) : 1.0;
    EXPECT_NEAR(chi_squared_p(a, b), want, 1e-9);
    EXPECT_EQ(chi_squared_p(a, b), chi_squared_p(b, a));
  }
}

TEST(EvalTest, ChiSquaredDegenerateTables) {
  EXPECT_EQ(chi_squared_p({50, 100}, {50, 100}), 1.0);
  EXPECT_EQ(chi_squared_p({0, 10}, {0, 20}), 1.0);
  EXPECT_EQ(chi_squared_p({10, 10}, {20, 20}), 1.0);
  EXPECT_LT(chi_squared_p({90, 100}, {10, 100}), 0.001);
  EXPECT_THROW(chi_squared_p({1, 0}, {1, 2}), std::invalid_argument);
  EXPECT_THROW(chi_squared_p({3, 2}, {1, 2}), std::invalid_argument);
}

}  // namespace
}  // namespace faultline
