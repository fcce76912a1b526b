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

#ifndef FAULTLINE_EVAL_HPP_
#define FAULTLINE_EVAL_HPP_

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "faultline/baselines.hpp"
#include "faultline/gateway.hpp"
#include "faultline/trace.hpp"

namespace faultline {

// Case-insensitive equality after trimming whitespace. No fuzzy matching.
bool agent_names_match(std::string_view predicted, std::string_view gold);

struct CaseOutcome {
  std::string case_id;
  Attribution predicted;
  GoldAnnotation gold;
  bool agent_correct = false;
  std::optional<std::int64_t> step_error;  // |predicted - gold|
  TokenUsage tokens;
  bool failed = false;  // a provider call failed while attributing
};

// Scores one prediction. Failed cases are marked incorrect.
CaseOutcome make_outcome(std::string case_id, Attribution predicted,
                         GoldAnnotation gold, bool failed = false);

enum class Condition { with_gt, without_gt };

std::string_view to_string(Condition c) noexcept;
Condition parse_condition(std::string_view s);

struct PairwiseP {
  double agent = 1.0;
  double step = 1.0;
};

struct EvalReport {
  std::string strategy;
  Condition condition = Condition::with_gt;
  Subset subset = Subset::hand_crafted;
  std::size_t n_cases = 0;
  std::size_t n_failed = 0;
  std::size_t agent_correct = 0;
  std::size_t step_correct = 0;
  double agent_accuracy = 0.0;
  double step_accuracy_exact = 0.0;
  std::vector<double> step_accuracy_at;  // [k] for k = 0..tolerance_max
  TokenUsage total_tokens;
  double mean_tokens = 0.0;
  std::map<std::string, PairwiseP> p_values;  // against other strategies
};

struct ScoreOptions {
  std::size_t tolerance_max = 5;
  // Drop failed cases from the denominator instead of counting them wrong.
  bool exclude_failed = false;
};

// Throws std::invalid_argument when no outcomes remain to score.
EvalReport score(std::span<const CaseOutcome> outcomes,
                 const ScoreOptions& options = {});

struct RandomBaseline {
  double agent = 0.0;
  double step = 0.0;
};

// Expected accuracy of uniform guessing, averaged over cases:
// 1/(distinct agent names) and 1/n per case. Zero cases give zeros.
RandomBaseline random_baseline(std::span<const LabeledCase> cases);

struct Proportion {
  std::size_t correct = 0;
  std::size_t total = 0;
};

// Pearson statistic of the 2x2 table [correct, wrong] x [a, b].
// Degenerate tables (a zero row or column margin) give 0.
double chi_squared_statistic(Proportion a, Proportion b,
                             bool yates_correction = false);
// Survival function of chi-squared with 1 degree of freedom at the
// statistic. Degenerate tables give 1. Throws std::invalid_argument when a
// total is zero or correct > total.
double chi_squared_p(Proportion a, Proportion b,
                     bool yates_correction = false);

void to_json(nlohmann::json& j, const CaseOutcome& o);
void to_json(nlohmann::json& j, const EvalReport& r);

}  // namespace faultline

#endif  // FAULTLINE_EVAL_HPP_
