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

#include <algorithm>
#include <cmath>
#include <utility>
#include <set>
#include <stdexcept>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "faultline/text.hpp"

namespace faultline {

using nlohmann::json;

bool agent_names_match(std::string_view predicted, std::string_view gold) {
  return text::to_lower(text::strip(predicted)) == text::to_lower(text::strip(gold));
}

CaseOutcome make_outcome(std::string case_id, Attribution predicted,
                         GoldAnnotation gold, bool failed) {
  CaseOutcome o;
  o.case_id = std::move(case_id);
  o.failed = failed;
  o.tokens = predicted.usage;
  o.agent_correct = !failed && !predicted.is_unknown() &&
                    agent_names_match(predicted.mistake_agent, gold.mistake_agent);
  if (!o.agent_correct && !failed) {
    spdlog::debug("{}: predicted agent '{}' vs gold '{}'", o.case_id,
                  predicted.mistake_agent, gold.mistake_agent);
  }
  if (predicted.mistake_step && !failed) {
    const auto g = static_cast<std::int64_t>(gold.mistake_step);
    o.step_error = std::llabs(*predicted.mistake_step - g);
  }
  o.predicted = std::move(predicted);
  o.gold = std::move(gold);
  return o;
}

std::string_view to_string(Condition c) noexcept {
  return c == Condition::with_gt ? "with_gt" : "without_gt";
}

Condition parse_condition(std::string_view s) {
  if (s == "with_gt") return Condition::with_gt;
  if (s == "without_gt") return Condition::without_gt;
  throw std::invalid_argument("unknown condition '" + std::string(s) + "'");
}

EvalReport score(std::span<const CaseOutcome> outcomes, const ScoreOptions& options) {
  EvalReport r;
  r.step_accuracy_at.assign(options.tolerance_max + 1, 0.0);
  std::vector<std::size_t> within(options.tolerance_max + 1, 0);
  for (const auto& o : outcomes) {
    if (o.failed) {
      ++r.n_failed;
      if (options.exclude_failed) continue;
    }
    ++r.n_cases;
    r.total_tokens += o.tokens;
    if (o.failed) continue;
    if (o.agent_correct) ++r.agent_correct;
    if (!o.step_error) continue;
    const auto err = static_cast<std::size_t>(*o.step_error);
    if (err == 0) ++r.step_correct;
    for (std::size_t k = err; k < within.size(); ++k) ++within[k];
  }
  if (r.n_cases == 0) throw std::invalid_argument("no outcomes to score");
  const auto n = static_cast<double>(r.n_cases);
  r.agent_accuracy = static_cast<double>(r.agent_correct) / n;
  r.step_accuracy_exact = static_cast<double>(r.step_correct) / n;
  for (std::size_t k = 0; k < within.size(); ++k) {
    r.step_accuracy_at[k] = static_cast<double>(within[k]) / n;
  }
  r.mean_tokens = static_cast<double>(r.total_tokens.total()) / n;
  return r;
}

RandomBaseline random_baseline(std::span<const LabeledCase> cases) {
  RandomBaseline b;
  if (cases.empty()) return b;
  for (const auto& c : cases) {
    std::set<std::string> names;
    for (const auto& s : c.trace.steps) names.insert(s.name);
    if (!names.empty()) b.agent += 1.0 / static_cast<double>(names.size());
    if (c.trace.size() > 0) b.step += 1.0 / static_cast<double>(c.trace.size());
  }
  b.agent /= static_cast<double>(cases.size());
  b.step /= static_cast<double>(cases.size());
  return b;
}

namespace {

void check(Proportion p) {
  if (p.total == 0) throw std::invalid_argument("proportion total must be positive");
  if (p.correct > p.total) throw std::invalid_argument("correct exceeds total");
}

}  // namespace

double chi_squared_statistic(Proportion a, Proportion b, bool yates_correction) {
  check(a);
  check(b);
  // Fixed row order keeps the result bitwise symmetric.
  if (std::pair(b.correct, b.total) < std::pair(a.correct, a.total)) std::swap(a, b);
  const double observed[2][2] = {
      {static_cast<double>(a.correct), static_cast<double>(a.total - a.correct)},
      {static_cast<double>(b.correct), static_cast<double>(b.total - b.correct)},
  };
  const double rows[2] = {static_cast<double>(a.total), static_cast<double>(b.total)};
  const double cols[2] = {observed[0][0] + observed[1][0], observed[0][1] + observed[1][1]};
  const double n = rows[0] + rows[1];
  if (cols[0] == 0.0 || cols[1] == 0.0) return 0.0;
  double stat = 0.0;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      const double expected = rows[i] * cols[j] / n;
      double diff = std::fabs(observed[i][j] - expected);
      if (yates_correction) diff -= std::min(0.5, diff);
      stat += diff * diff / expected;
    }
  }
  return stat;
}

double chi_squared_p(Proportion a, Proportion b, bool yates_correction) {
  const double stat = chi_squared_statistic(a, b, yates_correction);
  if (stat <= 0.0) return 1.0;
  // Survival function of chi-squared with one degree of freedom.
  return std::erfc(std::sqrt(stat / 2.0));
}

void to_json(json& j, const CaseOutcome& o) {
  j = json{{"case_id", o.case_id},
           {"predicted", o.predicted},
           {"gold",
            {{"mistake_agent", o.gold.mistake_agent},
             {"mistake_step", o.gold.mistake_step},
             {"mistake_reason", o.gold.mistake_reason}}},
           {"agent_correct", o.agent_correct},
           {"step_error", o.step_error ? json(*o.step_error) : json(nullptr)},
           {"failed", o.failed},
           {"token_usage",
            {{"input_tokens", o.tokens.input_tokens}, {"output_tokens", o.tokens.output_tokens}}}};
}

void to_json(json& j, const EvalReport& r) {
  json p = json::object();
  for (const auto& [other, v] : r.p_values) p[other] = {{"agent", v.agent}, {"step", v.step}};
  j = json{{"strategy", r.strategy},
           {"condition", to_string(r.condition)},
           {"subset", to_string(r.subset)},
           {"n_cases", r.n_cases},
           {"n_failed", r.n_failed},
           {"agent_correct", r.agent_correct},
           {"step_correct", r.step_correct},
           {"agent_accuracy", r.agent_accuracy},
           {"step_accuracy_exact", r.step_accuracy_exact},
           {"step_accuracy_at", r.step_accuracy_at},
           {"total_tokens",
            {{"input_tokens", r.total_tokens.input_tokens},
             {"output_tokens", r.total_tokens.output_tokens}}},
           {"mean_tokens", r.mean_tokens},
           {"p_values", std::move(p)}};
}

}  // namespace faultline
