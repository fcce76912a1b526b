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

#ifndef FAULTLINE_TESTS_CONSENSUS_ORACLE_HPP_
#define FAULTLINE_TESTS_CONSENSUS_ORACLE_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "faultline/analyst.hpp"

namespace faultline::testing {

// Confidences are integers in twentieths so every comparison is exact.
struct GridVote {
  ConclusionKind kind = ConclusionKind::single_agent;
  std::vector<std::string> agents;
  std::optional<std::int64_t> step;
  int twentieths = 0;
};

struct OracleVerdict {
  bool empty = true;
  ConclusionKind kind = ConclusionKind::single_agent;
  std::vector<std::string> agents;
  std::optional<std::int64_t> step;

  bool operator==(const OracleVerdict&) const = default;
};

// Scores every candidate kind, agent and step, then picks the best under a
// total order: higher score first, then single_agent before multi_agent,
// lexicographically smaller names, smaller steps.
OracleVerdict enumerate_consensus(const std::vector<GridVote>& votes,
                                  int threshold_twentieths, std::size_t n);

std::vector<AnalysisResult> to_analyses(const std::vector<GridVote>& votes);

}  // namespace faultline::testing

#endif  // FAULTLINE_TESTS_CONSENSUS_ORACLE_HPP_
