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

#ifndef FAULTLINE_TRACE_HPP_
#define FAULTLINE_TRACE_HPP_

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace faultline {

// One utterance of a multi-agent run. Agent identity is `name` alone.
struct AgentStep {
  std::size_t index = 0;
  std::string name;
  std::string role;
  std::string content;

  bool operator==(const AgentStep&) const = default;
};

// A failed multi-agent run: ordered steps plus the task, the (wrong) final
// answer and, when known, the correct answer.
struct InteractionTrace {
  std::vector<AgentStep> steps;
  std::string query;
  std::string final_answer;
  std::optional<std::string> ground_truth;

  std::size_t size() const noexcept { return steps.size(); }

  bool operator==(const InteractionTrace&) const = default;
};

// Annotated failure-responsible agent and step. `mistake_step` is 0-based.
struct GoldAnnotation {
  std::string mistake_agent;
  std::size_t mistake_step = 0;
  std::string mistake_reason;

  bool operator==(const GoldAnnotation&) const = default;
};

enum class Subset { hand_crafted, algorithm_generated };

std::string_view to_string(Subset s) noexcept;
// Accepts "hand_crafted"/"Hand-Crafted" and "algorithm_generated"/
// "Algorithm-Generated". Throws std::invalid_argument otherwise.
Subset parse_subset(std::string_view s);

struct LabeledCase {
  std::string case_id;
  Subset source = Subset::hand_crafted;
  InteractionTrace trace;
  GoldAnnotation gold;
};

struct TraceParseOptions {
  // Base of the step numbers in annotation files (0 or 1). Converted to
  // 0-based on load.
  int index_base = 0;
};

// Parses the benchmark case document (question, ground_truth?,
// final_answer?, history[]). Throws ParseError naming the offending path,
// ValidationError when the history is empty.
InteractionTrace parse_trace(const nlohmann::json& document);

// Inverse of parse_trace, emitting the same document layout.
nlohmann::json serialize_trace(const InteractionTrace& trace);

// Parses a full case (trace + gold annotation). Does not validate the
// annotation against the trace; see validate_case.
LabeledCase parse_case(const nlohmann::json& document, std::string case_id,
                       Subset subset, const TraceParseOptions& options = {});

nlohmann::json serialize_case(const LabeledCase& c,
                              const TraceParseOptions& options = {});

// Every violated invariant of the case, one human-readable entry each.
// Empty iff the case is valid.
std::vector<std::string> validate_case(const LabeledCase& c);

struct LoadRejection {
  std::string source;  // case file path (relative to the dataset root)
  std::string reason;
};

struct LoadReport {
  std::vector<LoadRejection> rejections;
};

struct Dataset {
  std::vector<LabeledCase> cases;  // sorted by case_id
  LoadReport report;
};

// Loads one subset. Case files are taken from `manifest.json` at the root
// ({"hand_crafted": [paths...], "algorithm_generated": [...]}) when present,
// otherwise from every *.json file under <root>/<subset>/ (either naming
// convention). Unparseable or invalid cases are reported, never returned.
Dataset load_dataset(const std::filesystem::path& root, Subset subset,
                     const TraceParseOptions& options = {});

}  // namespace faultline

#endif  // FAULTLINE_TRACE_HPP_
