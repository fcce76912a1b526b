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

#include <string>
#include <vector>

#include <benchmark/benchmark.h>
#include <fmt/format.h>

#include "faultline/analyst.hpp"
#include "faultline/consensus.hpp"
#include "faultline/context.hpp"
#include "faultline/gateway.hpp"
#include "faultline/pipeline.hpp"

namespace faultline {
namespace {

const char* kStepText =
    "I searched the registry and found 14 entries for the query. However, the "
    "second page failed to load, so I decided to use the cached copy instead. "
    "Therefore, the total should be 14. Next I will hand off to the Coder to "
    "verify the count against the raw table.";

InteractionTrace synthetic_trace(std::size_t n) {
  const char* names[] = {"Orchestrator", "WebSurfer", "Coder", "ComputerTerminal"};
  InteractionTrace t;
  t.query = "How many entries match?";
  t.final_answer = "14";
  for (std::size_t i = 0; i < n; ++i) {
    t.steps.push_back({i, names[i % 4], "assistant", fmt::format("Step {}: {}", i, kStepText)});
  }
  return t;
}

std::string reply(const char* agent, int step, double confidence) {
  return fmt::format(
      R"(<json>{{"analysis_summary": "s", "agent_evaluations": [{{"agent_name": "{0}", )"
      R"("step_index": {1}, "error_likelihood": 0.8, "reasoning": "r", "evidence": "e"}}], )"
      R"("primary_conclusion": {{"type": "single_agent", "attribution": ["{0}"], )"
      R"("mistake_step": {1}, "confidence": {2}, "reasoning": "because"}}, )"
      R"("alternative_hypotheses": []}}</json>)",
      agent, step, confidence);
}

void BM_ExtractKeyDecision(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(extract_key_decision(kStepText));
}
BENCHMARK(BM_ExtractKeyDecision);

void BM_SummarizeAgent(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(summarize_agent(kStepText));
}
BENCHMARK(BM_SummarizeAgent);

void BM_ObtainMilestones(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(obtain_milestones(kStepText));
}
BENCHMARK(BM_ObtainMilestones);

void BM_BuildHierarchicalContexts(benchmark::State& state) {
  const auto trace = synthetic_trace(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(build_hierarchical_contexts(trace));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_BuildHierarchicalContexts)->RangeMultiplier(2)->Range(8, 128)->Complexity();

void BM_ParseAnalysisOutput(benchmark::State& state) {
  const std::string text = "Reasoning first.\n" + reply("WebSurfer", 3, 0.85);
  for (auto _ : state) benchmark::DoNotOptimize(parse_analysis_output(text));
}
BENCHMARK(BM_ParseAnalysisOutput);

void BM_Aggregate(benchmark::State& state) {
  const auto trace = synthetic_trace(20);
  const char* agents[] = {"WebSurfer", "Coder", "Orchestrator"};
  std::vector<AnalysisResult> analyses;
  for (int i = 0; i < state.range(0); ++i) {
    analyses.push_back(parse_analysis_output(reply(agents[i % 3], i % 7, 0.3 + 0.1 * (i % 6))));
  }
  for (auto _ : state) benchmark::DoNotOptimize(aggregate(analyses, ConsensusConfig{}, trace));
}
BENCHMARK(BM_Aggregate)->Arg(3)->Arg(6)->Arg(24);

void BM_RunEchoScripted(benchmark::State& state) {
  const auto trace = synthetic_trace(static_cast<std::size_t>(state.range(0)));
  auto provider = ScriptedProvider::constant(reply("Coder", 2, 0.7));
  PipelineConfig config;
  for (auto _ : state) benchmark::DoNotOptimize(run_echo(*provider, trace, config, "bench"));
}
BENCHMARK(BM_RunEchoScripted)->Arg(10)->Arg(40);

}  // namespace
}  // namespace faultline

BENCHMARK_MAIN();
