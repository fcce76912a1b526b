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

#include "faultline/experiment.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <stdexcept>

#include <fmt/format.h>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

namespace faultline {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

class EchoStrategy final : public Strategy {
 public:
  EchoStrategy(std::string name, PipelineConfig config, const PromptLibrary* prompts)
      : name_(std::move(name)), config_(std::move(config)), prompts_(prompts) {}

  std::string name() const override { return name_; }

  Attribution attribute(CompletionProvider& provider, const LabeledCase& c,
                        bool with_ground_truth, json& audit) const override {
    PipelineConfig cfg = config_;
    cfg.with_ground_truth = with_ground_truth;
    EchoOutcome outcome = run_echo(provider, c.trace, cfg, c.case_id, prompts_);
    audit = outcome;
    audit["run_manifest"] = run_manifest(cfg, outcome);
    return outcome.attribution;
  }

 private:
  std::string name_;
  PipelineConfig config_;
  const PromptLibrary* prompts_;
};

using BaselineFn = Attribution (*)(CompletionProvider&, const InteractionTrace&, bool,
                                   const StrategyOptions&);

class BaselineStrategy final : public Strategy {
 public:
  BaselineStrategy(std::string name, BaselineFn fn, StrategyOptions options)
      : name_(std::move(name)), fn_(fn), options_(std::move(options)) {}

  std::string name() const override { return name_; }

  Attribution attribute(CompletionProvider& provider, const LabeledCase& c,
                        bool with_ground_truth, json& audit) const override {
    Attribution a = fn_(provider, c.trace, with_ground_truth, options_);
    audit = a;
    return a;
  }

 private:
  std::string name_;
  BaselineFn fn_;
  StrategyOptions options_;
};

class HierarchicalJudgeStrategy final : public Strategy {
 public:
  HierarchicalJudgeStrategy(StrategyOptions options, std::optional<ContextType> type)
      : options_(std::move(options)), type_(type) {}

  std::string name() const override { return "hierarchical_judge"; }

  Attribution attribute(CompletionProvider& provider, const LabeledCase& c,
                        bool with_ground_truth, json& audit) const override {
    Attribution a = hierarchical_judge(provider, c.trace, with_ground_truth, options_, type_);
    audit = a;
    return a;
  }

 private:
  StrategyOptions options_;
  std::optional<ContextType> type_;
};

std::string file_safe(std::string_view id) {
  std::string out(id);
  for (char& ch : out) {
    const bool ok = (ch >= 'a' && ch <= 'z') || (ch >= 'A' && ch <= 'Z') ||
                    (ch >= '0' && ch <= '9') || ch == '-' || ch == '_' || ch == '.';
    if (!ok) ch = '_';
  }
  if (out.empty() || out == "." || out == "..") out = "_" + out;
  return out;
}

void write_file(const fs::path& path, const std::string& content) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

std::shared_ptr<CompletionProvider> borrow(CompletionProvider& p) {
  return std::shared_ptr<CompletionProvider>(&p, [](CompletionProvider*) {});
}

}  // namespace

std::vector<std::string> strategy_names() {
  return {"echo",          "echo_unified",       "echo_decoupled",
          "all_at_once",   "step_by_step",       "binary_search",
          "fixed_window_judge", "hierarchical_judge"};
}

std::unique_ptr<Strategy> make_strategy(std::string_view name,
                                        const PipelineConfig& pipeline,
                                        const StrategyOptions& options,
                                        const PromptLibrary* prompts) {
  StrategyOptions opts = options;
  if (!opts.prompts) opts.prompts = prompts;
  if (name == "echo") return std::make_unique<EchoStrategy>("echo", pipeline, prompts);
  if (name == "echo_unified" || name == "echo_decoupled") {
    PipelineConfig cfg = pipeline;
    cfg.phase = name == "echo_unified" ? PhaseMode::unified : PhaseMode::decoupled;
    return std::make_unique<EchoStrategy>(std::string(name), cfg, prompts);
  }
  if (name == "all_at_once") {
    return std::make_unique<BaselineStrategy>("all_at_once", &all_at_once, opts);
  }
  if (name == "step_by_step") {
    return std::make_unique<BaselineStrategy>("step_by_step", &step_by_step, opts);
  }
  if (name == "binary_search") {
    return std::make_unique<BaselineStrategy>("binary_search", &binary_search, opts);
  }
  if (name == "fixed_window_judge") {
    return std::make_unique<BaselineStrategy>("fixed_window_judge", &fixed_window_judge,
                                              opts);
  }
  if (name == "hierarchical_judge") {
    return std::make_unique<HierarchicalJudgeStrategy>(opts, pipeline.context_type);
  }
  throw std::invalid_argument("unknown strategy '" + std::string(name) + "'");
}

void to_json(json& j, const ExperimentConfig& c) {
  json conditions = json::array();
  for (auto cond : c.conditions) conditions.push_back(to_string(cond));
  json subsets = json::array();
  for (auto s : c.subsets) subsets.push_back(to_string(s));
  const auto& o = c.strategy_options;
  j = json{{"strategies", c.strategies},
           {"conditions", std::move(conditions)},
           {"subsets", std::move(subsets)},
           {"pipeline", c.pipeline},
           {"strategy_options",
            {{"model_id", o.model_id},
             {"temperature", o.temperature},
             {"step_agent_temperature", o.step_agent_temperature},
             {"judge_temperature", o.judge_temperature},
             {"max_tokens", o.max_tokens},
             {"max_in_flight", o.max_in_flight}}},
           {"score",
            {{"tolerance_max", c.score.tolerance_max},
             {"exclude_failed", c.score.exclude_failed}}}};
}

ExperimentResult run_experiment(const ExperimentConfig& config,
                                const std::map<Subset, std::vector<LabeledCase>>& datasets,
                                CompletionProvider& provider,
                                std::span<const std::shared_ptr<const Strategy>> strategies) {
  ExperimentResult result;
  std::set<std::string> missing;

  for (Subset subset : config.subsets) {
    auto it = datasets.find(subset);
    if (it == datasets.end() || it->second.empty()) continue;
    std::vector<LabeledCase> cases = it->second;
    std::sort(cases.begin(), cases.end(),
              [](const auto& a, const auto& b) { return a.case_id < b.case_id; });
    result.random[subset] = random_baseline(cases);

    for (Condition condition : config.conditions) {
      const bool with_gt = condition == Condition::with_gt;
      const std::size_t first_report = result.reports.size();
      for (const auto& strategy : strategies) {
        std::vector<CaseOutcome> outcomes;
        outcomes.reserve(cases.size());
        for (const auto& c : cases) {
          MeteredProvider metered(borrow(provider));
          json audit;
          Attribution predicted;
          bool failed = false;
          try {
            predicted = strategy->attribute(metered, c, with_gt, audit);
          } catch (const std::exception& e) {
            spdlog::error("{} failed on {}: {}", strategy->name(), c.case_id, e.what());
            audit = {{"error", e.what()}};
            failed = true;
          }
          const auto snap = metered.snapshot();
          failed = failed || snap.failures > 0;
          predicted.usage = snap.usage;
          predicted.calls = snap.calls;
          result.total_usage += snap.usage;
          result.total_calls += snap.calls;
          result.failed_calls += snap.failures;
          result.fixture_misses += snap.fixture_misses;
          missing.insert(snap.missing_digests.begin(), snap.missing_digests.end());

          outcomes.push_back(make_outcome(c.case_id, std::move(predicted), c.gold, failed));
          if (config.run_dir) {
            const json doc = {{"case_id", c.case_id},
                              {"strategy", strategy->name()},
                              {"condition", to_string(condition)},
                              {"subset", to_string(subset)},
                              {"outcome", outcomes.back()},
                              {"audit", std::move(audit)}};
            write_file(*config.run_dir / "cases" / file_safe(strategy->name()) /
                           std::string(to_string(condition)) /
                           std::string(to_string(subset)) / (file_safe(c.case_id) + ".json"),
                       doc.dump(2) + "\n");
          }
        }
        EvalReport report = score(outcomes, config.score);
        report.strategy = strategy->name();
        report.condition = condition;
        report.subset = subset;
        result.reports.push_back(std::move(report));
      }
      // Pairwise significance within the cell.
      for (std::size_t i = first_report; i < result.reports.size(); ++i) {
        for (std::size_t j = first_report; j < result.reports.size(); ++j) {
          if (i == j) continue;
          auto& a = result.reports[i];
          const auto& b = result.reports[j];
          a.p_values[b.strategy] = PairwiseP{
              chi_squared_p({a.agent_correct, a.n_cases}, {b.agent_correct, b.n_cases}),
              chi_squared_p({a.step_correct, a.n_cases}, {b.step_correct, b.n_cases})};
        }
      }
    }
  }
  result.missing_digests.assign(missing.begin(), missing.end());

  if (config.run_dir) {
    json manifest = {{"config", config}};
    json ids = json::object();
    for (Subset subset : config.subsets) {
      auto it = datasets.find(subset);
      json list = json::array();
      if (it != datasets.end()) {
        std::vector<std::string> names;
        for (const auto& c : it->second) names.push_back(c.case_id);
        std::sort(names.begin(), names.end());
        list = names;
      }
      ids[std::string(to_string(subset))] = std::move(list);
    }
    manifest["cases"] = std::move(ids);
    write_file(*config.run_dir / "manifest.json", manifest.dump(2) + "\n");
    write_file(*config.run_dir / "reports.json",
               report_document(config, result).dump(2) + "\n");
    write_file(*config.run_dir / "table.txt", format_report_table(config, result));
  }
  return result;
}

ExperimentResult run_experiment(const ExperimentConfig& config,
                                const std::map<Subset, std::vector<LabeledCase>>& datasets,
                                CompletionProvider& provider, const PromptLibrary* prompts) {
  if (config.strategies.empty()) throw std::invalid_argument("no strategies selected");
  std::vector<std::shared_ptr<const Strategy>> strategies;
  for (const auto& name : config.strategies) {
    strategies.push_back(
        make_strategy(name, config.pipeline, config.strategy_options, prompts));
  }
  return run_experiment(config, datasets, provider, strategies);
}

json report_document(const ExperimentConfig& config, const ExperimentResult& result) {
  json random = json::object();
  for (const auto& [subset, b] : result.random) {
    random[std::string(to_string(subset))] = {{"agent", b.agent}, {"step", b.step}};
  }
  return json{{"config", config},
              {"reports", result.reports},
              {"random_baseline", std::move(random)},
              {"totals",
               {{"calls", result.total_calls},
                {"failed_calls", result.failed_calls},
                {"fixture_misses", result.fixture_misses},
                {"input_tokens", result.total_usage.input_tokens},
                {"output_tokens", result.total_usage.output_tokens},
                {"missing_digests", result.missing_digests}}}};
}

namespace {

std::string cell_label(Subset s, Condition c) {
  return fmt::format("{} {}", s == Subset::hand_crafted ? "Hand-Crafted" : "Algo-Generated",
                     c == Condition::with_gt ? "w/ GT" : "w/o GT");
}

}  // namespace

std::string format_report_table(const ExperimentConfig& config,
                                const ExperimentResult& result) {
  std::vector<CellKey> cells;
  for (Subset s : config.subsets) {
    if (!result.random.contains(s)) continue;
    for (Condition c : config.conditions) cells.push_back({c, s});
  }
  std::vector<std::string> names;
  for (const auto& r : result.reports) {
    if (std::find(names.begin(), names.end(), r.strategy) == names.end()) {
      names.push_back(r.strategy);
    }
  }
  auto find = [&](const std::string& name, const CellKey& cell) -> const EvalReport* {
    for (const auto& r : result.reports) {
      if (r.strategy == name && r.condition == cell.condition && r.subset == cell.subset) {
        return &r;
      }
    }
    return nullptr;
  };

  std::size_t name_width = 8;
  for (const auto& n : names) name_width = std::max(name_width, n.size());
  constexpr std::size_t kCellWidth = 24;

  std::string out = fmt::format("{:<{}}", "Method", name_width);
  for (const auto& cell : cells) {
    out += fmt::format(" | {:>{}}", cell_label(cell.subset, cell.condition), kCellWidth);
  }
  out += "\n";
  const std::string rule(out.size() - 1, '-');
  out += rule + "\n";

  auto section = [&](std::string_view title, bool with_random, auto value) {
    out += std::string(title) + "\n";
    if (with_random) {
      out += fmt::format("{:<{}}", "Random", name_width);
      for (const auto& cell : cells) {
        out += fmt::format(" | {:>{}.2f}", value(nullptr, cell) * 100.0, kCellWidth);
      }
      out += "\n";
    }
    for (const auto& n : names) {
      out += fmt::format("{:<{}}", n, name_width);
      for (const auto& cell : cells) {
        const EvalReport* r = find(n, cell);
        if (r) {
          out += fmt::format(" | {:>{}.2f}", value(r, cell) * (with_random ? 100.0 : 1.0),
                             kCellWidth);
        } else {
          out += fmt::format(" | {:>{}}", "-", kCellWidth);
        }
      }
      out += "\n";
    }
    out += rule + "\n";
  };

  section("Agent-level accuracy (%)", true, [&](const EvalReport* r, const CellKey& cell) {
    return r ? r->agent_accuracy : result.random.at(cell.subset).agent;
  });
  section("Step-level accuracy (%)", true, [&](const EvalReport* r, const CellKey& cell) {
    return r ? r->step_accuracy_exact : result.random.at(cell.subset).step;
  });
  for (std::size_t k = 1; k <= config.score.tolerance_max; ++k) {
    section(fmt::format("Step-level accuracy within +-{} (%)", k), false,
            [&](const EvalReport* r, const CellKey&) {
              return r ? r->step_accuracy_at[k] * 100.0 : 0.0;
            });
  }
  // Token cost is not a percentage; print mean tokens per case.
  out += "Mean tokens per case\n";
  for (const auto& n : names) {
    out += fmt::format("{:<{}}", n, name_width);
    for (const auto& cell : cells) {
      const EvalReport* r = find(n, cell);
      if (r) {
        out += fmt::format(" | {:>{}.1f}", r->mean_tokens, kCellWidth);
      } else {
        out += fmt::format(" | {:>{}}", "-", kCellWidth);
      }
    }
    out += "\n";
  }
  return out;
}

}  // namespace faultline
