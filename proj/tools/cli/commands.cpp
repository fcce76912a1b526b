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

#include "commands.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "faultline/error.hpp"
#include "faultline/experiment.hpp"
#include "faultline/pipeline.hpp"
#include "faultline/prompts.hpp"

namespace faultline::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

TokenUsage usage_from(const json& j) {
  TokenUsage u;
  if (j.is_object()) {
    u.input_tokens = j.value("input_tokens", std::int64_t{0});
    u.output_tokens = j.value("output_tokens", std::int64_t{0});
  }
  return u;
}

json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read " + path.string());
  json doc = json::parse(in, nullptr, false);
  if (doc.is_discarded()) throw ParseError(path.string(), "not valid JSON");
  return doc;
}

}  // namespace

std::shared_ptr<CompletionProvider> load_mock_provider(const fs::path& rules_path) {
  const json doc = read_json_file(rules_path);
  struct Rule {
    std::string contains;
    std::string reply;
    TokenUsage usage;
  };
  std::vector<Rule> rules;
  std::optional<std::pair<std::string, TokenUsage>> fallback;
  try {
    for (const auto& r : doc.value("rules", json::array())) {
      rules.push_back({r.at("contains").get<std::string>(), r.at("reply").get<std::string>(),
                       usage_from(r.value("usage", json::object()))});
    }
    if (auto it = doc.find("default"); it != doc.end() && it->is_string()) {
      fallback.emplace(it->get<std::string>(),
                       usage_from(doc.value("default_usage", json::object())));
    }
  } catch (const json::exception& e) {
    throw ParseError(rules_path.string(), e.what());
  }
  return std::make_shared<ScriptedProvider>(
      [rules = std::move(rules), fallback](const CompletionRequest& req, std::size_t) {
        for (const auto& r : rules) {
          if (req.system_prompt.find(r.contains) != std::string::npos ||
              req.user_prompt.find(r.contains) != std::string::npos) {
            return CompletionResponse{r.reply, r.usage};
          }
        }
        if (fallback) return CompletionResponse{fallback->first, fallback->second};
        throw ProviderError("mock script has no rule for this request");
      });
}

std::shared_ptr<CompletionProvider> make_provider(const CliConfig& config, ProviderMode mode) {
  const std::string kind = config.value_or("provider", "live");
  auto store = [&]() {
    auto dir = config.get("store");
    if (!dir) throw InputError("--store is required for record and replay");
    return FixtureStore(*dir);
  };

  std::shared_ptr<CompletionProvider> base;
  if (mode == ProviderMode::replay || (mode == ProviderMode::direct && kind == "replay")) {
    base = std::make_shared<ReplayProvider>(store());
  } else if (kind == "mock") {
    auto script = config.get("script");
    if (!script) throw InputError("--script is required for the mock provider");
    base = load_mock_provider(*script);
  } else if (kind == "live") {
    LiveConfig live = LiveConfig::from_env();
    if (auto model = config.get("model")) live.model_id = *model;
    base = std::make_shared<LiveProvider>(std::move(live));
  } else if (kind == "replay") {
    throw InputError("record needs a live or mock provider, not replay");
  } else {
    throw InputError("provider must be live, replay or mock, got '" + kind + "'");
  }
  if (mode == ProviderMode::record) {
    base = std::make_shared<RecordingProvider>(std::move(base), store());
  }
  return std::make_shared<InFlightLimiter>(
      std::move(base), static_cast<std::ptrdiff_t>(config.max_in_flight()));
}

namespace {

struct Flags {
  std::map<std::string, std::string> values;
  std::string target;  // trace file or dataset root
  bool list = false;
  bool explain = false;
};

void add_setting_options(CLI::App* cmd, Flags& flags) {
  cmd->add_option_function<std::string>(
      "--config", [&flags](const std::string& v) { flags.values["config"] = v; },
      "JSON config file (flags > env > file)");
  for (const auto& spec : key_specs()) {
    if (spec.name == "with_gt") continue;
    const std::string key = spec.name;
    cmd->add_option_function<std::string>(
        spec.flag, [&flags, key](const std::string& v) { flags.values[key] = v; }, spec.help);
  }
  cmd->add_flag_function(
      "--with-gt", [&flags](std::int64_t) { flags.values["with_gt"] = "true"; },
      "show the ground truth to attribution prompts");
  cmd->add_flag_function(
      "--without-gt", [&flags](std::int64_t) { flags.values["with_gt"] = "false"; },
      "hide the ground truth");
  cmd->add_flag("--explain", flags.explain,
                "print every effective setting and its source to stderr");
}

std::string fixed(double v, int digits) { return fmt::format("{:.{}f}", v, digits); }

// Exit code from provider accounting: a replay miss outranks other
// provider failures.
int provider_exit(std::size_t misses, const std::vector<std::string>& missing,
                  std::size_t failures, std::ostream& err) {
  if (misses > 0) {
    for (const auto& d : missing) err << "error: no recorded fixture for request digest " << d << "\n";
    return kExitFixtureMiss;
  }
  if (failures > 0) {
    err << "error: " << failures << " provider call(s) failed\n";
    return kExitProvider;
  }
  return kExitOk;
}

std::unique_ptr<PromptLibrary> prompt_library(const CliConfig& config) {
  if (auto dir = config.get("prompts_dir")) {
    return std::make_unique<PromptLibrary>(PromptLibrary::with_overrides(*dir));
  }
  return nullptr;
}

void print_echo_text(std::ostream& out, const EchoOutcome& o) {
  const auto& a = o.attribution;
  out << "Agent: " << a.mistake_agent << "\n";
  out << "Step: " << (a.mistake_step ? std::to_string(*a.mistake_step) : "undetermined") << "\n";
  out << "Reason: " << a.mistake_reason << "\n";
  const auto& c = o.consensus;
  out << "Consensus: " << to_string(c.conclusion.kind) << ", confidence "
      << fixed(c.conclusion.confidence, 2) << ", weighted score "
      << fixed(c.voting.best_weighted_score, 2) << ", requires review "
      << (c.voting.disagreement.requires_review ? "yes" : "no") << "\n";
  out << "Panel:";
  for (const auto& p : o.panel) out << " " << to_string(p.role) << "@" << fixed(p.temperature, 2);
  out << "\n";
  out << "Calls: " << o.calls << ", tokens in/out: " << o.usage.input_tokens << "/"
      << o.usage.output_tokens << "\n";
}

int cmd_attribute(const CliConfig& config, const Flags& flags, ProviderMode mode,
                  std::ostream& out, std::ostream& err) {
  const auto strategies = config.strategies();
  if (strategies.size() != 1) throw InputError("attribute runs exactly one strategy");
  const PipelineConfig pipeline = config.pipeline();
  const fs::path path = flags.target;
  const json doc = read_json_file(path);
  const InteractionTrace trace = parse_trace(doc);
  const auto prompts = prompt_library(config);
  auto provider = make_provider(config, mode);
  MeteredProvider metered(provider);

  json report;
  if (strategies.front().starts_with("echo")) {
    PipelineConfig cfg = pipeline;
    if (strategies.front() == "echo_unified") cfg.phase = PhaseMode::unified;
    if (strategies.front() == "echo_decoupled") cfg.phase = PhaseMode::decoupled;
    EchoOutcome outcome = run_echo(metered, trace, cfg, path.stem().string(), prompts.get());
    if (config.json_output()) {
      report = outcome;
      report["run_manifest"] = run_manifest(cfg, outcome);
    } else {
      print_echo_text(out, outcome);
    }
  } else {
    StrategyOptions opts;
    opts.model_id = pipeline.model_id;
    opts.max_in_flight = pipeline.max_in_flight;
    opts.prompts = prompts.get();
    auto strategy = make_strategy(strategies.front(), pipeline, opts, prompts.get());
    LabeledCase c;
    c.case_id = path.stem().string();
    c.trace = trace;
    json audit;
    Attribution a = strategy->attribute(metered, c, pipeline.with_ground_truth, audit);
    const auto snap = metered.snapshot();
    a.usage = snap.usage;
    a.calls = snap.calls;
    if (config.json_output()) {
      report = a;
    } else {
      out << "Agent: " << a.mistake_agent << "\n";
      out << "Step: " << (a.mistake_step ? std::to_string(*a.mistake_step) : "undetermined")
          << "\n";
      out << "Reason: " << a.mistake_reason << "\n";
      out << "Calls: " << a.calls << ", tokens in/out: " << a.usage.input_tokens << "/"
          << a.usage.output_tokens << "\n";
    }
  }
  if (config.json_output()) out << report.dump(2) << "\n";
  const auto snap = metered.snapshot();
  return provider_exit(snap.fixture_misses, snap.missing_digests, snap.failures, err);
}

std::string default_run_dir(std::uint64_t seed) {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream name;
  name << "runs/" << std::put_time(&tm, "%Y%m%dT%H%M%SZ") << "-seed" << seed;
  return name.str();
}

int cmd_evaluate(const CliConfig& config, const Flags& flags, ProviderMode mode,
                 std::ostream& out, std::ostream& err) {
  ExperimentConfig exp;
  exp.strategies = config.strategies();
  exp.subsets = config.subsets();
  exp.pipeline = config.pipeline();
  exp.score = config.score();
  exp.strategy_options.model_id = exp.pipeline.model_id;
  exp.strategy_options.max_in_flight = exp.pipeline.max_in_flight;
  // Both ground-truth conditions unless one was asked for explicitly.
  if (const auto* e = config.entry("with_gt"); e && e->source != "default") {
    exp.conditions = {exp.pipeline.with_ground_truth ? Condition::with_gt
                                                     : Condition::without_gt};
  }
  const auto parse_opts = config.parse_options();
  if (!fs::is_directory(flags.target)) {
    throw InputError("dataset root " + flags.target + " is not a directory");
  }
  std::map<Subset, std::vector<LabeledCase>> datasets;
  std::size_t total = 0;
  for (Subset s : exp.subsets) {
    Dataset d = load_dataset(flags.target, s, parse_opts);
    for (const auto& r : d.report.rejections) {
      err << "warning: skipped " << r.source << ": " << r.reason << "\n";
    }
    total += d.cases.size();
    datasets[s] = std::move(d.cases);
  }
  if (total == 0) throw InputError("no valid cases under " + flags.target);
  exp.run_dir = config.value_or("run_dir", default_run_dir(exp.pipeline.seed));

  const auto prompts = prompt_library(config);
  exp.strategy_options.prompts = prompts.get();
  auto provider = make_provider(config, mode);
  const ExperimentResult result = run_experiment(exp, datasets, *provider, prompts.get());
  if (config.json_output()) {
    out << report_document(exp, result).dump(2) << "\n";
  } else {
    out << format_report_table(exp, result);
    out << "Run directory: " << exp.run_dir->string() << "\n";
  }
  return provider_exit(result.fixture_misses, result.missing_digests, result.failed_calls, err);
}

int cmd_list(const CliConfig& config, std::ostream& out) {
  auto dir = config.get("store");
  if (!dir) throw InputError("--store is required");
  for (const auto& d : FixtureStore(*dir).digests()) out << d << "\n";
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
            const EnvLookup& env) {
  CLI::App app{"Attribute failures in multi-agent interaction traces", "faultline"};
  app.require_subcommand(1);
  Flags flags;

  struct Leaf {
    CLI::App* app;
    ProviderMode mode;
    bool evaluate;
  };
  std::vector<Leaf> leaves;
  auto add_pair = [&](CLI::App* parent, ProviderMode mode) {
    auto* attribute = parent->add_subcommand("attribute", "attribute one trace file");
    attribute->add_option("trace", flags.target, "trace JSON file")->required();
    add_setting_options(attribute, flags);
    auto* evaluate =
        parent->add_subcommand("evaluate", "score strategies on a dataset directory");
    evaluate->add_option("dataset", flags.target, "dataset root directory")->required();
    add_setting_options(evaluate, flags);
    leaves.push_back({attribute, mode, false});
    leaves.push_back({evaluate, mode, true});
  };
  add_pair(&app, ProviderMode::direct);
  auto* record = app.add_subcommand("record", "run through a provider and save fixtures");
  add_pair(record, ProviderMode::record);
  record->add_flag("--list", flags.list, "list the digests in --store");
  record->add_option_function<std::string>(
      "--store", [&flags](const std::string& v) { flags.values["store"] = v; },
      "fixture store directory");
  auto* replay = app.add_subcommand("replay", "serve every call from recorded fixtures");
  add_pair(replay, ProviderMode::replay);

  std::vector<std::string> argv_storage{"faultline"};
  argv_storage.insert(argv_storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argv_storage) argv.push_back(a.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    // --help exits 0 through the same path.
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    for (const auto& leaf : leaves) {
      if (!leaf.app->parsed()) continue;
      const CliConfig config = CliConfig::resolve(flags.values, env);
      if (flags.explain) err << config.explain();
      return leaf.evaluate ? cmd_evaluate(config, flags, leaf.mode, out, err)
                           : cmd_attribute(config, flags, leaf.mode, out, err);
    }
    if (record->parsed() && flags.list) {
      return cmd_list(CliConfig::resolve(flags.values, env), out);
    }
    err << "error: expected attribute or evaluate (or record --list)\n";
    return kExitInput;
  } catch (const FixtureMissError& e) {
    err << "error: " << e.what() << "\n";
    return kExitFixtureMiss;
  } catch (const ProviderError& e) {
    err << "error: " << e.what() << "\n";
    return kExitProvider;
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace faultline::cli
