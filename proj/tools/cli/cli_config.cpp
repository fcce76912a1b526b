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

#include "cli_config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "faultline/experiment.hpp"
#include "faultline/patterns.hpp"
#include "faultline/text.hpp"

namespace faultline::cli {

using nlohmann::json;

std::optional<std::string> process_env(std::string_view name) {
  const char* v = std::getenv(std::string(name).c_str());
  if (v == nullptr || *v == '\0') return std::nullopt;
  return std::string(v);
}

const std::vector<KeySpec>& key_specs() {
  static const std::vector<KeySpec> specs = [] {
    std::vector<KeySpec> s;
    auto add = [&](std::string name, std::optional<std::string> def, std::string help) {
      std::string flag = "--" + name;
      for (char& c : flag) {
        if (c == '_') c = '-';
      }
      std::string env = "FAULTLINE_" + name;
      for (char& c : env) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
      s.push_back({std::move(name), std::move(flag), std::move(env), std::move(def),
                   std::move(help)});
    };
    add("provider", "live", "completion backend: live, replay or mock");
    add("store", std::nullopt, "fixture store directory (record/replay)");
    add("script", std::nullopt, "mock provider rules file (JSON)");
    add("prompts_dir", std::nullopt, "directory of prompt template overrides");
    add("model", std::nullopt, "model id sent to the live endpoint");
    add("seed", "0", "panel sampling seed");
    add("panel_size", "3", "number of analysts per phase (1-6)");
    add("threshold", "0.3", "minimum analyst confidence that counts as a vote");
    add("phase", "decoupled", "unified or decoupled agent/step analysis");
    add("with_gt", "true", "show the ground truth to attribution prompts");
    add("context_type", std::nullopt,
        "pattern family for every layer: handoff, decision_quality, "
        "error_propagation or general (default: per-layer)");
    add("extraction", "pattern", "context compression: pattern or model");
    add("resample_step_panel", "false", "draw a fresh panel for the step phase");
    add("max_in_flight", "3", "concurrent provider calls");
    add("strategies", "echo", "comma-separated strategy names");
    add("subset", std::nullopt, "hand_crafted or algorithm_generated (default: both)");
    add("tolerance_max", "5", "largest step tolerance reported");
    add("exclude_failed", "false", "drop failed cases from accuracy denominators");
    add("index_base", "0", "base of step numbers in annotation files (0 or 1)");
    add("format", "text", "output format: text or json");
    add("run_dir", std::nullopt, "directory for evaluation artifacts");
    return s;
  }();
  return specs;
}

namespace {

std::string scalar_text(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number() || v.is_null()) return v.dump();
  if (v.is_array()) {
    std::string out;
    for (const auto& item : v) {
      if (!out.empty()) out += ",";
      out += scalar_text(item);
    }
    return out;
  }
  throw InputError("config values must be scalars or lists");
}

const KeySpec* find_spec(std::string_view key) {
  for (const auto& s : key_specs()) {
    if (s.name == key) return &s;
  }
  return nullptr;
}

std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  for (auto part : text::split_on(s, ",")) {
    auto item = text::strip(part);
    if (!item.empty()) out.emplace_back(item);
  }
  return out;
}

}  // namespace

CliConfig CliConfig::resolve(const std::map<std::string, std::string>& flags,
                             const EnvLookup& env) {
  CliConfig c;
  for (const auto& s : key_specs()) {
    if (s.default_value) c.entries_[s.name] = {*s.default_value, "default"};
  }

  std::optional<std::string> file;
  if (auto it = flags.find("config"); it != flags.end()) {
    file = it->second;
  } else if (auto v = env("FAULTLINE_CONFIG")) {
    file = *v;
  }
  if (file) {
    std::ifstream in(*file);
    if (!in) throw InputError("cannot read config file " + *file);
    json doc = json::parse(in, nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) {
      throw InputError("config file " + *file + " is not a JSON object");
    }
    for (const auto& [key, v] : doc.items()) {
      if (!find_spec(key)) throw InputError("unknown key '" + key + "' in " + *file);
      if (v.is_null()) {
        c.entries_.erase(key);
        continue;
      }
      c.entries_[key] = {scalar_text(v), "file:" + *file};
    }
  }

  for (const auto& s : key_specs()) {
    if (auto v = env(s.env)) c.entries_[s.name] = {*v, "env:" + s.env};
  }

  for (const auto& [key, value] : flags) {
    if (key == "config") continue;
    const KeySpec* spec = find_spec(key);
    if (!spec) throw InputError("unknown setting '" + key + "'");
    c.entries_[key] = {value, "flag:" + spec->flag};
  }
  return c;
}

std::optional<std::string> CliConfig::get(std::string_view key) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second.value;
}

const CliConfig::Entry* CliConfig::entry(std::string_view key) const {
  auto it = entries_.find(key);
  return it == entries_.end() ? nullptr : &it->second;
}

std::string CliConfig::value_or(std::string_view key, std::string fallback) const {
  auto v = get(key);
  return v ? *v : std::move(fallback);
}

std::string CliConfig::describe(std::string_view key) const {
  const Entry* e = entry(key);
  if (!e) return std::string(key);
  return std::string(key) + " = '" + e->value + "' (" + e->source + ")";
}

bool CliConfig::boolean(std::string_view key) const {
  const std::string v = text::to_lower(value_or(key, "false"));
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw InputError("expected a boolean for " + describe(key));
}

std::uint64_t CliConfig::unsigned_integer(std::string_view key) const {
  const std::string v = value_or(key, "0");
  try {
    std::size_t used = 0;
    if (!v.empty() && v.front() == '-') throw std::invalid_argument("negative");
    const auto n = std::stoull(v, &used);
    if (used != v.size()) throw std::invalid_argument("trailing text");
    return n;
  } catch (const std::exception&) {
    throw InputError("expected a non-negative integer for " + describe(key));
  }
}

double CliConfig::real(std::string_view key) const {
  const std::string v = value_or(key, "0");
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument("trailing text");
    return d;
  } catch (const std::exception&) {
    throw InputError("expected a number for " + describe(key));
  }
}

PipelineConfig CliConfig::pipeline() const {
  PipelineConfig p;
  try {
    p.panel_size = unsigned_integer("panel_size");
    p.threshold = real("threshold");
    p.phase = parse_phase_mode(value_or("phase", "decoupled"));
    if (auto t = get("context_type")) p.context_type = parse_context_type(*t);
    p.with_ground_truth = boolean("with_gt");
    p.seed = unsigned_integer("seed");
    p.extraction = parse_extraction_mode(value_or("extraction", "pattern"));
    p.resample_step_panel = boolean("resample_step_panel");
    p.max_in_flight = max_in_flight();
    p.model_id = value_or("model", "");
    p.validate();
  } catch (const InputError&) {
    throw;
  } catch (const std::exception& e) {
    throw InputError(e.what());
  }
  return p;
}

ScoreOptions CliConfig::score() const {
  ScoreOptions s;
  s.tolerance_max = unsigned_integer("tolerance_max");
  s.exclude_failed = boolean("exclude_failed");
  return s;
}

TraceParseOptions CliConfig::parse_options() const {
  TraceParseOptions o;
  const auto base = unsigned_integer("index_base");
  if (base > 1) throw InputError("index_base must be 0 or 1, got " + describe("index_base"));
  o.index_base = static_cast<int>(base);
  return o;
}

std::vector<Subset> CliConfig::subsets() const {
  auto v = get("subset");
  if (!v) return {Subset::hand_crafted, Subset::algorithm_generated};
  std::vector<Subset> out;
  try {
    for (const auto& s : split_list(*v)) out.push_back(parse_subset(s));
  } catch (const std::exception& e) {
    throw InputError(std::string(e.what()) + " for " + describe("subset"));
  }
  if (out.empty()) throw InputError("no subsets in " + describe("subset"));
  return out;
}

std::vector<std::string> CliConfig::strategies() const {
  auto out = split_list(value_or("strategies", "echo"));
  if (out.empty()) throw InputError("no strategies in " + describe("strategies"));
  const auto known = strategy_names();
  for (const auto& s : out) {
    if (std::find(known.begin(), known.end(), s) == known.end()) {
      throw InputError("unknown strategy '" + s + "' in " + describe("strategies"));
    }
  }
  return out;
}

bool CliConfig::json_output() const {
  const std::string f = value_or("format", "text");
  if (f == "json") return true;
  if (f == "text") return false;
  throw InputError("format must be text or json, got " + describe("format"));
}

std::size_t CliConfig::max_in_flight() const {
  const auto n = unsigned_integer("max_in_flight");
  if (n < 1) throw InputError("max_in_flight must be at least 1, got " + describe("max_in_flight"));
  return static_cast<std::size_t>(n);
}

std::string CliConfig::explain() const {
  std::ostringstream out;
  std::size_t width = 0;
  for (const auto& s : key_specs()) width = std::max(width, s.name.size());
  for (const auto& s : key_specs()) {
    out << s.name << std::string(width - s.name.size(), ' ') << " = ";
    if (const Entry* e = entry(s.name)) {
      out << e->value << "  [" << e->source << "]\n";
    } else {
      out << "(unset)\n";
    }
  }
  return out.str();
}

}  // namespace faultline::cli
