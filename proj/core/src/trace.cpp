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

#include "faultline/trace.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "faultline/error.hpp"

namespace faultline {

using nlohmann::json;

std::string_view to_string(Subset s) noexcept {
  switch (s) {
    case Subset::hand_crafted:
      return "hand_crafted";
    case Subset::algorithm_generated:
      return "algorithm_generated";
  }
  return "hand_crafted";
}

Subset parse_subset(std::string_view s) {
  if (s == "hand_crafted" || s == "Hand-Crafted" || s == "hand-crafted") {
    return Subset::hand_crafted;
  }
  if (s == "algorithm_generated" || s == "Algorithm-Generated" ||
      s == "algorithm-generated") {
    return Subset::algorithm_generated;
  }
  throw std::invalid_argument("unknown subset: " + std::string(s));
}

namespace {

std::string scalar_text(const json& v, const std::string& path) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number() || v.is_boolean()) return v.dump();
  throw ParseError(path, "expected a string");
}

const json& require(const json& obj, const char* key, const std::string& path) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(path + "." + key, "missing field");
  return *it;
}

std::string optional_text(const json& obj, const char* key,
                          const std::string& path) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return {};
  return scalar_text(*it, path + "." + key);
}

std::int64_t step_number(const json& v, const std::string& path) {
  if (v.is_number_integer()) return v.get<std::int64_t>();
  if (v.is_number_float()) {
    double d = v.get<double>();
    if (d == static_cast<double>(static_cast<std::int64_t>(d))) {
      return static_cast<std::int64_t>(d);
    }
  }
  if (v.is_string()) {
    auto s = v.get<std::string>();
    std::int64_t out = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    if (ec == std::errc() && p == s.data() + s.size() && !s.empty()) {
      return out;
    }
  }
  throw ParseError(path, "expected an integer step number");
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

InteractionTrace parse_trace(const json& document) {
  if (!document.is_object()) throw ParseError("$", "expected an object");
  const json& history = require(document, "history", "$");
  if (!history.is_array()) throw ParseError("$.history", "expected an array");
  if (history.empty()) throw ValidationError("$.history: empty step array");

  InteractionTrace trace;
  trace.query = optional_text(document, "question", "$");
  trace.final_answer = optional_text(document, "final_answer", "$");
  if (auto it = document.find("ground_truth");
      it != document.end() && !it->is_null()) {
    trace.ground_truth = scalar_text(*it, "$.ground_truth");
  }

  trace.steps.reserve(history.size());
  for (std::size_t i = 0; i < history.size(); ++i) {
    const std::string path = "$.history[" + std::to_string(i) + "]";
    const json& item = history[i];
    if (!item.is_object()) throw ParseError(path, "expected an object");
    AgentStep step;
    step.index = i;
    step.name = scalar_text(require(item, "name", path), path + ".name");
    if (step.name.empty()) throw ParseError(path + ".name", "empty agent name");
    const json& content = require(item, "content", path);
    step.content = content.is_null() ? std::string()
                                     : scalar_text(content, path + ".content");
    step.role = optional_text(item, "role", path);
    trace.steps.push_back(std::move(step));
  }
  return trace;
}

json serialize_trace(const InteractionTrace& trace) {
  json doc = json::object();
  doc["question"] = trace.query;
  doc["final_answer"] = trace.final_answer;
  if (trace.ground_truth) doc["ground_truth"] = *trace.ground_truth;
  json history = json::array();
  for (const auto& s : trace.steps) {
    history.push_back({{"name", s.name}, {"role", s.role}, {"content", s.content}});
  }
  doc["history"] = std::move(history);
  return doc;
}

LabeledCase parse_case(const json& document, std::string case_id,
                       Subset subset, const TraceParseOptions& options) {
  if (options.index_base != 0 && options.index_base != 1) {
    throw std::invalid_argument("index_base must be 0 or 1");
  }
  LabeledCase c;
  c.case_id = std::move(case_id);
  c.source = subset;
  c.trace = parse_trace(document);
  c.gold.mistake_agent =
      scalar_text(require(document, "mistake_agent", "$"), "$.mistake_agent");
  std::int64_t raw =
      step_number(require(document, "mistake_step", "$"), "$.mistake_step");
  std::int64_t zero_based = raw - options.index_base;
  if (zero_based < 0) {
    throw ParseError("$.mistake_step",
                     "step out of bounds: " + std::to_string(raw) +
                         " is below the index base " +
                         std::to_string(options.index_base));
  }
  c.gold.mistake_step = static_cast<std::size_t>(zero_based);
  c.gold.mistake_reason = optional_text(document, "mistake_reason", "$");
  return c;
}

json serialize_case(const LabeledCase& c, const TraceParseOptions& options) {
  json doc = serialize_trace(c.trace);
  doc["mistake_agent"] = c.gold.mistake_agent;
  doc["mistake_step"] =
      static_cast<std::int64_t>(c.gold.mistake_step) + options.index_base;
  doc["mistake_reason"] = c.gold.mistake_reason;
  return doc;
}

std::vector<std::string> validate_case(const LabeledCase& c) {
  std::vector<std::string> report;
  const auto& steps = c.trace.steps;
  if (c.case_id.empty()) report.emplace_back("empty case_id");
  if (steps.empty()) report.emplace_back("empty trace");
  for (std::size_t i = 0; i < steps.size(); ++i) {
    if (steps[i].index != i) {
      report.emplace_back("non-contiguous indices");
      break;
    }
  }
  for (std::size_t i = 0; i < steps.size(); ++i) {
    if (steps[i].name.empty()) {
      report.push_back("step " + std::to_string(i) + ": empty agent name");
    }
  }
  if (c.gold.mistake_step >= steps.size()) {
    report.push_back("step out of bounds: mistake_step " +
                     std::to_string(c.gold.mistake_step) + " >= n " +
                     std::to_string(steps.size()));
  }
  bool agent_found = std::any_of(steps.begin(), steps.end(), [&](const auto& s) {
    return s.name == c.gold.mistake_agent;
  });
  if (!agent_found) {
    report.push_back("mistake_agent '" + c.gold.mistake_agent +
                     "' not found in trace");
  }
  return report;
}

namespace {

std::vector<std::filesystem::path> case_files(const std::filesystem::path& root,
                                              Subset subset) {
  namespace fs = std::filesystem;
  std::vector<fs::path> files;
  const fs::path manifest = root / "manifest.json";
  if (fs::exists(manifest)) {
    json m = json::parse(read_file(manifest));
    for (const char* key : {"hand_crafted", "Hand-Crafted", "algorithm_generated",
                            "Algorithm-Generated"}) {
      auto it = m.find(key);
      if (it == m.end() || parse_subset(key) != subset) continue;
      for (const auto& rel : *it) files.push_back(rel.get<std::string>());
    }
    return files;
  }
  const std::vector<std::string> dirs =
      subset == Subset::hand_crafted
          ? std::vector<std::string>{"hand_crafted", "Hand-Crafted"}
          : std::vector<std::string>{"algorithm_generated", "Algorithm-Generated"};
  for (const auto& d : dirs) {
    fs::path dir = root / d;
    if (!fs::is_directory(dir)) continue;
    for (const auto& entry : fs::directory_iterator(dir)) {
      if (entry.is_regular_file() && entry.path().extension() == ".json") {
        files.push_back(fs::relative(entry.path(), root));
      }
    }
  }
  std::sort(files.begin(), files.end());
  return files;
}

}  // namespace

Dataset load_dataset(const std::filesystem::path& root, Subset subset,
                     const TraceParseOptions& options) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(root)) {
    throw std::invalid_argument("dataset root is not a directory: " +
                                root.string());
  }
  Dataset ds;
  std::set<std::string> seen;
  for (const fs::path& rel : case_files(root, subset)) {
    const std::string source = rel.generic_string();
    auto reject = [&](std::string reason) {
      ds.report.rejections.push_back({source, std::move(reason)});
    };
    std::string case_id = rel.stem().string();
    if (seen.contains(case_id)) {
      reject("duplicate case_id '" + case_id + "'");
      continue;
    }
    LabeledCase c;
    try {
      json doc = json::parse(read_file(root / rel));
      c = parse_case(doc, case_id, subset, options);
    } catch (const json::exception& e) {
      reject(std::string("invalid JSON: ") + e.what());
      continue;
    } catch (const std::exception& e) {
      reject(e.what());
      continue;
    }
    auto problems = validate_case(c);
    if (!problems.empty()) {
      std::string reason;
      for (const auto& p : problems) {
        if (!reason.empty()) reason += "; ";
        reason += p;
      }
      reject(std::move(reason));
      continue;
    }
    seen.insert(case_id);
    ds.cases.push_back(std::move(c));
  }
  std::sort(ds.cases.begin(), ds.cases.end(),
            [](const auto& a, const auto& b) { return a.case_id < b.case_id; });
  return ds;
}

}  // namespace faultline
