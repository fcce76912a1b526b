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

#include "faultline/patterns.hpp"

#include <array>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

#include <boost/regex.hpp>
#include <spdlog/spdlog.h>

#include "faultline/error.hpp"
#include "faultline/prompts.hpp"

namespace faultline {

std::string_view to_string(ContextType t) noexcept {
  switch (t) {
    case ContextType::handoff:
      return "handoff";
    case ContextType::decision_quality:
      return "decision_quality";
    case ContextType::error_propagation:
      return "error_propagation";
    case ContextType::general:
      return "general";
  }
  return "general";
}

ContextType parse_context_type(std::string_view s) {
  for (auto t : {ContextType::handoff, ContextType::decision_quality,
                 ContextType::error_propagation, ContextType::general}) {
    if (to_string(t) == s) return t;
  }
  throw std::invalid_argument("unknown context type: " + std::string(s));
}

std::string_view to_string(ExtractionLayer l) noexcept {
  switch (l) {
    case ExtractionLayer::key_decision:
      return "key_decision";
    case ExtractionLayer::summary:
      return "summary";
    case ExtractionLayer::milestone:
      return "milestone";
  }
  return "key_decision";
}

namespace {

constexpr std::size_t kTypes = 4;
constexpr std::size_t kLayers = 3;

constexpr std::array<ContextType, kTypes> kAllTypes{
    ContextType::handoff, ContextType::decision_quality,
    ContextType::error_propagation, ContextType::general};
constexpr std::array<ExtractionLayer, kLayers> kAllLayers{
    ExtractionLayer::key_decision, ExtractionLayer::summary,
    ExtractionLayer::milestone};

std::size_t slot(ContextType t, ExtractionLayer l) {
  return static_cast<std::size_t>(t) * kLayers + static_cast<std::size_t>(l);
}

}  // namespace

struct PatternTable::Impl {
  std::array<std::vector<std::string>, kTypes * kLayers> sources;
  std::array<std::vector<boost::regex>, kTypes * kLayers> compiled;
};

PatternTable::PatternTable(std::shared_ptr<const Impl> impl)
    : impl_(std::move(impl)) {}

PatternTable PatternTable::parse(std::string_view text) {
  auto impl = std::make_shared<Impl>();
  std::optional<std::size_t> current;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    std::size_t first = line.find_first_not_of(" \t");
    if (first == std::string_view::npos || line[first] == '#') continue;

    const std::string where = "line " + std::to_string(line_no);
    if (line[first] == '[') {
      std::size_t close = line.find(']', first);
      if (close == std::string_view::npos) throw ParseError(where, "unterminated section header");
      std::string_view name = line.substr(first + 1, close - first - 1);
      std::size_t dot = name.find('.');
      if (dot == std::string_view::npos) {
        throw ParseError(where, "section must be [context_type.layer]");
      }
      std::string_view type_name = name.substr(0, dot);
      std::string_view layer_name = name.substr(dot + 1);
      std::optional<ExtractionLayer> layer;
      for (auto l : kAllLayers) {
        if (to_string(l) == layer_name) layer = l;
      }
      if (!layer) throw ParseError(where, "unknown layer '" + std::string(layer_name) + "'");
      ContextType type;
      try {
        type = parse_context_type(type_name);
      } catch (const std::invalid_argument& e) {
        throw ParseError(where, e.what());
      }
      current = slot(type, *layer);
      continue;
    }
    if (!current) throw ParseError(where, "pattern outside of a section");
    std::string pattern(line.substr(first));
    try {
      impl->compiled[*current].emplace_back(
          pattern, boost::regex::perl | boost::regex::icase);
    } catch (const boost::regex_error& e) {
      throw ParseError(where, std::string("invalid pattern: ") + e.what());
    }
    impl->sources[*current].push_back(std::move(pattern));
  }
  return PatternTable(std::move(impl));
}

PatternTable PatternTable::load(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open pattern table " + file.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

const PatternTable& PatternTable::builtin() {
  static const PatternTable table = parse(detail::embedded_data("patterns"));
  return table;
}

std::span<const std::string> PatternTable::patterns(ContextType type,
                                                    ExtractionLayer layer) const {
  return impl_->sources[slot(type, layer)];
}

std::optional<std::string> PatternTable::first_capture(
    std::string_view content, ContextType type, ExtractionLayer layer) const {
  const auto& regexes = impl_->compiled[slot(type, layer)];
  for (std::size_t i = 0; i < regexes.size(); ++i) {
    boost::match_results<std::string_view::const_iterator> m;
    try {
      if (boost::regex_search(content.begin(), content.end(), m, regexes[i])) {
        return m.size() > 1 ? m[1].str() : m[0].str();
      }
    } catch (const std::runtime_error& e) {
      // Boost gives up on pathological backtracking; treat as no match.
      spdlog::warn("pattern {} of [{}.{}] abandoned: {}", i, to_string(type),
                   to_string(layer), e.what());
    }
  }
  return std::nullopt;
}

std::string PatternTable::serialize() const {
  std::string out;
  for (auto t : kAllTypes) {
    for (auto l : kAllLayers) {
      const auto& src = impl_->sources[slot(t, l)];
      if (src.empty()) continue;
      if (!out.empty()) out += "\n";
      out += "[" + std::string(to_string(t)) + "." + std::string(to_string(l)) + "]\n";
      for (const auto& p : src) out += p + "\n";
    }
  }
  return out;
}

}  // namespace faultline
