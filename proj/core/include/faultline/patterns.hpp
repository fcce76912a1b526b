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

#ifndef FAULTLINE_PATTERNS_HPP_
#define FAULTLINE_PATTERNS_HPP_

#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>

namespace faultline {

enum class ContextType { handoff, decision_quality, error_propagation, general };

std::string_view to_string(ContextType t) noexcept;
// Throws std::invalid_argument for unknown names.
ContextType parse_context_type(std::string_view s);

// Which compressed layer a pattern section feeds.
enum class ExtractionLayer { key_decision, summary, milestone };

std::string_view to_string(ExtractionLayer l) noexcept;

// Ordered regex lists per (context type, layer), loaded from the
// pattern-table text format (see data/patterns.txt). Immutable once built
// and safe to share across threads.
class PatternTable {
 public:
  // Throws ParseError ("line N") on unknown sections or bad regexes.
  static PatternTable parse(std::string_view text);
  static PatternTable load(const std::filesystem::path& file);
  // The shipped tables.
  static const PatternTable& builtin();

  std::span<const std::string> patterns(ContextType type,
                                        ExtractionLayer layer) const;

  // First capture group of the first pattern (in table order) that matches
  // anywhere in `content`, case-insensitively.
  std::optional<std::string> first_capture(std::string_view content,
                                           ContextType type,
                                           ExtractionLayer layer) const;

  std::string serialize() const;

 private:
  struct Impl;
  explicit PatternTable(std::shared_ptr<const Impl> impl);
  std::shared_ptr<const Impl> impl_;
};

}  // namespace faultline

#endif  // FAULTLINE_PATTERNS_HPP_
