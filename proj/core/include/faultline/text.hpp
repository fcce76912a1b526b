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

#ifndef FAULTLINE_TEXT_HPP_
#define FAULTLINE_TEXT_HPP_

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

// Small text helpers shared by the extraction layer and prompt rendering.
// Whitespace means the ASCII set " \t\n\v\f\r".
namespace faultline::text {

bool is_space(char c) noexcept;
bool is_blank(std::string_view s) noexcept;

std::string_view strip(std::string_view s) noexcept;

// Splits on runs of whitespace; no empty tokens.
std::vector<std::string_view> split_words(std::string_view s);

std::size_t word_count(std::string_view s);

// Joins runs of whitespace into single spaces and trims both ends.
std::string collapse_whitespace(std::string_view s);

// First `max_words` words joined by single spaces, with "..." appended
// directly (no space) when words were dropped.
std::string truncate_words(std::string_view s, std::size_t max_words);

// Splits on a literal separator, keeping empty pieces.
std::vector<std::string_view> split_on(std::string_view s, std::string_view sep);

std::size_t utf8_length(std::string_view s) noexcept;

// Longest prefix holding at most `max_chars` code points.
std::string_view utf8_prefix(std::string_view s, std::size_t max_chars) noexcept;

std::string to_lower(std::string_view s);

// Replaces every "{{name}}" with vars[name]. Unknown names are left as is.
template <typename Map>
std::string render_template(std::string_view tmpl, const Map& vars) {
  std::string out;
  out.reserve(tmpl.size());
  std::size_t pos = 0;
  while (pos < tmpl.size()) {
    std::size_t open = tmpl.find("{{", pos);
    if (open == std::string_view::npos) break;
    std::size_t close = tmpl.find("}}", open + 2);
    if (close == std::string_view::npos) break;
    std::string key(tmpl.substr(open + 2, close - open - 2));
    auto it = vars.find(key);
    out.append(tmpl.substr(pos, open - pos));
    if (it != vars.end()) {
      out.append(it->second);
    } else {
      out.append(tmpl.substr(open, close + 2 - open));
    }
    pos = close + 2;
  }
  out.append(tmpl.substr(pos));
  return out;
}

// 64-bit FNV-1a; stable across platforms, used to derive per-case seeds.
std::uint64_t fnv1a64(std::string_view s) noexcept;

std::string sha256_hex(std::string_view data);

}  // namespace faultline::text

#endif  // FAULTLINE_TEXT_HPP_
