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

#ifndef FAULTLINE_ERROR_HPP_
#define FAULTLINE_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace faultline {

// Malformed input document. The message names the offending JSON path.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::string path, const std::string& what)
      : std::runtime_error(path.empty() ? what : path + ": " + what),
        path_(std::move(path)) {}

  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

// Well-formed input that violates a domain invariant.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A completion backend could not produce a response.
class ProviderError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Replay backend has no recorded response for a request.
class FixtureMissError : public ProviderError {
 public:
  explicit FixtureMissError(std::string digest)
      : ProviderError("no recorded fixture for request digest " + digest),
        digest_(std::move(digest)) {}

  const std::string& digest() const noexcept { return digest_; }

 private:
  std::string digest_;
};

}  // namespace faultline

#endif  // FAULTLINE_ERROR_HPP_
