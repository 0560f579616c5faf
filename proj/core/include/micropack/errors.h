// Copyright 2026 The Micropack Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef MICROPACK_ERRORS_H_
#define MICROPACK_ERRORS_H_

#include <stdexcept>
#include <string>

namespace micropack {

// A caller-supplied value violates a documented precondition or type
// invariant (bad model shape, empty batch, zero-length slice, ...).
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Malformed external input. `where` is a line number ("line 3") for length
// manifests or a JSON pointer ("/cluster/dp") for config and plan files.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::string where, const std::string& what)
      : std::runtime_error(where + ": " + what), where_(std::move(where)) {}

  const std::string& where() const { return where_; }

 private:
  std::string where_;
};

// The request is well formed but no plan satisfies it (memory budget,
// DP-Merge group size, more packs than slicing units).
class Infeasible : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An internal consistency check failed. Always a bug.
class InvariantViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace micropack

#endif  // MICROPACK_ERRORS_H_
