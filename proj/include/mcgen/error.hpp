// Copyright 2026 The mcgen Authors
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

#ifndef MCGEN_ERROR_HPP_
#define MCGEN_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace mcgen {

// Raised for invalid inputs, unparseable files, and contract violations the
// caller can fix. The CLI maps this to exit code 1. Messages start with the
// stage that rejected the input.
class ValidationError : public std::runtime_error {
 public:
  ValidationError(const std::string& stage, const std::string& message)
      : std::runtime_error(stage + ": " + message) {}
};

// Raised when an internal invariant breaks (a bug, not a user error).
// The CLI maps this to exit code 2.
class InternalError : public std::logic_error {
 public:
  explicit InternalError(const std::string& message)
      : std::logic_error(message) {}
};

}  // namespace mcgen

#endif  // MCGEN_ERROR_HPP_
