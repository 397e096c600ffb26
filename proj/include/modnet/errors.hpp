// Copyright 2026 The modnet Authors
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

#pragma once

#include <stdexcept>
#include <string>

namespace modnet {

/// A caller broke a documented precondition: schema mismatch, observed MH
/// target, lookup on an uninitialized node, and so on.
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Inference produced a trace with zero probability where one was required.
class DegenerateTraceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid network structure: cycles, dangling ports, unknown nodes.
class NetworkError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed configuration document. `field` names the offending JSON path.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& what)
      : std::runtime_error(field.empty() ? what : field + ": " + what), field_(std::move(field)), message_(what) {}

  const std::string& field() const noexcept { return field_; }
  /// The description without the field prefix.
  const std::string& message() const noexcept { return message_; }

 private:
  std::string field_;
  std::string message_;
};

}  // namespace modnet
