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

#include <cstdint>
#include <limits>
#include <string>
#include <variant>
#include <vector>

namespace modnet {

enum class ValueKind { DiscreteInt, Real, RealVector, DiscreteVector };

const char* to_string(ValueKind kind);

/// Datum flowing between modules. Real payloads are always finite.
class Value {
 public:
  using Payload = std::variant<std::int64_t, double, std::vector<double>, std::vector<std::int64_t>>;

  Value() : payload_(std::int64_t{0}) {}

  static Value discrete(std::int64_t v) { return Value(Payload(v)); }
  static Value real(double v);
  static Value real_vector(std::vector<double> v);
  static Value discrete_vector(std::vector<std::int64_t> v) { return Value(Payload(std::move(v))); }

  ValueKind kind() const noexcept { return static_cast<ValueKind>(payload_.index()); }

  /// Element count; 1 for scalars.
  std::size_t length() const noexcept;

  std::int64_t as_discrete() const;
  double as_real() const;
  const std::vector<double>& as_real_vector() const;
  const std::vector<std::int64_t>& as_discrete_vector() const;

  const Payload& payload() const noexcept { return payload_; }

  friend bool operator==(const Value&, const Value&) = default;

 private:
  explicit Value(Payload p) : payload_(std::move(p)) {}

  Payload payload_;
};

std::string to_string(const Value& v);

/// Natural-log importance weight. May be -inf (impossible trace); never NaN or +inf.
class LogWeight {
 public:
  constexpr LogWeight() = default;
  explicit LogWeight(double v);

  static constexpr LogWeight impossible() {
    LogWeight w;
    w.value_ = -std::numeric_limits<double>::infinity();
    return w;
  }

  constexpr double value() const noexcept { return value_; }
  constexpr bool is_impossible() const noexcept {
    return value_ == -std::numeric_limits<double>::infinity();
  }

  /// -inf absorbs finite summands.
  friend LogWeight operator+(LogWeight a, LogWeight b) { return LogWeight(a.value_ + b.value_); }
  LogWeight& operator+=(LogWeight o) { return *this = *this + o; }

  friend constexpr bool operator==(LogWeight, LogWeight) = default;
  friend constexpr auto operator<=>(LogWeight a, LogWeight b) { return a.value_ <=> b.value_; }

 private:
  double value_ = 0.0;
};

/// Declared shape of one port. `length` is checked for vector kinds when set.
struct PortSpec {
  std::string name;
  ValueKind kind = ValueKind::DiscreteInt;
  std::int64_t length = -1;
};

struct Signature {
  std::vector<PortSpec> inputs;
  std::vector<PortSpec> outputs;

  /// Index of the named port, or -1.
  int input_index(const std::string& name) const;
  int output_index(const std::string& name) const;
};

/// Port values in declaration order of the owning schema.
using ModuleIO = std::vector<Value>;

/// Throws ContractViolation unless `io` matches `ports` in count, kind and length.
void check_schema(const std::vector<PortSpec>& ports, const ModuleIO& io, const char* what);

}  // namespace modnet
