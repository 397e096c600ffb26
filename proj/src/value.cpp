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

#include "modnet/value.hpp"

#include <cmath>
#include <sstream>

#include "modnet/errors.hpp"

namespace modnet {

const char* to_string(ValueKind kind) {
  switch (kind) {
    case ValueKind::DiscreteInt: return "discrete";
    case ValueKind::Real: return "real";
    case ValueKind::RealVector: return "real_vector";
    case ValueKind::DiscreteVector: return "discrete_vector";
  }
  return "?";
}

Value Value::real(double v) {
  if (!std::isfinite(v)) throw ContractViolation("Value::real: non-finite payload");
  return Value(Payload(v));
}

Value Value::real_vector(std::vector<double> v) {
  for (double e : v) {
    if (!std::isfinite(e)) throw ContractViolation("Value::real_vector: non-finite element");
  }
  return Value(Payload(std::move(v)));
}

std::size_t Value::length() const noexcept {
  switch (kind()) {
    case ValueKind::RealVector: return std::get<std::vector<double>>(payload_).size();
    case ValueKind::DiscreteVector: return std::get<std::vector<std::int64_t>>(payload_).size();
    default: return 1;
  }
}

namespace {

template <class T>
const T& get_or_throw(const Value::Payload& p, ValueKind expected, ValueKind actual) {
  if (const T* v = std::get_if<T>(&p)) return *v;
  throw ContractViolation(std::string("Value: expected ") + to_string(expected) + ", got " + to_string(actual));
}

}  // namespace

std::int64_t Value::as_discrete() const {
  return get_or_throw<std::int64_t>(payload_, ValueKind::DiscreteInt, kind());
}

double Value::as_real() const { return get_or_throw<double>(payload_, ValueKind::Real, kind()); }

const std::vector<double>& Value::as_real_vector() const {
  return get_or_throw<std::vector<double>>(payload_, ValueKind::RealVector, kind());
}

const std::vector<std::int64_t>& Value::as_discrete_vector() const {
  return get_or_throw<std::vector<std::int64_t>>(payload_, ValueKind::DiscreteVector, kind());
}

std::string to_string(const Value& v) {
  std::ostringstream os;
  os.precision(17);
  switch (v.kind()) {
    case ValueKind::DiscreteInt: os << v.as_discrete(); break;
    case ValueKind::Real: os << v.as_real(); break;
    case ValueKind::RealVector: {
      os << '[';
      const auto& xs = v.as_real_vector();
      for (std::size_t i = 0; i < xs.size(); ++i) os << (i ? " " : "") << xs[i];
      os << ']';
      break;
    }
    case ValueKind::DiscreteVector: {
      os << '[';
      const auto& xs = v.as_discrete_vector();
      for (std::size_t i = 0; i < xs.size(); ++i) os << (i ? " " : "") << xs[i];
      os << ']';
      break;
    }
  }
  return os.str();
}

LogWeight::LogWeight(double v) : value_(v) {
  if (std::isnan(v) || v == std::numeric_limits<double>::infinity()) {
    throw ContractViolation("LogWeight: NaN or +inf");
  }
}

int Signature::input_index(const std::string& name) const {
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    if (inputs[i].name == name) return static_cast<int>(i);
  }
  return -1;
}

int Signature::output_index(const std::string& name) const {
  for (std::size_t i = 0; i < outputs.size(); ++i) {
    if (outputs[i].name == name) return static_cast<int>(i);
  }
  return -1;
}

void check_schema(const std::vector<PortSpec>& ports, const ModuleIO& io, const char* what) {
  if (ports.size() != io.size()) {
    throw ContractViolation(std::string(what) + ": expected " + std::to_string(ports.size()) + " values, got " +
                            std::to_string(io.size()));
  }
  for (std::size_t i = 0; i < ports.size(); ++i) {
    if (io[i].kind() != ports[i].kind) {
      throw ContractViolation(std::string(what) + ": port '" + ports[i].name + "' expects " +
                              to_string(ports[i].kind) + ", got " + to_string(io[i].kind()));
    }
    if (ports[i].length >= 0 && static_cast<std::int64_t>(io[i].length()) != ports[i].length) {
      throw ContractViolation(std::string(what) + ": port '" + ports[i].name + "' expects length " +
                              std::to_string(ports[i].length));
    }
  }
}

}  // namespace modnet
