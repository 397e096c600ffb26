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

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "modnet/mh.hpp"

namespace modnet {

inline constexpr const char* kTraceSchema = "modnet-trace/1";

/// Column layout for a network's trace:
///   chain,iteration,site,<value columns>,lw_<node>...,total_lw,accepted
/// A value column is named after its port, or "node.port" when two
/// unobserved nodes share a port name.
struct TraceLayout {
  std::vector<std::string> value_columns;
  std::vector<std::string> node_names;

  std::string header() const;
};

TraceLayout trace_layout(const ModuleNetwork& net);

/// Shortest round-trip decimal for finite values; "-inf" for impossible weights.
std::string format_double(double v);
std::string format_value(const Value& v);

void write_trace_row(std::ostream& out, const ModuleNetwork& net, std::size_t chain, const ChainRecord& r);

/// A parsed trace file, cells kept as text.
struct TraceTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Throws ContractViolation if absent.
  std::size_t column(const std::string& name) const;
};

TraceTable read_trace_csv(std::istream& in);

}  // namespace modnet
