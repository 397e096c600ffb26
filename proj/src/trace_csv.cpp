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

#include "modnet/trace_csv.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "modnet/errors.hpp"

namespace modnet {

std::string TraceLayout::header() const {
  std::string h = "chain,iteration,site";
  for (const auto& c : value_columns) h += "," + c;
  for (const auto& n : node_names) h += ",lw_" + n;
  h += ",total_lw,accepted";
  return h;
}

TraceLayout trace_layout(const ModuleNetwork& net) {
  TraceLayout layout;
  std::map<std::string, int> uses;
  for (NodeId i : net.unobserved()) {
    for (const auto& port : net.module(i).signature().outputs) ++uses[port.name];
  }
  for (NodeId i : net.unobserved()) {
    for (const auto& port : net.module(i).signature().outputs) {
      layout.value_columns.push_back(uses[port.name] > 1 ? net.name(i) + "." + port.name : port.name);
    }
  }
  for (NodeId i = 0; i < net.size(); ++i) layout.node_names.push_back(net.name(i));
  return layout;
}

std::string format_double(double v) {
  if (std::isinf(v)) return v < 0 ? "-inf" : "inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string format_value(const Value& v) {
  switch (v.kind()) {
    case ValueKind::DiscreteInt: return std::to_string(v.as_discrete());
    case ValueKind::Real: return format_double(v.as_real());
    case ValueKind::RealVector: {
      std::string s;
      for (double d : v.as_real_vector()) s += (s.empty() ? "" : " ") + format_double(d);
      return s;
    }
    case ValueKind::DiscreteVector: {
      std::string s;
      for (auto d : v.as_discrete_vector()) s += (s.empty() ? "" : " ") + std::to_string(d);
      return s;
    }
  }
  return {};
}

void write_trace_row(std::ostream& out, const ModuleNetwork& net, std::size_t chain, const ChainRecord& r) {
  out << chain << ',' << r.iteration << ',' << net.name(r.site);
  for (const auto& v : r.values) out << ',' << format_value(v);
  for (double w : r.node_log_weights) out << ',' << format_double(w);
  out << ',' << format_double(r.total_log_weight) << ',' << (r.accepted ? 1 : 0) << '\n';
}

std::size_t TraceTable::column(const std::string& name) const {
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] == name) return c;
  }
  throw ContractViolation("trace has no column '" + name + "'");
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

}  // namespace

TraceTable read_trace_csv(std::istream& in) {
  TraceTable t;
  std::string line;
  if (!std::getline(in, line)) throw ContractViolation("trace is empty");
  t.header = split(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto cells = split(line);
    if (cells.size() != t.header.size()) throw ContractViolation("trace row has the wrong number of cells");
    t.rows.push_back(std::move(cells));
  }
  return t;
}

}  // namespace modnet
