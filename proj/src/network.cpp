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

#include "modnet/network.hpp"

#include <algorithm>
#include <set>

#include "modnet/errors.hpp"

namespace modnet {

ModuleNetwork ModuleNetwork::build(std::vector<NodeSpec> specs, const std::vector<EdgeSpec>& edges,
                                   const std::vector<ObservationSpec>& observations) {
  if (specs.empty()) throw NetworkError("network has no nodes");

  ModuleNetwork net;
  std::map<std::string, NodeId> ids;
  for (auto& spec : specs) {
    if (!spec.module) throw NetworkError("node '" + spec.name + "' has no module");
    if (!ids.emplace(spec.name, net.nodes_.size()).second) throw NetworkError("duplicate node '" + spec.name + "'");
    Node n;
    n.name = std::move(spec.name);
    n.module = std::move(spec.module);
    n.inputs.resize(n.module->signature().inputs.size());
    net.nodes_.push_back(std::move(n));
  }
  auto lookup = [&](const std::string& name, const char* role) {
    auto it = ids.find(name);
    if (it == ids.end()) throw NetworkError(std::string(role) + " references unknown node '" + name + "'");
    return it->second;
  };

  for (const auto& e : edges) {
    const NodeId src = lookup(e.source, "edge source");
    const NodeId dst = lookup(e.target, "edge target");
    const int out = net.nodes_[src].module->signature().output_index(e.source_port);
    if (out < 0) throw NetworkError("dangling port: '" + e.source + "' has no output '" + e.source_port + "'");
    const int in = net.nodes_[dst].module->signature().input_index(e.target_port);
    if (in < 0) throw NetworkError("dangling port: '" + e.target + "' has no input '" + e.target_port + "'");
    const auto& src_spec = net.nodes_[src].module->signature().outputs[static_cast<std::size_t>(out)];
    const auto& dst_spec = net.nodes_[dst].module->signature().inputs[static_cast<std::size_t>(in)];
    if (src_spec.kind != dst_spec.kind) {
      throw NetworkError("edge " + e.source + "." + e.source_port + " -> " + e.target + "." + e.target_port +
                         ": kind mismatch");
    }
    auto& slot = net.nodes_[dst].inputs[static_cast<std::size_t>(in)];
    if (slot) throw NetworkError("input '" + e.target + "." + e.target_port + "' bound twice");
    slot = Binding{src, static_cast<std::size_t>(out)};
  }

  std::vector<std::set<NodeId>> children(net.nodes_.size());
  for (NodeId i = 0; i < net.nodes_.size(); ++i) {
    const auto& n = net.nodes_[i];
    for (std::size_t p = 0; p < n.inputs.size(); ++p) {
      if (!n.inputs[p]) {
        throw NetworkError("dangling port: input '" + n.name + "." + n.module->signature().inputs[p].name +
                           "' is unbound");
      }
      children[n.inputs[p]->source].insert(i);
    }
  }
  for (NodeId i = 0; i < net.nodes_.size(); ++i) {
    net.nodes_[i].children.assign(children[i].begin(), children[i].end());
  }

  // Kahn's algorithm; ties resolved by declaration order.
  std::vector<std::size_t> indegree(net.nodes_.size(), 0);
  for (NodeId i = 0; i < net.nodes_.size(); ++i) indegree[i] = net.parents(i).size();
  std::set<NodeId> ready;
  for (NodeId i = 0; i < net.nodes_.size(); ++i) {
    if (indegree[i] == 0) ready.insert(i);
  }
  while (!ready.empty()) {
    const NodeId i = *ready.begin();
    ready.erase(ready.begin());
    net.order_.push_back(i);
    for (NodeId c : net.nodes_[i].children) {
      if (--indegree[c] == 0) ready.insert(c);
    }
  }
  if (net.order_.size() != net.nodes_.size()) throw NetworkError("cycle detected");

  for (const auto& obs : observations) {
    const NodeId i = lookup(obs.node, "observation");
    auto& n = net.nodes_[i];
    if (n.observed) throw NetworkError("node '" + obs.node + "' observed twice");
    const auto& ports = n.module->signature().outputs;
    ModuleIO z(ports.size());
    for (std::size_t p = 0; p < ports.size(); ++p) {
      auto it = obs.values.find(ports[p].name);
      if (it == obs.values.end()) {
        throw NetworkError("observation of '" + obs.node + "' lacks port '" + ports[p].name + "'");
      }
      z[p] = it->second;
    }
    if (obs.values.size() != ports.size()) {
      throw NetworkError("observation of '" + obs.node + "' names an unknown port");
    }
    try {
      check_schema(ports, z, "observation");
    } catch (const ContractViolation& err) {
      throw NetworkError("node '" + obs.node + "': " + err.what());
    }
    n.observed = true;
    n.outputs = std::move(z);
  }
  if (std::all_of(net.nodes_.begin(), net.nodes_.end(), [](const Node& n) { return n.observed; })) {
    throw NetworkError("every node is observed; nothing to infer");
  }
  return net;
}

const ModuleNetwork::Node& ModuleNetwork::node(NodeId i) const {
  if (i >= nodes_.size()) throw ContractViolation("node id " + std::to_string(i) + " out of range");
  return nodes_[i];
}

ModuleNetwork::Node& ModuleNetwork::node(NodeId i) {
  if (i >= nodes_.size()) throw ContractViolation("node id " + std::to_string(i) + " out of range");
  return nodes_[i];
}

NodeId ModuleNetwork::id_of(const std::string& name) const {
  for (NodeId i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].name == name) return i;
  }
  throw ContractViolation("no node named '" + name + "'");
}

std::vector<NodeId> ModuleNetwork::parents(NodeId i) const {
  std::set<NodeId> ps;
  for (const auto& b : node(i).inputs) {
    if (b) ps.insert(b->source);
  }
  return {ps.begin(), ps.end()};
}

std::vector<NodeId> ModuleNetwork::unobserved() const {
  std::vector<NodeId> out;
  for (NodeId i = 0; i < nodes_.size(); ++i) {
    if (!nodes_[i].observed) out.push_back(i);
  }
  return out;
}

void ModuleNetwork::initialize(Rng& rng, int max_retries) {
  for (int attempt = 0; attempt <= max_retries; ++attempt) {
    for (auto& n : nodes_) n.state.reset();
    bool degenerate = false;
    for (NodeId i : order_) {
      Node& n = nodes_[i];
      const ModuleIO x = inputs(i);
      if (n.observed) {
        Regeneration r = n.module->regenerate(x, n.outputs, rng);
        if (r.weight.is_impossible()) {
          degenerate = true;
          break;
        }
        n.state = std::move(r);
      } else {
        Simulation s = n.module->simulate(x, rng);
        n.outputs = std::move(s.outputs);
        n.state = Regeneration{s.weight, std::move(s.aux)};
      }
    }
    if (!degenerate) return;
  }
  for (auto& n : nodes_) n.state.reset();
  throw DegenerateTraceError("initialize: observed node has zero probability after " + std::to_string(max_retries) +
                             " retries");
}

bool ModuleNetwork::initialized() const noexcept {
  return std::all_of(nodes_.begin(), nodes_.end(), [](const Node& n) { return n.state.has_value(); });
}

ModuleIO ModuleNetwork::inputs(NodeId i) const {
  const Node& n = node(i);
  ModuleIO x;
  x.reserve(n.inputs.size());
  for (const auto& b : n.inputs) x.push_back(nodes_[b->source].outputs.at(b->source_port));
  return x;
}

ModuleIO ModuleNetwork::inputs_with(NodeId i, NodeId replaced, const ModuleIO& replacement) const {
  const Node& n = node(i);
  ModuleIO x;
  x.reserve(n.inputs.size());
  for (const auto& b : n.inputs) {
    x.push_back(b->source == replaced ? replacement.at(b->source_port) : nodes_[b->source].outputs.at(b->source_port));
  }
  return x;
}

LogWeight ModuleNetwork::lookup_log_weight(NodeId i) const {
  const Node& n = node(i);
  if (!n.state) throw ContractViolation("lookup_log_weight: node '" + n.name + "' is not initialized");
  return n.state->weight;
}

const AuxState& ModuleNetwork::aux_state(NodeId i) const {
  const Node& n = node(i);
  if (!n.state) throw ContractViolation("aux_state: node '" + n.name + "' is not initialized");
  return n.state->aux;
}

void ModuleNetwork::update_log_weight(NodeId i, Regeneration regen) { node(i).state = std::move(regen); }

void ModuleNetwork::set_outputs(NodeId i, ModuleIO z) {
  Node& n = node(i);
  if (n.observed) throw ContractViolation("set_outputs: node '" + n.name + "' is observed");
  check_schema(n.module->signature().outputs, z, "set_outputs");
  n.outputs = std::move(z);
}

LogWeight ModuleNetwork::total_log_weight() const {
  LogWeight total;
  for (NodeId i = 0; i < nodes_.size(); ++i) total += lookup_log_weight(i);
  return total;
}

}  // namespace modnet
