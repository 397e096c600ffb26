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
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "modnet/module.hpp"

namespace modnet {

using NodeId = std::size_t;

struct NodeSpec {
  std::string name;
  ModulePtr module;
};

/// Binds `source.source_port` (an output) to `target.target_port` (an input).
struct EdgeSpec {
  std::string source;
  std::string source_port;
  std::string target;
  std::string target_port;
};

/// Constrains every output port of `node`.
struct ObservationSpec {
  std::string node;
  std::map<std::string, Value> values;
};

/// A DAG of module instances with Bayesian-network semantics over module
/// outputs. Holds the current outputs z_i and the paired (log-weight, aux)
/// regeneration state of every node.
///
/// Not thread-safe; one chain owns one network.
class ModuleNetwork {
 public:
  /// Validates structure and computes the topological order and children.
  /// Throws NetworkError on cycles, unknown nodes or ports, unbound or doubly
  /// bound inputs, and when every node is observed.
  static ModuleNetwork build(std::vector<NodeSpec> nodes, const std::vector<EdgeSpec>& edges,
                             const std::vector<ObservationSpec>& observations);

  std::size_t size() const noexcept { return nodes_.size(); }
  NodeId id_of(const std::string& name) const;
  const std::string& name(NodeId i) const { return node(i).name; }
  const ProbModule& module(NodeId i) const { return *node(i).module; }

  const std::vector<NodeId>& topological_order() const noexcept { return order_; }
  /// c_i: distinct children of node i, ascending.
  const std::vector<NodeId>& children(NodeId i) const { return node(i).children; }
  /// Distinct parents of node i, ascending.
  std::vector<NodeId> parents(NodeId i) const;
  bool observed(NodeId i) const { return node(i).observed; }
  std::vector<NodeId> unobserved() const;

  /// Simulates unobserved nodes and regenerates observed ones in topological
  /// order. An observed node regenerating to -inf restarts the whole pass, up
  /// to `max_retries` times, after which DegenerateTraceError is thrown and
  /// the network is left uninitialized.
  void initialize(Rng& rng, int max_retries = 100);

  bool initialized() const noexcept;
  bool initialized(NodeId i) const { return node(i).state.has_value(); }

  const ModuleIO& outputs(NodeId i) const { return node(i).outputs; }
  /// x_i assembled from the current outputs of the parents.
  ModuleIO inputs(NodeId i) const;
  /// x_i with node `replaced` reading `replacement` instead of its current outputs.
  ModuleIO inputs_with(NodeId i, NodeId replaced, const ModuleIO& replacement) const;

  LogWeight lookup_log_weight(NodeId i) const;
  const AuxState& aux_state(NodeId i) const;
  /// Replaces the stored log-weight together with the aux state it was produced with.
  void update_log_weight(NodeId i, Regeneration regen);

  /// Overwrites the outputs of an unobserved node.
  void set_outputs(NodeId i, ModuleIO z);

  /// Sum of all stored log-weights.
  LogWeight total_log_weight() const;

 private:
  struct Binding {
    NodeId source;
    std::size_t source_port;
  };

  struct Node {
    std::string name;
    ModulePtr module;
    std::vector<std::optional<Binding>> inputs;
    std::vector<NodeId> children;
    bool observed = false;
    ModuleIO outputs;
    std::optional<Regeneration> state;
  };

  const Node& node(NodeId i) const;
  Node& node(NodeId i);

  std::vector<Node> nodes_;
  std::vector<NodeId> order_;
};

}  // namespace modnet
