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
#include <functional>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "modnet/network.hpp"

namespace modnet {

/// Shared inputs available to module factories while a network document is
/// loaded. `constants` holds the model-constants document (may be null).
struct BuildContext {
  Rng* rng = nullptr;
  std::size_t particles = 30;
  std::uint64_t train_samples = 100000;
  nlohmann::json constants;
};

using ModuleFactory = std::function<ModulePtr(const nlohmann::json& params, BuildContext& ctx)>;

/// Maps the "type" field of a node to a module factory.
class ModuleRegistry {
 public:
  void add(std::string type, ModuleFactory factory);
  bool contains(const std::string& type) const { return factories_.count(type) != 0; }
  ModulePtr make(const std::string& type, const nlohmann::json& params, BuildContext& ctx) const;

  /// bernoulli, categorical, normal, cpt, inverse, discrete_hmm,
  /// outlier_prior and outlier_regression.
  static ModuleRegistry with_builtins();

 private:
  std::map<std::string, ModuleFactory> factories_;
};

/// Parsed network document with its modules constructed. Modules are
/// immutable, so one blueprint can stamp out a network per chain.
struct NetworkBlueprint {
  std::vector<NodeSpec> nodes;
  std::vector<EdgeSpec> edges;
  std::vector<ObservationSpec> observations;

  ModuleNetwork instantiate() const;
};

/// Reads
///   { "nodes": [{"id": ..., "type": ..., "params": {...}}],
///     "edges": [{"from": "node.port", "to": "node.port"}],
///     "observations": {"node": {"port": value}} }
/// Throws ConfigError naming the offending field.
NetworkBlueprint blueprint_from_json(const nlohmann::json& doc, const ModuleRegistry& registry, BuildContext& ctx);

/// Decodes `j` as a value of the given kind.
Value value_from_json(const nlohmann::json& j, ValueKind kind, const std::string& field);

}  // namespace modnet
