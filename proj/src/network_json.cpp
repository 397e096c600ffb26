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

#include "modnet/network_json.hpp"

#include <algorithm>

#include "modnet/apps/discrete_hmm.hpp"
#include "modnet/apps/outlier_regression.hpp"
#include "modnet/errors.hpp"
#include "modnet/exact.hpp"
#include "modnet/inverse.hpp"

namespace modnet {

using nlohmann::json;

void ModuleRegistry::add(std::string type, ModuleFactory factory) { factories_[std::move(type)] = std::move(factory); }

ModulePtr ModuleRegistry::make(const std::string& type, const json& params, BuildContext& ctx) const {
  auto it = factories_.find(type);
  if (it == factories_.end()) throw ConfigError("type", "unknown module type '" + type + "'");
  return it->second(params, ctx);
}

namespace {

template <class T>
T param(const json& params, const char* key, T fallback) {
  if (!params.is_object() || !params.contains(key)) return fallback;
  try {
    return params.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("params.") + key, e.what());
  }
}

template <class T>
T required(const json& params, const char* key) {
  if (!params.is_object() || !params.contains(key)) throw ConfigError(std::string("params.") + key, "missing");
  try {
    return params.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("params.") + key, e.what());
  }
}

Rng& need_rng(BuildContext& ctx) {
  if (!ctx.rng) throw ConfigError("", "module requires a random source at build time");
  return *ctx.rng;
}

apps::OutlierConstants outlier_constants(const BuildContext& ctx) {
  if (ctx.constants.is_null()) return {};
  try {
    return apps::constants_from_json(ctx.constants);
  } catch (const json::exception& e) {
    throw ConfigError("constants", e.what());
  }
}

std::pair<std::string, std::string> split_port(const std::string& ref, const std::string& field) {
  const auto dot = ref.find('.');
  if (dot == std::string::npos || dot == 0 || dot + 1 == ref.size()) {
    throw ConfigError(field, "expected 'node.port', got '" + ref + "'");
  }
  return {ref.substr(0, dot), ref.substr(dot + 1)};
}

}  // namespace

ModuleRegistry ModuleRegistry::with_builtins() {
  ModuleRegistry r;
  r.add("bernoulli", [](const json& p, BuildContext&) {
    return bernoulli_module(required<double>(p, "p"), param<std::string>(p, "output", "z"));
  });
  r.add("categorical", [](const json& p, BuildContext&) {
    return categorical_module(required<std::vector<double>>(p, "probs"), param<std::string>(p, "output", "z"));
  });
  r.add("normal", [](const json& p, BuildContext&) {
    return normal_module(required<double>(p, "mean"), required<double>(p, "sd"), param<std::string>(p, "output", "z"));
  });
  r.add("cpt", [](const json& p, BuildContext&) {
    std::vector<std::string> names;
    std::vector<int> cards;
    for (const auto& in : required<json>(p, "inputs")) {
      names.push_back(in.at("name").get<std::string>());
      cards.push_back(in.at("cardinality").get<int>());
    }
    return cpt_module(std::move(names), std::move(cards), required<std::vector<std::vector<double>>>(p, "rows"),
                      param<std::string>(p, "output", "z"));
  });
  r.add("inverse", [](const json& p, BuildContext& ctx) {
    auto spec = std::make_shared<const DiscreteModelSpec>(discrete_spec_from_json(required<json>(p, "model")));
    const auto n = param<std::uint64_t>(p, "train_samples", ctx.train_samples);
    auto inv = std::make_shared<const InverseNetwork>(
        train_inverse(*spec, n, param<double>(p, "smoothing", 1.0), need_rng(ctx)));
    return make_inverse_module(std::move(spec), std::move(inv));
  });
  r.add("discrete_hmm", [](const json& p, BuildContext& ctx) -> ModulePtr {
    apps::HmmConstants c = p.is_object() && p.contains("model") ? apps::hmm_constants_from_json(p.at("model"))
                                                                : apps::default_hmm_constants();
    return apps::build_hmm_module(std::move(c), param<std::size_t>(p, "particles", ctx.particles));
  });
  r.add("outlier_prior", [](const json& p, BuildContext& ctx) {
    const auto c = outlier_constants(ctx);
    return apps::build_module_a(param<std::uint64_t>(p, "train_samples", ctx.train_samples), need_rng(ctx),
                                c.switch_model, param<double>(p, "smoothing", 1.0));
  });
  r.add("outlier_regression", [](const json& p, BuildContext& ctx) -> ModulePtr {
    const auto c = outlier_constants(ctx);
    auto xs = p.is_object() && p.contains("covariates") ? required<std::vector<double>>(p, "covariates")
                                                        : apps::default_dataset().xs;
    return apps::build_module_b(std::move(xs), param<std::size_t>(p, "particles", ctx.particles), c.regression);
  });
  return r;
}

Value value_from_json(const json& j, ValueKind kind, const std::string& field) {
  auto integral = [](const json& e) { return e.is_number_integer(); };
  if (kind == ValueKind::DiscreteInt && !integral(j)) throw ConfigError(field, "expected an integer");
  if (kind == ValueKind::DiscreteVector && (!j.is_array() || !std::all_of(j.begin(), j.end(), integral))) {
    throw ConfigError(field, "expected an array of integers");
  }
  try {
    switch (kind) {
      case ValueKind::DiscreteInt: return Value::discrete(j.get<std::int64_t>());
      case ValueKind::Real: return Value::real(j.get<double>());
      case ValueKind::RealVector: return Value::real_vector(j.get<std::vector<double>>());
      case ValueKind::DiscreteVector: return Value::discrete_vector(j.get<std::vector<std::int64_t>>());
    }
  } catch (const json::exception& e) {
    throw ConfigError(field, std::string("expected ") + to_string(kind) + ": " + e.what());
  } catch (const ContractViolation& e) {
    throw ConfigError(field, e.what());
  }
  throw ConfigError(field, "unsupported value kind");
}

NetworkBlueprint blueprint_from_json(const json& doc, const ModuleRegistry& registry, BuildContext& ctx) {
  NetworkBlueprint bp;
  if (!doc.is_object() || !doc.contains("nodes") || !doc.at("nodes").is_array()) {
    throw ConfigError("nodes", "expected an array of nodes");
  }
  std::map<std::string, const ProbModule*> by_name;
  const auto& nodes = doc.at("nodes");
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    const std::string field = "nodes[" + std::to_string(k) + "]";
    const auto& n = nodes[k];
    if (!n.contains("id") || !n.at("id").is_string()) throw ConfigError(field + ".id", "missing or not a string");
    if (!n.contains("type") || !n.at("type").is_string()) throw ConfigError(field + ".type", "missing or not a string");
    const json params = n.value("params", json::object());
    ModulePtr module;
    try {
      module = registry.make(n.at("type").get<std::string>(), params, ctx);
    } catch (const ConfigError& e) {
      throw ConfigError(field + "." + e.field(), e.message());
    } catch (const ContractViolation& e) {
      throw ConfigError(field + ".params", e.what());
    }
    const std::string id = n.at("id").get<std::string>();
    by_name[id] = module.get();
    bp.nodes.push_back({id, std::move(module)});
  }

  if (doc.contains("edges")) {
    const auto& edges = doc.at("edges");
    for (std::size_t k = 0; k < edges.size(); ++k) {
      const std::string field = "edges[" + std::to_string(k) + "]";
      if (!edges[k].contains("from") || !edges[k].contains("to")) throw ConfigError(field, "needs 'from' and 'to'");
      auto [src, sport] = split_port(edges[k].at("from").get<std::string>(), field + ".from");
      auto [dst, dport] = split_port(edges[k].at("to").get<std::string>(), field + ".to");
      bp.edges.push_back({src, sport, dst, dport});
    }
  }

  if (doc.contains("observations")) {
    for (const auto& [node, ports] : doc.at("observations").items()) {
      const std::string field = "observations." + node;
      auto it = by_name.find(node);
      if (it == by_name.end()) throw ConfigError(field, "observation on nonexistent node");
      ObservationSpec obs{node, {}};
      const auto& sig = it->second->signature();
      for (const auto& [port, value] : ports.items()) {
        const int idx = sig.output_index(port);
        if (idx < 0) throw ConfigError(field + "." + port, "no such output port");
        obs.values.emplace(port,
                           value_from_json(value, sig.outputs[static_cast<std::size_t>(idx)].kind, field + "." + port));
      }
      bp.observations.push_back(std::move(obs));
    }
  }
  try {
    bp.instantiate();
  } catch (const NetworkError& e) {
    throw ConfigError("network", e.what());
  }
  return bp;
}

ModuleNetwork NetworkBlueprint::instantiate() const { return ModuleNetwork::build(nodes, edges, observations); }

}  // namespace modnet
