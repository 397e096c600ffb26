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
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "modnet/module.hpp"

namespace modnet {

/// One finite variable of a discrete model. `parents` index the combined
/// context: module inputs first, then the model's variables in order.
/// `cpt` rows are indexed by the parents' configuration in mixed radix,
/// first parent most significant.
struct DiscreteVariable {
  std::string name;
  int cardinality = 2;
  std::vector<std::size_t> parents;
  std::vector<std::vector<double>> cpt;
};

/// A finite Bayesian network p(u, z; x) with variables in topological order.
/// Variables listed in `outputs` form z; the rest are latents u.
struct DiscreteModelSpec {
  std::vector<std::string> input_names;
  std::vector<int> input_cardinalities;
  std::vector<DiscreteVariable> variables;
  std::vector<std::size_t> outputs;

  /// Throws ContractViolation on malformed structure or CPT rows that do not
  /// sum to 1 within 1e-12.
  void validate() const;

  std::size_t num_inputs() const noexcept { return input_cardinalities.size(); }
  int context_cardinality(std::size_t slot) const;
  std::vector<std::size_t> latents() const;
  bool is_output(std::size_t variable) const;

  /// log p(values; inputs). `values` holds one entry per variable.
  double log_joint(const std::vector<int>& inputs, const std::vector<int>& values) const;
  /// Forward sample of every variable.
  std::vector<int> sample(const std::vector<int>& inputs, Rng& rng) const;
};

/// q(u_k | conditioning) for one latent. `conditioning` indexes the combined
/// context (inputs, then variables): all inputs, all outputs, then the
/// latents sampled before this one.
struct InverseFactor {
  std::size_t variable = 0;
  std::size_t slot = 0;  ///< context slot of `variable`
  std::vector<std::size_t> conditioning;
  std::vector<int> conditioning_cardinalities;
  std::vector<std::vector<double>> table;

  std::size_t row_of(const std::vector<int>& context) const;
};

/// Bottom-up sampler for the latents of a DiscreteModelSpec. Factors are in
/// sampling order: reverse topological order of the latents.
struct InverseNetwork {
  std::vector<InverseFactor> factors;
  std::uint64_t training_samples = 0;
  double smoothing = 0.0;

  /// Every row sums to 1 within 1e-12 and has no zero entries.
  void validate() const;
};

/// Fits every factor by Laplace-smoothed conditional frequencies over
/// `n_samples` forward traces. Inputs, if any, are drawn uniformly.
InverseNetwork train_inverse(const DiscreteModelSpec& spec, std::uint64_t n_samples, double smoothing, Rng& rng);

/// Factors set to the model's exact conditionals by enumeration. Rows for
/// zero-probability contexts are uniform.
InverseNetwork exact_inverse(const DiscreteModelSpec& spec);

/// Factor structure shared by train_inverse and exact_inverse (tables empty).
InverseNetwork inverse_structure(const DiscreteModelSpec& spec);

/// AuxState payload: sampled latent values, one per variable (outputs included).
struct InverseAux {
  std::vector<int> values;
};

/// Module with regenerate(x, z) sampling u from the inverse network and
/// returning log p(u, z; x) - log q(u; x, z); simulate forward-samples and
/// scores the same ratio. Output ports are named after the output variables.
ModulePtr make_inverse_module(std::shared_ptr<const DiscreteModelSpec> spec,
                              std::shared_ptr<const InverseNetwork> inverse, std::string type_name = "inverse");

/// log q(latents; x, z) for a full assignment.
double inverse_log_density(const InverseNetwork& inv, const std::vector<int>& context);

nlohmann::json to_json(const InverseNetwork& inv);
InverseNetwork inverse_from_json(const nlohmann::json& j);

nlohmann::json to_json(const DiscreteModelSpec& spec);
DiscreteModelSpec discrete_spec_from_json(const nlohmann::json& j);

}  // namespace modnet
