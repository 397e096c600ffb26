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

#include <functional>
#include <string>
#include <vector>

#include "modnet/module.hpp"

namespace modnet {

using ExactSampler = std::function<ModuleIO(const ModuleIO& inputs, Rng& rng)>;
/// Exact log p(z;x); -inf outside the support.
using ExactLogDensity = std::function<double(const ModuleIO& inputs, const ModuleIO& outputs)>;

/// Adapts a simulate/logpdf pair to the module contract. The resulting
/// module has empty AuxState and a deterministic regenerate.
ModulePtr wrap_exact(Signature signature, ExactSampler sampler, ExactLogDensity log_density,
                     std::string type_name = "exact");

ModulePtr bernoulli_module(double p, std::string output = "z");
ModulePtr categorical_module(std::vector<double> probs, std::string output = "z");
ModulePtr normal_module(double mean, double sd, std::string output = "z");

/// Discrete child with discrete parents. `rows` is indexed by the parents'
/// configuration in mixed radix, first input most significant; each row is a
/// distribution over the child's `rows[r].size()` values.
ModulePtr cpt_module(std::vector<std::string> input_names, std::vector<int> input_cardinalities,
                     std::vector<std::vector<double>> rows, std::string output = "z");

}  // namespace modnet
