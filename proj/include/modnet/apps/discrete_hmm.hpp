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

#include <memory>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "modnet/smc.hpp"

namespace modnet::apps {

/// Hidden Markov model with a discrete regime input. Small enough that p(z; a)
/// can be enumerated, which makes it the reference model for checking the SMC
/// engine's statistical identities.
struct HmmConstants {
  std::vector<std::vector<double>> initial;     ///< [a][state]
  std::vector<std::vector<double>> transition;  ///< [state][state]
  std::vector<std::vector<double>> emission;    ///< [state][symbol]
  std::size_t length = 0;                       ///< observations per sequence

  void validate() const;
  std::size_t states() const noexcept { return transition.size(); }
  std::size_t symbols() const noexcept { return emission.empty() ? 0 : emission.front().size(); }
};

/// Three states, three symbols, two regimes, six steps.
HmmConstants default_hmm_constants();
/// An observation sequence for default_hmm_constants().
std::vector<std::int64_t> default_hmm_observations();

HmmConstants hmm_constants_from_json(const nlohmann::json& j);

class DiscreteHmmModel {
 public:
  struct State {
    std::int64_t last = -1;
  };

  explicit DiscreteHmmModel(HmmConstants constants);

  const Signature& signature() const noexcept { return sig_; }
  const HmmConstants& constants() const noexcept { return c_; }

  std::size_t num_steps(const ModuleIO&, const ModuleIO&) const noexcept { return c_.length; }
  State initial_state(const ModuleIO&) const { return {}; }
  Value propose(State& s, std::size_t t, const ModuleIO& x, Rng& rng) const;
  double extend(State& s, std::size_t t, const ModuleIO& x, const ModuleIO& z, const Value& latent) const;
  std::vector<double> sample_globals(State&, const ModuleIO&, const ModuleIO&, Rng&) const { return {}; }
  std::pair<SmcLatents, ModuleIO> sample_forward(const ModuleIO& x, Rng& rng) const;

 private:
  const std::vector<double>& initial_row(const ModuleIO& x) const;

  HmmConstants c_;
  Signature sig_;
};

static_assert(SequentialModel<DiscreteHmmModel>);

/// Input "a", output "z" (discrete vector of length constants.length).
std::shared_ptr<const SmcModule<DiscreteHmmModel>> build_hmm_module(HmmConstants constants, std::size_t particles);

}  // namespace modnet::apps
