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

#include "modnet/module.hpp"

#include <atomic>

namespace modnet {

namespace {
std::atomic<std::uint64_t> next_sequence{1};
}

void ProbModule::stamp(AuxState& aux) { aux.sequence_ = next_sequence.fetch_add(1, std::memory_order_relaxed); }

Simulation ProbModule::simulate(const ModuleIO& inputs, Rng& rng) const {
  check_schema(signature().inputs, inputs, "simulate inputs");
  Simulation sim = do_simulate(inputs, rng);
  check_schema(signature().outputs, sim.outputs, "simulate outputs");
  stamp(sim.aux);
  return sim;
}

Regeneration ProbModule::regenerate(const ModuleIO& inputs, const ModuleIO& outputs, Rng& rng) const {
  check_schema(signature().inputs, inputs, "regenerate inputs");
  check_schema(signature().outputs, outputs, "regenerate outputs");
  Regeneration regen = do_regenerate(inputs, outputs, rng);
  stamp(regen.aux);
  return regen;
}

}  // namespace modnet
