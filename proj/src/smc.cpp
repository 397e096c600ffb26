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

#include "modnet/smc.hpp"

namespace modnet {

std::vector<Value> ParticleSystem::lineage(std::size_t k) const {
  std::vector<Value> out(steps());
  for (std::size_t t = steps(); t-- > 0;) {
    out[t] = latents[t].at(k);
    if (t > 0) k = ancestors[t].at(k);
  }
  return out;
}

MetaInferenceRecord meta_inference_record(const ParticleSystem& ps) {
  if (!ps.pinned_slot) throw ContractViolation("meta_inference_record: system was not produced by conditional SMC");
  MetaInferenceRecord rec;
  rec.retained_lineage = ps.lineage(*ps.pinned_slot);
  rec.slots.assign(ps.steps(), *ps.pinned_slot);
  return rec;
}

double recompute_log_evidence(const ParticleSystem& ps) {
  double total = 0.0;
  for (const auto& w : ps.log_weights) total += detail::step_log_evidence(w, ps.particles);
  return total;
}

nlohmann::json to_json(const Value& v) {
  switch (v.kind()) {
    case ValueKind::DiscreteInt: return v.as_discrete();
    case ValueKind::Real: return v.as_real();
    case ValueKind::RealVector: return v.as_real_vector();
    case ValueKind::DiscreteVector: return v.as_discrete_vector();
  }
  return nullptr;
}

nlohmann::json to_json(const ParticleSystem& ps) {
  nlohmann::json latents = nlohmann::json::array();
  for (const auto& row : ps.latents) {
    nlohmann::json r = nlohmann::json::array();
    for (const auto& v : row) r.push_back(to_json(v));
    latents.push_back(std::move(r));
  }
  // -inf weights are written as null.
  nlohmann::json weights = nlohmann::json::array();
  for (const auto& row : ps.log_weights) {
    nlohmann::json r = nlohmann::json::array();
    for (double w : row) r.push_back(std::isfinite(w) ? nlohmann::json(w) : nlohmann::json(nullptr));
    weights.push_back(std::move(r));
  }
  nlohmann::json out{
      {"particles", ps.particles},
      {"latents", std::move(latents)},
      {"log_weights", std::move(weights)},
      {"ancestors", ps.ancestors},
      {"selected", ps.selected},
      {"log_evidence", std::isfinite(ps.log_evidence) ? nlohmann::json(ps.log_evidence) : nlohmann::json(nullptr)},
  };
  if (ps.pinned_slot) out["pinned_slot"] = *ps.pinned_slot;
  return out;
}

}  // namespace modnet
