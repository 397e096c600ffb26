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

#include <concepts>
#include <cstddef>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "modnet/errors.hpp"
#include "modnet/module.hpp"

namespace modnet {

/// Full latent assignment v of a sequential model: one value per step plus
/// any non-sequential latents sampled exactly at the end.
struct SmcLatents {
  std::vector<Value> trajectory;
  std::vector<double> globals;

  friend bool operator==(const SmcLatents&, const SmcLatents&) = default;
};

/// Execution history w of one SMC or conditional SMC run.
///
/// Multinomial resampling happens before every step after the first, so the
/// weight of particle k at step t is its incremental log-likelihood alone.
struct ParticleSystem {
  std::size_t particles = 0;
  std::vector<std::vector<Value>> latents;          ///< [t][k]
  std::vector<std::vector<double>> log_weights;     ///< [t][k], unnormalized
  std::vector<std::vector<std::size_t>> ancestors;  ///< [t][k], parent at t-1; row 0 empty
  std::size_t selected = 0;
  std::optional<std::size_t> pinned_slot;  ///< set by conditional SMC
  double log_evidence = 0.0;                ///< log Z-hat

  std::size_t steps() const noexcept { return latents.size(); }
  /// Latent trajectory of final particle `k`, traced through the ancestry.
  std::vector<Value> lineage(std::size_t k) const;
};

/// What conditional SMC retained of the conditioning trajectory.
struct MetaInferenceRecord {
  std::vector<Value> retained_lineage;
  std::vector<std::size_t> slots;  ///< lineage slot per step
};

MetaInferenceRecord meta_inference_record(const ParticleSystem& ps);

/// sum_t [log_sum_exp(log_weights[t]) - log K], evaluated from the stored system.
double recompute_log_evidence(const ParticleSystem& ps);

nlohmann::json to_json(const ParticleSystem& ps);
nlohmann::json to_json(const Value& v);

/// A model p(v, z; x) whose latents factor into steps, each step followed by
/// an observation factor. `State` carries whatever sufficient statistics of
/// the latent prefix the observation factors need.
///
///   propose(s, t, x, rng)      draws latent t from its prior given the prefix
///   extend(s, t, x, z, v_t)    folds v_t into s, returns log p(z_t | prefix, x)
///   sample_globals(s, x, z, rng)  exact draw of non-sequential latents
///   sample_forward(x, rng)     joint draw (v, z) ~ p(v, z; x)
template <class M>
concept SequentialModel = requires(const M& m, typename M::State& s, const ModuleIO& x, const ModuleIO& z,
                                   const Value& latent, Rng& rng, std::size_t t) {
  typename M::State;
  requires std::copyable<typename M::State>;
  { m.signature() } -> std::convertible_to<const Signature&>;
  { m.num_steps(x, z) } -> std::convertible_to<std::size_t>;
  { m.initial_state(x) } -> std::same_as<typename M::State>;
  { m.propose(s, t, x, rng) } -> std::same_as<Value>;
  { m.extend(s, t, x, z, latent) } -> std::convertible_to<double>;
  { m.sample_globals(s, x, z, rng) } -> std::same_as<std::vector<double>>;
  { m.sample_forward(x, rng) } -> std::same_as<std::pair<SmcLatents, ModuleIO>>;
};

namespace detail {

inline double step_log_evidence(const std::vector<double>& w, std::size_t k) {
  return log_sum_exp(w) - std::log(static_cast<double>(k));
}

/// Shared SMC / conditional SMC sweep. With `pinned`, slot `*pin_slot` follows
/// pinned->trajectory and keeps its own ancestry.
template <SequentialModel M>
std::vector<typename M::State> sweep(const M& model, const ModuleIO& x, const ModuleIO& z, std::size_t k_particles,
                                     const SmcLatents* pinned, std::optional<std::size_t> pin_slot,
                                     ParticleSystem& ps, Rng& rng) {
  using State = typename M::State;
  if (k_particles < 1) throw ContractViolation("SMC requires at least one particle");
  const std::size_t steps = model.num_steps(x, z);
  if (pinned && pinned->trajectory.size() != steps) {
    throw ContractViolation("conditional SMC: trajectory length does not match the model");
  }

  ps = ParticleSystem{};
  ps.particles = k_particles;
  ps.pinned_slot = pin_slot;
  ps.latents.resize(steps);
  ps.log_weights.resize(steps);
  ps.ancestors.resize(steps);

  std::vector<State> states(k_particles, model.initial_state(x));
  std::vector<State> next;
  for (std::size_t t = 0; t < steps; ++t) {
    auto& latents = ps.latents[t];
    auto& weights = ps.log_weights[t];
    latents.resize(k_particles);
    weights.resize(k_particles);
    if (t > 0) {
      const auto& prev = ps.log_weights[t - 1];
      const bool dead = log_sum_exp(prev) == -std::numeric_limits<double>::infinity();
      auto& anc = ps.ancestors[t];
      anc.resize(k_particles);
      for (std::size_t k = 0; k < k_particles; ++k) {
        if (pin_slot && k == *pin_slot) {
          anc[k] = k;
        } else {
          anc[k] = dead ? uniform_index(rng, k_particles) : categorical_log(rng, prev);
        }
      }
      next.clear();
      next.reserve(k_particles);
      for (std::size_t k = 0; k < k_particles; ++k) next.push_back(states[anc[k]]);
      states.swap(next);
    }
    for (std::size_t k = 0; k < k_particles; ++k) {
      if (pin_slot && k == *pin_slot) {
        latents[k] = pinned->trajectory[t];
      } else {
        latents[k] = model.propose(states[k], t, x, rng);
      }
      weights[k] = model.extend(states[k], t, x, z, latents[k]);
    }
    ps.log_evidence += step_log_evidence(weights, k_particles);
  }
  return states;
}

}  // namespace detail

struct SmcResult {
  SmcLatents latents;
  ParticleSystem system;
};

/// Sequential Monte Carlo with prior proposals and multinomial resampling at
/// every step. The returned latents follow the final particle drawn in
/// proportion to its weight, completed by an exact draw of the globals.
/// A system whose weights all vanish at some step reports log Z-hat = -inf.
template <SequentialModel M>
SmcResult smc_run(const M& model, const ModuleIO& x, const ModuleIO& z, std::size_t k_particles, Rng& rng) {
  SmcResult out;
  auto states = detail::sweep(model, x, z, k_particles, nullptr, std::nullopt, out.system, rng);
  ParticleSystem& ps = out.system;
  if (ps.steps() > 0) {
    const auto& last = ps.log_weights.back();
    ps.selected = log_sum_exp(last) == -std::numeric_limits<double>::infinity() ? uniform_index(rng, k_particles)
                                                                                   : categorical_log(rng, last);
  }
  out.latents.trajectory = ps.lineage(ps.selected);
  out.latents.globals = model.sample_globals(states[ps.selected], x, z, rng);
  return out;
}

/// Conditional SMC: the meta-inference program for smc_run. One slot, drawn
/// uniformly and held fixed across steps, replays `v`; the other K-1
/// particles evolve as in smc_run. The pinned particle is the selected one.
template <SequentialModel M>
ParticleSystem csmc_run(const M& model, const ModuleIO& x, const ModuleIO& z, const SmcLatents& v,
                        std::size_t k_particles, Rng& rng) {
  if (k_particles < 1) throw ContractViolation("SMC requires at least one particle");
  const std::size_t slot = uniform_index(rng, k_particles);
  ParticleSystem ps;
  detail::sweep(model, x, z, k_particles, &v, slot, ps, rng);
  ps.selected = slot;
  return ps;
}

/// AuxState payload of an SMC-backed module: u = (v, w).
struct SmcAux {
  SmcLatents latents;
  ParticleSystem system;
};

/// Probabilistic module whose regenerate runs SMC and whose simulate runs the
/// forward model followed by conditional SMC. Both report lw = log Z-hat.
template <SequentialModel M>
class SmcModule final : public ProbModule {
 public:
  SmcModule(std::shared_ptr<const M> model, std::size_t particles, std::string name)
      : model_(std::move(model)), particles_(particles), name_(std::move(name)) {
    if (!model_) throw ContractViolation("SmcModule: null model");
    if (particles_ < 1) throw ContractViolation("SmcModule: at least one particle required");
  }

  const Signature& signature() const override { return model_->signature(); }
  std::string type_name() const override { return name_; }
  std::size_t particles() const noexcept { return particles_; }
  const M& model() const noexcept { return *model_; }

 protected:
  Simulation do_simulate(const ModuleIO& inputs, Rng& rng) const override {
    auto [v, z] = model_->sample_forward(inputs, rng);
    ParticleSystem ps = csmc_run(*model_, inputs, z, v, particles_, rng);
    LogWeight w(ps.log_evidence);
    return {std::move(z), w, AuxState(SmcAux{std::move(v), std::move(ps)})};
  }

  Regeneration do_regenerate(const ModuleIO& inputs, const ModuleIO& outputs, Rng& rng) const override {
    SmcResult r = smc_run(*model_, inputs, outputs, particles_, rng);
    LogWeight w(r.system.log_evidence);
    return {w, AuxState(SmcAux{std::move(r.latents), std::move(r.system)})};
  }

 private:
  std::shared_ptr<const M> model_;
  std::size_t particles_;
  std::string name_;
};

template <SequentialModel M>
std::shared_ptr<const SmcModule<M>> make_smc_module(std::shared_ptr<const M> model, std::size_t particles,
                                                    std::string name = "smc") {
  return std::make_shared<const SmcModule<M>>(std::move(model), particles, std::move(name));
}

}  // namespace modnet
