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

#include <cmath>
#include <numeric>

#include <doctest.h>

#include "modnet/apps/discrete_hmm.hpp"
#include "modnet/oracle/enumeration.hpp"
#include "modnet/smc.hpp"

using namespace modnet;
using apps::DiscreteHmmModel;

namespace {

ModuleIO regime(std::int64_t a) { return {Value::discrete(a)}; }
ModuleIO observed() { return {Value::discrete_vector(apps::default_hmm_observations())}; }

oracle::FactoredDiscreteModel oracle_hmm(std::int64_t a) {
  const auto c = apps::default_hmm_constants();
  return oracle::hidden_markov_model(c.initial[static_cast<std::size_t>(a)], c.transition, c.emission, c.length);
}

oracle::Observation oracle_obs() {
  oracle::Observation obs;
  const auto z = apps::default_hmm_observations();
  for (std::size_t t = 0; t < z.size(); ++t) obs[2 * t + 1] = static_cast<int>(z[t]);
  return obs;
}

double exact_log_p(std::int64_t a) { return oracle::log_evidence(oracle_hmm(a), oracle_obs()); }

double log_lik(const std::vector<Value>& traj) {
  const auto c = apps::default_hmm_constants();
  const auto z = apps::default_hmm_observations();
  double s = 0.0;
  for (std::size_t t = 0; t < traj.size(); ++t) {
    s += std::log(c.emission[static_cast<std::size_t>(traj[t].as_discrete())][static_cast<std::size_t>(z[t])]);
  }
  return s;
}

/// Binary latents that each observation must copy exactly.
struct CopyModel {
  struct State {};
  std::size_t steps = 4;
  Signature sig{{}, {{"z", ValueKind::DiscreteVector, 4}}};

  const Signature& signature() const { return sig; }
  std::size_t num_steps(const ModuleIO&, const ModuleIO&) const { return steps; }
  State initial_state(const ModuleIO&) const { return {}; }
  Value propose(State&, std::size_t, const ModuleIO&, Rng& rng) const { return Value::discrete(bernoulli(rng, 0.5)); }
  double extend(State&, std::size_t t, const ModuleIO&, const ModuleIO& z, const Value& v) const {
    return z[0].as_discrete_vector()[t] == v.as_discrete() ? 0.0 : -INFINITY;
  }
  std::vector<double> sample_globals(State&, const ModuleIO&, const ModuleIO&, Rng&) const { return {}; }
  std::pair<SmcLatents, ModuleIO> sample_forward(const ModuleIO& x, Rng& rng) const {
    SmcLatents v;
    std::vector<std::int64_t> z;
    State s;
    for (std::size_t t = 0; t < steps; ++t) {
      v.trajectory.push_back(propose(s, t, x, rng));
      z.push_back(v.trajectory.back().as_discrete());
    }
    return {v, {Value::discrete_vector(z)}};
  }
};
static_assert(SequentialModel<CopyModel>);

}  // namespace

TEST_SUITE("smc") {
  TEST_CASE("Z-hat is unbiased for the enumerated evidence") {
    const DiscreteHmmModel model(apps::default_hmm_constants());
    for (std::int64_t a : {0, 1}) {
      const double log_p = exact_log_p(a);
      for (std::size_t k : {1, 5, 30}) {
        CAPTURE(a);
        CAPTURE(k);
        Rng rng(derive_seed(77, 10 * k + static_cast<std::size_t>(a)));
        const int n = 40000;
        double sum = 0.0;
        double sum2 = 0.0;
        for (int i = 0; i < n; ++i) {
          const double r = std::exp(smc_run(model, regime(a), observed(), k, rng).system.log_evidence - log_p);
          sum += r;
          sum2 += r * r;
        }
        const double mean = sum / n;
        const double se = std::sqrt((sum2 / n - mean * mean) / n);
        CHECK(std::abs(mean - 1.0) <= 4 * se);
      }
    }
  }

  TEST_CASE("one particle reduces to likelihood weighting") {
    const DiscreteHmmModel model(apps::default_hmm_constants());
    Rng rng(3);
    for (int i = 0; i < 200; ++i) {
      const auto r = smc_run(model, regime(i % 2), observed(), 1, rng);
      CHECK(r.system.log_evidence == doctest::Approx(log_lik(r.latents.trajectory)).epsilon(1e-12));
      const auto ps = csmc_run(model, regime(i % 2), observed(), r.latents, 1, rng);
      CHECK(ps.log_evidence == doctest::Approx(log_lik(r.latents.trajectory)).epsilon(1e-12));
    }
  }

  TEST_CASE("stored system reproduces its own evidence") {
    const DiscreteHmmModel model(apps::default_hmm_constants());
    Rng rng(4);
    for (std::size_t k : {1, 3, 30}) {
      const auto r = smc_run(model, regime(0), observed(), k, rng);
      CHECK(recompute_log_evidence(r.system) == doctest::Approx(r.system.log_evidence).epsilon(1e-13));
      CHECK(r.system.lineage(r.system.selected) == r.latents.trajectory);
      const auto ps = csmc_run(model, regime(0), observed(), r.latents, k, rng);
      CHECK(recompute_log_evidence(ps) == doctest::Approx(ps.log_evidence).epsilon(1e-13));
    }
  }

  TEST_CASE("conditional SMC pins one slot for the whole sweep") {
    const DiscreteHmmModel model(apps::default_hmm_constants());
    Rng rng(5);
    for (int i = 0; i < 50; ++i) {
      auto [v, z] = model.sample_forward(regime(1), rng);
      const auto ps = csmc_run(model, regime(1), z, v, 8, rng);
      REQUIRE(ps.pinned_slot.has_value());
      const std::size_t slot = *ps.pinned_slot;
      CHECK(ps.selected == slot);
      CHECK(ps.lineage(slot) == v.trajectory);
      for (std::size_t t = 1; t < ps.steps(); ++t) CHECK(ps.ancestors[t][slot] == slot);
      const auto rec = meta_inference_record(ps);
      CHECK(rec.retained_lineage == v.trajectory);
      CHECK(rec.slots == std::vector<std::size_t>(ps.steps(), slot));
    }
  }

  TEST_CASE("conditional SMC from the exact posterior gives E[1/Z-hat] = 1/p") {
    const DiscreteHmmModel model(apps::default_hmm_constants());
    const auto om = oracle_hmm(0);
    std::vector<std::size_t> hidden;
    for (std::size_t t = 0; t < 6; ++t) hidden.push_back(2 * t);
    const auto post = oracle::posterior(om, oracle_obs(), hidden);
    const double log_p = exact_log_p(0);
    Rng rng(6);
    for (std::size_t k : {2, 10}) {
      const int n = 40000;
      double sum = 0.0;
      double sum2 = 0.0;
      for (int i = 0; i < n; ++i) {
        const auto& cfg = post.configs[categorical(rng, post.probabilities)];
        SmcLatents v;
        for (int h : cfg) v.trajectory.push_back(Value::discrete(h));
        const double r = std::exp(log_p - csmc_run(model, regime(0), observed(), v, k, rng).log_evidence);
        sum += r;
        sum2 += r * r;
      }
      const double mean = sum / n;
      CHECK(std::abs(mean - 1.0) <= 4 * std::sqrt((sum2 / n - mean * mean) / n));
    }
  }

  TEST_CASE("Z-hat concentrates as particles grow") {
    const DiscreteHmmModel model(apps::default_hmm_constants());
    Rng rng(7);
    double mean = 0.0;
    for (int i = 0; i < 40; ++i) mean += smc_run(model, regime(1), observed(), 500, rng).system.log_evidence / 40;
    CHECK(mean == doctest::Approx(exact_log_p(1)).epsilon(5e-3));
  }

  TEST_CASE("a system with no surviving particle reports -inf") {
    const CopyModel model;
    const ModuleIO z{Value::discrete_vector({1, 0, 1, 1})};
    Rng rng(8);
    int dead = 0;
    double sum = 0.0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
      const auto r = smc_run(model, {}, z, 1, rng);
      if (r.system.log_evidence == -INFINITY) {
        ++dead;
        CHECK(recompute_log_evidence(r.system) == -INFINITY);
        CHECK(to_json(r.system)["log_evidence"].is_null());
      } else {
        CHECK(r.system.log_evidence == 0.0);
      }
      sum += std::exp(r.system.log_evidence);
    }
    CHECK(dead > 0);
    // 1/16 of single-particle runs survive
    CHECK(std::abs(sum / n - 1.0 / 16) <= 4 * std::sqrt((1.0 / 16) * (15.0 / 16) / n));
    // with every path in play the particles keep at least one match per step in practice
    const auto wide = smc_run(model, {}, z, 200, rng);
    CHECK(wide.latents.trajectory == std::vector<Value>{Value::discrete(1), Value::discrete(0), Value::discrete(1),
                                                        Value::discrete(1)});
  }

  TEST_CASE("SMC module weights are the particle system's evidence") {
    auto module = apps::build_hmm_module(apps::default_hmm_constants(), 7);
    Rng rng(9);
    const auto g = module->regenerate(regime(0), observed(), rng);
    const auto* aux = g.aux.get<SmcAux>();
    REQUIRE(aux != nullptr);
    CHECK(aux->system.particles == 7);
    CHECK(g.weight.value() == aux->system.log_evidence);
    const auto s = module->simulate(regime(1), rng);
    const auto* saux = s.aux.get<SmcAux>();
    REQUIRE(saux != nullptr);
    CHECK(saux->system.pinned_slot.has_value());
    CHECK(s.weight.value() == saux->system.log_evidence);
    CHECK(s.aux.sequence() > g.aux.sequence());
  }

  TEST_CASE("particle system serializes its history") {
    const DiscreteHmmModel model(apps::default_hmm_constants());
    Rng rng(10);
    const auto r = smc_run(model, regime(0), observed(), 4, rng);
    const auto j = to_json(r.system);
    CHECK(j["particles"] == 4);
    CHECK(j["latents"].size() == 6);
    CHECK(j["log_weights"][0].size() == 4);
    CHECK(j["ancestors"][0].empty());
    CHECK(j["ancestors"][1].size() == 4);
    CHECK(j["log_evidence"].get<double>() == r.system.log_evidence);
    CHECK_FALSE(j.contains("pinned_slot"));
  }

  TEST_CASE("contract checks") {
    const DiscreteHmmModel model(apps::default_hmm_constants());
    Rng rng(11);
    CHECK_THROWS_AS(smc_run(model, regime(0), observed(), 0, rng), ContractViolation);
    SmcLatents short_v{{Value::discrete(0)}, {}};
    CHECK_THROWS_AS(csmc_run(model, regime(0), observed(), short_v, 3, rng), ContractViolation);
    CHECK_THROWS_AS(apps::build_hmm_module(apps::default_hmm_constants(), 0), ContractViolation);
  }
}
