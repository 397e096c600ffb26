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

#include "modnet/exact.hpp"

#include <cmath>
#include <limits>

#include "modnet/errors.hpp"

namespace modnet {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

class ExactModule final : public ProbModule {
 public:
  ExactModule(Signature sig, ExactSampler sampler, ExactLogDensity density, std::string name)
      : sig_(std::move(sig)), sampler_(std::move(sampler)), density_(std::move(density)), name_(std::move(name)) {}

  const Signature& signature() const override { return sig_; }
  std::string type_name() const override { return name_; }

 protected:
  Simulation do_simulate(const ModuleIO& inputs, Rng& rng) const override {
    ModuleIO z = sampler_(inputs, rng);
    LogWeight w(density_(inputs, z));
    return {std::move(z), w, {}};
  }

  Regeneration do_regenerate(const ModuleIO& inputs, const ModuleIO& outputs, Rng&) const override {
    return {LogWeight(density_(inputs, outputs)), {}};
  }

 private:
  Signature sig_;
  ExactSampler sampler_;
  ExactLogDensity density_;
  std::string name_;
};

void check_distribution(const std::vector<double>& probs, const char* what) {
  if (probs.empty()) throw ContractViolation(std::string(what) + ": empty distribution");
  double total = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0) || !std::isfinite(p)) throw ContractViolation(std::string(what) + ": negative probability");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9) throw ContractViolation(std::string(what) + ": probabilities must sum to 1");
}

double log_prob_at(const std::vector<double>& probs, std::int64_t k) {
  if (k < 0 || k >= static_cast<std::int64_t>(probs.size())) return kNegInf;
  return std::log(probs[static_cast<std::size_t>(k)]);
}

}  // namespace

ModulePtr wrap_exact(Signature signature, ExactSampler sampler, ExactLogDensity log_density, std::string type_name) {
  return std::make_shared<ExactModule>(std::move(signature), std::move(sampler), std::move(log_density),
                                       std::move(type_name));
}

ModulePtr bernoulli_module(double p, std::string output) {
  if (!(p >= 0.0 && p <= 1.0)) throw ContractViolation("bernoulli_module: p outside [0, 1]");
  Signature sig{{}, {{std::move(output), ValueKind::DiscreteInt}}};
  return wrap_exact(
      std::move(sig), [p](const ModuleIO&, Rng& rng) { return ModuleIO{Value::discrete(bernoulli(rng, p) ? 1 : 0)}; },
      [p](const ModuleIO&, const ModuleIO& z) {
        switch (z[0].as_discrete()) {
          case 1: return std::log(p);
          case 0: return std::log(1.0 - p);
          default: return kNegInf;
        }
      },
      "bernoulli");
}

ModulePtr categorical_module(std::vector<double> probs, std::string output) {
  check_distribution(probs, "categorical_module");
  Signature sig{{}, {{std::move(output), ValueKind::DiscreteInt}}};
  return wrap_exact(
      std::move(sig),
      [probs](const ModuleIO&, Rng& rng) {
        return ModuleIO{Value::discrete(static_cast<std::int64_t>(categorical(rng, probs)))};
      },
      [probs](const ModuleIO&, const ModuleIO& z) { return log_prob_at(probs, z[0].as_discrete()); }, "categorical");
}

ModulePtr normal_module(double mean, double sd, std::string output) {
  if (!(sd > 0.0)) throw ContractViolation("normal_module: sd must be positive");
  Signature sig{{}, {{std::move(output), ValueKind::Real}}};
  return wrap_exact(
      std::move(sig), [mean, sd](const ModuleIO&, Rng& rng) { return ModuleIO{Value::real(normal(rng, mean, sd))}; },
      [mean, sd](const ModuleIO&, const ModuleIO& z) { return log_normal_pdf(z[0].as_real(), mean, sd); }, "normal");
}

ModulePtr cpt_module(std::vector<std::string> input_names, std::vector<int> input_cardinalities,
                     std::vector<std::vector<double>> rows, std::string output) {
  if (input_names.size() != input_cardinalities.size()) {
    throw ContractViolation("cpt_module: one cardinality per input required");
  }
  std::size_t expected_rows = 1;
  for (int c : input_cardinalities) {
    if (c < 1) throw ContractViolation("cpt_module: cardinalities must be positive");
    expected_rows *= static_cast<std::size_t>(c);
  }
  if (rows.size() != expected_rows) {
    throw ContractViolation("cpt_module: expected " + std::to_string(expected_rows) + " rows");
  }
  for (const auto& row : rows) check_distribution(row, "cpt_module");

  Signature sig;
  for (auto& name : input_names) sig.inputs.push_back({std::move(name), ValueKind::DiscreteInt});
  sig.outputs.push_back({std::move(output), ValueKind::DiscreteInt});

  // Returns -1 for parent values outside their domain.
  auto row_of = [cards = input_cardinalities](const ModuleIO& x) -> std::int64_t {
    std::int64_t r = 0;
    for (std::size_t i = 0; i < cards.size(); ++i) {
      const std::int64_t v = x[i].as_discrete();
      if (v < 0 || v >= cards[i]) return -1;
      r = r * cards[i] + v;
    }
    return r;
  };
  return wrap_exact(
      std::move(sig),
      [rows, row_of](const ModuleIO& x, Rng& rng) {
        const std::int64_t r = row_of(x);
        if (r < 0) throw ContractViolation("cpt_module: parent value outside its domain");
        return ModuleIO{Value::discrete(static_cast<std::int64_t>(categorical(rng, rows[static_cast<std::size_t>(r)])))};
      },
      [rows, row_of](const ModuleIO& x, const ModuleIO& z) {
        const std::int64_t r = row_of(x);
        if (r < 0) return kNegInf;
        return log_prob_at(rows[static_cast<std::size_t>(r)], z[0].as_discrete());
      },
      "cpt");
}

}  // namespace modnet
