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

#include "modnet/inverse.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "modnet/errors.hpp"

namespace modnet {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr std::size_t kMaxConfigurations = std::size_t{1} << 20;

std::size_t mixed_radix(const std::vector<std::size_t>& slots, const std::vector<int>& cards,
                        const std::vector<int>& context) {
  std::size_t r = 0;
  for (std::size_t i = 0; i < slots.size(); ++i) {
    r = r * static_cast<std::size_t>(cards[i]) + static_cast<std::size_t>(context[slots[i]]);
  }
  return r;
}

std::size_t product(const std::vector<int>& cards) {
  std::size_t n = 1;
  for (int c : cards) {
    n *= static_cast<std::size_t>(c);
    if (n > kMaxConfigurations) throw ContractViolation("discrete model: configuration space too large");
  }
  return n;
}

/// Advances `values` through all assignments of `cards`; false after the last.
bool next_assignment(std::vector<int>& values, const std::vector<int>& cards) {
  for (std::size_t i = values.size(); i-- > 0;) {
    if (++values[i] < cards[i]) return true;
    values[i] = 0;
  }
  return false;
}

}  // namespace

int DiscreteModelSpec::context_cardinality(std::size_t slot) const {
  if (slot < num_inputs()) return input_cardinalities[slot];
  return variables.at(slot - num_inputs()).cardinality;
}

bool DiscreteModelSpec::is_output(std::size_t variable) const {
  return std::find(outputs.begin(), outputs.end(), variable) != outputs.end();
}

std::vector<std::size_t> DiscreteModelSpec::latents() const {
  std::vector<std::size_t> out;
  for (std::size_t v = 0; v < variables.size(); ++v) {
    if (!is_output(v)) out.push_back(v);
  }
  return out;
}

void DiscreteModelSpec::validate() const {
  if (input_names.size() != input_cardinalities.size()) {
    throw ContractViolation("discrete model: one cardinality per input required");
  }
  for (int c : input_cardinalities) {
    if (c < 1) throw ContractViolation("discrete model: input cardinality must be positive");
  }
  if (outputs.empty()) throw ContractViolation("discrete model: no output variables");
  for (std::size_t o : outputs) {
    if (o >= variables.size()) throw ContractViolation("discrete model: output index out of range");
  }
  for (std::size_t v = 0; v < variables.size(); ++v) {
    const auto& var = variables[v];
    if (var.cardinality < 1) throw ContractViolation("discrete model: '" + var.name + "' has no values");
    std::size_t rows = 1;
    for (std::size_t p : var.parents) {
      if (p >= num_inputs() + v) {
        throw ContractViolation("discrete model: '" + var.name + "' has a parent that is not earlier in order");
      }
      rows *= static_cast<std::size_t>(context_cardinality(p));
    }
    if (var.cpt.size() != rows) {
      throw ContractViolation("discrete model: '" + var.name + "' needs " + std::to_string(rows) + " CPT rows");
    }
    for (const auto& row : var.cpt) {
      if (row.size() != static_cast<std::size_t>(var.cardinality)) {
        throw ContractViolation("discrete model: '" + var.name + "' CPT row has wrong width");
      }
      double total = 0.0;
      for (double p : row) {
        if (!(p >= 0.0)) throw ContractViolation("discrete model: negative probability in '" + var.name + "'");
        total += p;
      }
      if (std::abs(total - 1.0) > 1e-12) {
        throw ContractViolation("discrete model: CPT row of '" + var.name + "' does not sum to 1");
      }
    }
  }
}

namespace {

std::size_t cpt_row(const DiscreteModelSpec& spec, const DiscreteVariable& var, const std::vector<int>& context) {
  std::size_t r = 0;
  for (std::size_t p : var.parents) {
    r = r * static_cast<std::size_t>(spec.context_cardinality(p)) + static_cast<std::size_t>(context[p]);
  }
  return r;
}

std::vector<int> make_context(const std::vector<int>& inputs, const std::vector<int>& values) {
  std::vector<int> ctx;
  ctx.reserve(inputs.size() + values.size());
  ctx.insert(ctx.end(), inputs.begin(), inputs.end());
  ctx.insert(ctx.end(), values.begin(), values.end());
  return ctx;
}

}  // namespace

double DiscreteModelSpec::log_joint(const std::vector<int>& inputs, const std::vector<int>& values) const {
  const std::vector<int> ctx = make_context(inputs, values);
  double lp = 0.0;
  for (std::size_t v = 0; v < variables.size(); ++v) {
    const auto& var = variables[v];
    const int value = values[v];
    if (value < 0 || value >= var.cardinality) return kNegInf;
    lp += std::log(var.cpt[cpt_row(*this, var, ctx)][static_cast<std::size_t>(value)]);
  }
  return lp;
}

std::vector<int> DiscreteModelSpec::sample(const std::vector<int>& inputs, Rng& rng) const {
  std::vector<int> ctx = inputs;
  ctx.resize(num_inputs() + variables.size(), 0);
  for (std::size_t v = 0; v < variables.size(); ++v) {
    const auto& var = variables[v];
    ctx[num_inputs() + v] = static_cast<int>(categorical(rng, var.cpt[cpt_row(*this, var, ctx)]));
  }
  return {ctx.begin() + static_cast<std::ptrdiff_t>(num_inputs()), ctx.end()};
}

std::size_t InverseFactor::row_of(const std::vector<int>& context) const {
  return mixed_radix(conditioning, conditioning_cardinalities, context);
}

void InverseNetwork::validate() const {
  for (const auto& f : factors) {
    for (const auto& row : f.table) {
      double total = 0.0;
      for (double p : row) {
        if (!(p > 0.0)) throw ContractViolation("inverse network: table entry is not positive");
        total += p;
      }
      if (std::abs(total - 1.0) > 1e-12) throw ContractViolation("inverse network: table row does not sum to 1");
    }
  }
}

InverseNetwork inverse_structure(const DiscreteModelSpec& spec) {
  spec.validate();
  InverseNetwork inv;
  const std::size_t n_in = spec.num_inputs();
  std::vector<std::size_t> base;
  for (std::size_t i = 0; i < n_in; ++i) base.push_back(i);
  for (std::size_t o : spec.outputs) base.push_back(n_in + o);

  auto latents = spec.latents();
  std::reverse(latents.begin(), latents.end());
  std::vector<std::size_t> sampled;
  for (std::size_t v : latents) {
    InverseFactor f;
    f.variable = v;
    f.slot = n_in + v;
    f.conditioning = base;
    f.conditioning.insert(f.conditioning.end(), sampled.begin(), sampled.end());
    for (std::size_t slot : f.conditioning) f.conditioning_cardinalities.push_back(spec.context_cardinality(slot));
    f.table.assign(product(f.conditioning_cardinalities),
                   std::vector<double>(static_cast<std::size_t>(spec.variables[v].cardinality), 0.0));
    inv.factors.push_back(std::move(f));
    sampled.push_back(n_in + v);
  }
  return inv;
}

InverseNetwork train_inverse(const DiscreteModelSpec& spec, std::uint64_t n_samples, double smoothing, Rng& rng) {
  if (n_samples < 1) throw ContractViolation("train_inverse: at least one training sample required");
  if (!(smoothing > 0.0)) throw ContractViolation("train_inverse: smoothing must be positive");
  InverseNetwork inv = inverse_structure(spec);
  inv.training_samples = n_samples;
  inv.smoothing = smoothing;
  for (auto& f : inv.factors) {
    for (auto& row : f.table) std::fill(row.begin(), row.end(), smoothing);
  }

  std::vector<int> inputs(spec.num_inputs(), 0);
  for (std::uint64_t s = 0; s < n_samples; ++s) {
    for (std::size_t i = 0; i < inputs.size(); ++i) {
      inputs[i] = static_cast<int>(uniform_index(rng, static_cast<std::size_t>(spec.input_cardinalities[i])));
    }
    const std::vector<int> ctx = make_context(inputs, spec.sample(inputs, rng));
    for (auto& f : inv.factors) {
      f.table[f.row_of(ctx)][static_cast<std::size_t>(ctx[f.slot])] += 1.0;
    }
  }
  for (auto& f : inv.factors) {
    for (auto& row : f.table) {
      double total = 0.0;
      for (double c : row) total += c;
      for (double& c : row) c /= total;
    }
  }
  return inv;
}

InverseNetwork exact_inverse(const DiscreteModelSpec& spec) {
  InverseNetwork inv = inverse_structure(spec);
  std::vector<int> input_cards = spec.input_cardinalities;
  std::vector<int> var_cards;
  for (const auto& v : spec.variables) var_cards.push_back(v.cardinality);
  product(var_cards);

  std::vector<int> inputs(input_cards.size(), 0);
  do {
    std::vector<int> values(var_cards.size(), 0);
    do {
      const double lp = spec.log_joint(inputs, values);
      if (lp == kNegInf) continue;
      const double p = std::exp(lp);
      const std::vector<int> ctx = make_context(inputs, values);
      for (auto& f : inv.factors) {
        f.table[f.row_of(ctx)][static_cast<std::size_t>(ctx[f.slot])] += p;
      }
    } while (next_assignment(values, var_cards));
  } while (next_assignment(inputs, input_cards));

  for (auto& f : inv.factors) {
    for (auto& row : f.table) {
      double total = 0.0;
      for (double c : row) total += c;
      if (total > 0.0) {
        for (double& c : row) c /= total;
      } else {
        std::fill(row.begin(), row.end(), 1.0 / static_cast<double>(row.size()));
      }
    }
  }
  return inv;
}

double inverse_log_density(const InverseNetwork& inv, const std::vector<int>& context) {
  double lq = 0.0;
  for (const auto& f : inv.factors) {
    lq += std::log(f.table[f.row_of(context)][static_cast<std::size_t>(context[f.slot])]);
  }
  return lq;
}

namespace {

class InverseModule final : public ProbModule {
 public:
  InverseModule(std::shared_ptr<const DiscreteModelSpec> spec, std::shared_ptr<const InverseNetwork> inv,
                std::string name)
      : spec_(std::move(spec)), inv_(std::move(inv)), name_(std::move(name)) {
    if (!spec_ || !inv_) throw ContractViolation("make_inverse_module: null model or inverse");
    spec_->validate();
    const InverseNetwork expected = inverse_structure(*spec_);
    if (expected.factors.size() != inv_->factors.size()) {
      throw ContractViolation("make_inverse_module: inverse was not built for this model");
    }
    for (std::size_t k = 0; k < expected.factors.size(); ++k) {
      const auto& a = expected.factors[k];
      const auto& b = inv_->factors[k];
      if (a.variable != b.variable || a.slot != b.slot || a.conditioning != b.conditioning ||
          b.table.size() != a.table.size()) {
        throw ContractViolation("make_inverse_module: inverse was not built for this model");
      }
      for (const auto& row : b.table) {
        if (row.size() != a.table.front().size()) {
          throw ContractViolation("make_inverse_module: inverse table has the wrong width");
        }
      }
    }
    for (std::size_t i = 0; i < spec_->num_inputs(); ++i) {
      sig_.inputs.push_back({spec_->input_names[i], ValueKind::DiscreteInt});
    }
    for (std::size_t o : spec_->outputs) sig_.outputs.push_back({spec_->variables[o].name, ValueKind::DiscreteInt});
  }

  const Signature& signature() const override { return sig_; }
  std::string type_name() const override { return name_; }

 protected:
  Simulation do_simulate(const ModuleIO& inputs, Rng& rng) const override {
    const std::vector<int> x = to_ints(inputs);
    if (!in_domain(x, spec_->input_cardinalities)) {
      throw ContractViolation("inverse module: input outside its domain");
    }
    std::vector<int> values = spec_->sample(x, rng);
    const double lp = spec_->log_joint(x, values);
    const double lq = inverse_log_density(*inv_, make_context(x, values));
    ModuleIO z;
    for (std::size_t o : spec_->outputs) z.push_back(Value::discrete(values[o]));
    return {std::move(z), LogWeight(lp - lq), AuxState(InverseAux{std::move(values)})};
  }

  Regeneration do_regenerate(const ModuleIO& inputs, const ModuleIO& outputs, Rng& rng) const override {
    const std::vector<int> x = to_ints(inputs);
    std::vector<int> ctx = x;
    ctx.resize(spec_->num_inputs() + spec_->variables.size(), 0);
    for (std::size_t k = 0; k < spec_->outputs.size(); ++k) {
      const std::int64_t z = outputs[k].as_discrete();
      const std::size_t v = spec_->outputs[k];
      if (z < 0 || z >= spec_->variables[v].cardinality) return {LogWeight::impossible(), {}};
      ctx[spec_->num_inputs() + v] = static_cast<int>(z);
    }
    if (!in_domain(x, spec_->input_cardinalities)) return {LogWeight::impossible(), {}};

    double lq = 0.0;
    for (const auto& f : inv_->factors) {
      const auto& row = f.table[f.row_of(ctx)];
      const std::size_t pick = categorical(rng, row);
      ctx[f.slot] = static_cast<int>(pick);
      lq += std::log(row[pick]);
    }
    std::vector<int> values(ctx.begin() + static_cast<std::ptrdiff_t>(spec_->num_inputs()), ctx.end());
    const double lp = spec_->log_joint(x, values);
    const double lw = lp == kNegInf ? kNegInf : lp - lq;
    return {LogWeight(lw), AuxState(InverseAux{std::move(values)})};
  }

 private:
  static std::vector<int> to_ints(const ModuleIO& io) {
    std::vector<int> out;
    for (const auto& v : io) out.push_back(static_cast<int>(v.as_discrete()));
    return out;
  }

  static bool in_domain(const std::vector<int>& x, const std::vector<int>& cards) {
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (x[i] < 0 || x[i] >= cards[i]) return false;
    }
    return true;
  }

  std::shared_ptr<const DiscreteModelSpec> spec_;
  std::shared_ptr<const InverseNetwork> inv_;
  std::string name_;
  Signature sig_;
};

}  // namespace

ModulePtr make_inverse_module(std::shared_ptr<const DiscreteModelSpec> spec,
                              std::shared_ptr<const InverseNetwork> inverse, std::string type_name) {
  return std::make_shared<InverseModule>(std::move(spec), std::move(inverse), std::move(type_name));
}

nlohmann::json to_json(const InverseNetwork& inv) {
  nlohmann::json factors = nlohmann::json::array();
  for (const auto& f : inv.factors) {
    factors.push_back({{"variable", f.variable},
                       {"slot", f.slot},
                       {"conditioning", f.conditioning},
                       {"conditioning_cardinalities", f.conditioning_cardinalities},
                       {"table", f.table}});
  }
  return {{"training_samples", inv.training_samples}, {"smoothing", inv.smoothing}, {"factors", std::move(factors)}};
}

InverseNetwork inverse_from_json(const nlohmann::json& j) {
  InverseNetwork inv;
  j.at("training_samples").get_to(inv.training_samples);
  j.at("smoothing").get_to(inv.smoothing);
  for (const auto& jf : j.at("factors")) {
    InverseFactor f;
    jf.at("variable").get_to(f.variable);
    jf.at("slot").get_to(f.slot);
    jf.at("conditioning").get_to(f.conditioning);
    jf.at("conditioning_cardinalities").get_to(f.conditioning_cardinalities);
    jf.at("table").get_to(f.table);
    if (f.conditioning.size() != f.conditioning_cardinalities.size()) {
      throw ContractViolation("inverse_from_json: conditioning arity mismatch");
    }
    inv.factors.push_back(std::move(f));
  }
  return inv;
}

nlohmann::json to_json(const DiscreteModelSpec& spec) {
  nlohmann::json vars = nlohmann::json::array();
  for (const auto& v : spec.variables) {
    vars.push_back({{"name", v.name}, {"cardinality", v.cardinality}, {"parents", v.parents}, {"cpt", v.cpt}});
  }
  nlohmann::json inputs = nlohmann::json::array();
  for (std::size_t i = 0; i < spec.num_inputs(); ++i) {
    inputs.push_back({{"name", spec.input_names[i]}, {"cardinality", spec.input_cardinalities[i]}});
  }
  return {{"inputs", std::move(inputs)}, {"variables", std::move(vars)}, {"outputs", spec.outputs}};
}

DiscreteModelSpec discrete_spec_from_json(const nlohmann::json& j) {
  DiscreteModelSpec spec;
  if (j.contains("inputs")) {
    for (const auto& in : j.at("inputs")) {
      spec.input_names.push_back(in.at("name").get<std::string>());
      spec.input_cardinalities.push_back(in.at("cardinality").get<int>());
    }
  }
  for (const auto& jv : j.at("variables")) {
    DiscreteVariable v;
    jv.at("name").get_to(v.name);
    jv.at("cardinality").get_to(v.cardinality);
    if (jv.contains("parents")) jv.at("parents").get_to(v.parents);
    jv.at("cpt").get_to(v.cpt);
    spec.variables.push_back(std::move(v));
  }
  j.at("outputs").get_to(spec.outputs);
  spec.validate();
  return spec;
}

}  // namespace modnet
