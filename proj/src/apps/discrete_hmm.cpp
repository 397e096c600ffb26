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

#include "modnet/apps/discrete_hmm.hpp"

#include <cmath>
#include <limits>

#include "modnet/errors.hpp"

namespace modnet::apps {

namespace {

void check_rows(const std::vector<std::vector<double>>& rows, std::size_t width, const char* what) {
  for (const auto& row : rows) {
    if (row.size() != width) throw ContractViolation(std::string(what) + ": row has the wrong width");
    double total = 0.0;
    for (double p : row) {
      if (!(p >= 0.0)) throw ContractViolation(std::string(what) + ": negative probability");
      total += p;
    }
    if (std::abs(total - 1.0) > 1e-12) throw ContractViolation(std::string(what) + ": row does not sum to 1");
  }
}

}  // namespace

void HmmConstants::validate() const {
  const std::size_t s = states();
  if (s == 0 || initial.empty() || emission.size() != s || symbols() == 0) {
    throw ContractViolation("hmm: empty model");
  }
  check_rows(initial, s, "hmm initial");
  check_rows(transition, s, "hmm transition");
  check_rows(emission, symbols(), "hmm emission");
}

HmmConstants default_hmm_constants() {
  HmmConstants c;
  c.initial = {{0.6, 0.3, 0.1}, {0.1, 0.3, 0.6}};
  c.transition = {{0.7, 0.2, 0.1}, {0.15, 0.7, 0.15}, {0.1, 0.2, 0.7}};
  c.emission = {{0.8, 0.15, 0.05}, {0.1, 0.8, 0.1}, {0.05, 0.15, 0.8}};
  c.length = 6;
  return c;
}

std::vector<std::int64_t> default_hmm_observations() { return {0, 0, 1, 2, 2, 1}; }

HmmConstants hmm_constants_from_json(const nlohmann::json& j) {
  HmmConstants c;
  j.at("initial").get_to(c.initial);
  j.at("transition").get_to(c.transition);
  j.at("emission").get_to(c.emission);
  j.at("length").get_to(c.length);
  c.validate();
  return c;
}

DiscreteHmmModel::DiscreteHmmModel(HmmConstants constants) : c_(std::move(constants)) {
  c_.validate();
  sig_.inputs.push_back({"a", ValueKind::DiscreteInt});
  sig_.outputs.push_back({"z", ValueKind::DiscreteVector, static_cast<std::int64_t>(c_.length)});
}

const std::vector<double>& DiscreteHmmModel::initial_row(const ModuleIO& x) const {
  const std::int64_t a = x[0].as_discrete();
  if (a < 0 || a >= static_cast<std::int64_t>(c_.initial.size())) {
    throw ContractViolation("hmm: regime input outside its domain");
  }
  return c_.initial[static_cast<std::size_t>(a)];
}

Value DiscreteHmmModel::propose(State& s, std::size_t t, const ModuleIO& x, Rng& rng) const {
  const auto& row = t == 0 ? initial_row(x) : c_.transition[static_cast<std::size_t>(s.last)];
  return Value::discrete(static_cast<std::int64_t>(categorical(rng, row)));
}

double DiscreteHmmModel::extend(State& s, std::size_t t, const ModuleIO&, const ModuleIO& z,
                                const Value& latent) const {
  s.last = latent.as_discrete();
  const std::int64_t symbol = z[0].as_discrete_vector()[t];
  if (symbol < 0 || symbol >= static_cast<std::int64_t>(c_.symbols())) {
    return -std::numeric_limits<double>::infinity();
  }
  return std::log(c_.emission[static_cast<std::size_t>(s.last)][static_cast<std::size_t>(symbol)]);
}

std::pair<SmcLatents, ModuleIO> DiscreteHmmModel::sample_forward(const ModuleIO& x, Rng& rng) const {
  SmcLatents v;
  std::vector<std::int64_t> z;
  State s;
  for (std::size_t t = 0; t < c_.length; ++t) {
    Value h = propose(s, t, x, rng);
    s.last = h.as_discrete();
    z.push_back(static_cast<std::int64_t>(categorical(rng, c_.emission[static_cast<std::size_t>(s.last)])));
    v.trajectory.push_back(std::move(h));
  }
  return {std::move(v), ModuleIO{Value::discrete_vector(std::move(z))}};
}

std::shared_ptr<const SmcModule<DiscreteHmmModel>> build_hmm_module(HmmConstants constants, std::size_t particles) {
  return make_smc_module(std::make_shared<const DiscreteHmmModel>(std::move(constants)), particles, "discrete_hmm");
}

}  // namespace modnet::apps
