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

#include <doctest.h>

#include "modnet/apps/outlier_regression.hpp"
#include "modnet/inverse.hpp"
#include "modnet/oracle/enumeration.hpp"

using namespace modnet;

namespace {

DiscreteModelSpec switch_spec() { return apps::switch_model_spec({}); }

double exact_log_p_a(int a) {
  const apps::SwitchConstants c;
  const auto m = oracle::switch_chain_model(c.p_u1, c.p_u2, c.p_u3, c.p_a);
  return oracle::log_evidence(m, {{3, a}});
}

/// x -> u -> z with a binary input x and a ternary latent u.
DiscreteModelSpec input_spec() {
  DiscreteModelSpec s;
  s.input_names = {"x"};
  s.input_cardinalities = {2};
  s.variables = {{"u", 3, {0}, {{0.5, 0.3, 0.2}, {0.1, 0.1, 0.8}}},
                 {"z", 2, {1}, {{0.9, 0.1}, {0.4, 0.6}, {0.2, 0.8}}}};
  s.outputs = {1};
  return s;
}

struct Moments {
  double mean = 0.0;
  double sd = 0.0;
};

Moments lw_moments(const ProbModule& m, const ModuleIO& x, const ModuleIO& z, int n, Rng& rng) {
  double s = 0.0;
  double s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double w = m.regenerate(x, z, rng).weight.value();
    s += w;
    s2 += w * w;
  }
  const double mean = s / n;
  return {mean, std::sqrt(std::max(0.0, s2 / n - mean * mean))};
}

}  // namespace

TEST_SUITE("inverse") {
  TEST_CASE("exact conditionals make every weight the log marginal") {
    auto spec = std::make_shared<const DiscreteModelSpec>(switch_spec());
    auto module = make_inverse_module(spec, std::make_shared<const InverseNetwork>(exact_inverse(*spec)));
    Rng rng(1);
    for (int a : {0, 1}) {
      for (int i = 0; i < 50; ++i) {
        CHECK(module->regenerate({}, {Value::discrete(a)}, rng).weight.value() ==
              doctest::Approx(exact_log_p_a(a)).epsilon(1e-12));
      }
    }
    for (int i = 0; i < 50; ++i) {
      const auto s = module->simulate({}, rng);
      CHECK(s.weight.value() == doctest::Approx(exact_log_p_a(static_cast<int>(s.outputs[0].as_discrete()))));
    }
  }

  TEST_CASE("exact conditionals with a module input") {
    auto spec = std::make_shared<const DiscreteModelSpec>(input_spec());
    auto module = make_inverse_module(spec, std::make_shared<const InverseNetwork>(exact_inverse(*spec)));
    const std::vector<std::vector<double>> pu{{0.5, 0.3, 0.2}, {0.1, 0.1, 0.8}};
    const std::vector<double> pz1{0.1, 0.6, 0.8};
    Rng rng(2);
    for (int x : {0, 1}) {
      double p1 = 0.0;
      for (int u = 0; u < 3; ++u) p1 += pu[x][u] * pz1[u];
      CHECK(module->regenerate({Value::discrete(x)}, {Value::discrete(1)}, rng).weight.value() ==
            doctest::Approx(std::log(p1)).epsilon(1e-12));
      CHECK(module->regenerate({Value::discrete(x)}, {Value::discrete(0)}, rng).weight.value() ==
            doctest::Approx(std::log(1 - p1)).epsilon(1e-12));
    }
  }

  TEST_CASE("weights decompose as log p(u, z) - log q(u)") {
    const auto spec = switch_spec();
    auto inv = std::make_shared<const InverseNetwork>([&] {
      Rng r(3);
      return train_inverse(spec, 500, 1.0, r);
    }());
    auto module = make_inverse_module(std::make_shared<const DiscreteModelSpec>(spec), inv);
    Rng rng(4);
    for (int i = 0; i < 100; ++i) {
      const auto g = module->regenerate({}, {Value::discrete(i % 2)}, rng);
      const auto* aux = g.aux.get<InverseAux>();
      REQUIRE(aux != nullptr);
      CHECK(aux->values[3] == i % 2);
      CHECK(g.weight.value() ==
            doctest::Approx(spec.log_joint({}, aux->values) - inverse_log_density(*inv, aux->values)).epsilon(1e-13));
    }
  }

  TEST_CASE("learned inverse gives unbiased evidence estimates") {
    Rng train(5);
    auto module = apps::build_module_a(1000, train);
    Rng rng(6);
    for (int a : {0, 1}) {
      const int n = 50000;
      double s = 0.0;
      double s2 = 0.0;
      for (int i = 0; i < n; ++i) {
        const double r = std::exp(module->regenerate({}, {Value::discrete(a)}, rng).weight.value() - exact_log_p_a(a));
        s += r;
        s2 += r * r;
      }
      const double mean = s / n;
      CHECK(std::abs(mean - 1.0) <= 4 * std::sqrt((s2 / n - mean * mean) / n));
    }
  }

  TEST_CASE("weight spread shrinks with more training data") {
    Rng rng(7);
    for (int a : {0, 1}) {
      const ModuleIO z{Value::discrete(a)};
      Rng t1(8);
      Rng t2(8);
      const auto small = lw_moments(*apps::build_module_a(100, t1), {}, z, 20000, rng);
      const auto large = lw_moments(*apps::build_module_a(200000, t2), {}, z, 20000, rng);
      CAPTURE(a);
      CHECK(large.sd < small.sd);
      CHECK(large.mean == doctest::Approx(exact_log_p_a(a)).epsilon(0.01));
    }
  }

  TEST_CASE("learned tables approach the exact conditionals") {
    const auto spec = switch_spec();
    Rng rng(9);
    const auto learned = train_inverse(spec, 200000, 1.0, rng);
    const auto exact = exact_inverse(spec);
    REQUIRE(learned.factors.size() == exact.factors.size());
    double worst = 0.0;
    for (std::size_t f = 0; f < exact.factors.size(); ++f) {
      CHECK(learned.factors[f].conditioning == exact.factors[f].conditioning);
      for (std::size_t r = 0; r < exact.factors[f].table.size(); ++r) {
        for (std::size_t c = 0; c < exact.factors[f].table[r].size(); ++c) {
          worst = std::max(worst, std::abs(learned.factors[f].table[r][c] - exact.factors[f].table[r][c]));
        }
      }
    }
    CHECK(worst < 0.01);
    CHECK(learned.training_samples == 200000);
  }

  TEST_CASE("sampling order is reverse topological over the latents") {
    const auto inv = inverse_structure(switch_spec());
    REQUIRE(inv.factors.size() == 3);
    CHECK(inv.factors[0].variable == 2);
    CHECK(inv.factors[1].variable == 1);
    CHECK(inv.factors[2].variable == 0);
    // u3 sees only a; u1 sees a, u3 and u2
    CHECK(inv.factors[0].conditioning == std::vector<std::size_t>{3});
    CHECK(inv.factors[2].conditioning.size() == 3);
  }

  TEST_CASE("inverse and model documents round-trip through JSON") {
    const auto spec = input_spec();
    Rng r(10);
    const auto inv = train_inverse(spec, 300, 0.5, r);
    const auto back = inverse_from_json(to_json(inv));
    CHECK(back.training_samples == 300);
    CHECK(back.smoothing == 0.5);
    REQUIRE(back.factors.size() == inv.factors.size());
    for (std::size_t f = 0; f < inv.factors.size(); ++f) {
      CHECK(back.factors[f].table == inv.factors[f].table);
      CHECK(back.factors[f].conditioning == inv.factors[f].conditioning);
    }
    const auto spec_back = discrete_spec_from_json(to_json(spec));
    CHECK(to_json(spec_back) == to_json(spec));

    auto m1 = make_inverse_module(std::make_shared<const DiscreteModelSpec>(spec), std::make_shared<const InverseNetwork>(inv));
    auto m2 = make_inverse_module(std::make_shared<const DiscreteModelSpec>(spec_back),
                                  std::make_shared<const InverseNetwork>(back));
    Rng a(11);
    Rng b(11);
    for (int i = 0; i < 20; ++i) {
      CHECK(m1->regenerate({Value::discrete(1)}, {Value::discrete(0)}, a).weight ==
            m2->regenerate({Value::discrete(1)}, {Value::discrete(0)}, b).weight);
    }
  }

  TEST_CASE("malformed models and inverses are rejected") {
    Rng rng(12);
    auto bad = input_spec();
    bad.variables[0].cpt[1] = {0.5, 0.5, 0.5};
    CHECK_THROWS_AS(bad.validate(), ContractViolation);
    bad = input_spec();
    bad.variables[1].parents = {2};
    CHECK_THROWS_AS(bad.validate(), ContractViolation);
    bad = input_spec();
    bad.outputs.clear();
    CHECK_THROWS_AS(bad.validate(), ContractViolation);

    CHECK_THROWS_AS(train_inverse(input_spec(), 0, 1.0, rng), ContractViolation);
    CHECK_THROWS_AS(train_inverse(input_spec(), 10, 0.0, rng), ContractViolation);

    auto spec = std::make_shared<const DiscreteModelSpec>(input_spec());
    auto other = std::make_shared<const InverseNetwork>(exact_inverse(switch_spec()));
    CHECK_THROWS_AS(make_inverse_module(spec, other), ContractViolation);
    auto module = make_inverse_module(spec, std::make_shared<const InverseNetwork>(exact_inverse(*spec)));
    // unreachable values score zero rather than throw, so proposals may leave the support
    CHECK(module->regenerate({Value::discrete(2)}, {Value::discrete(0)}, rng).weight.is_impossible());
    CHECK(module->regenerate({Value::discrete(0)}, {Value::discrete(3)}, rng).weight.is_impossible());
    CHECK_THROWS_AS(module->simulate({Value::discrete(2)}, rng), ContractViolation);

    auto zero_row = exact_inverse(*spec);
    zero_row.factors[0].table[0] = {1.0, 0.0, 0.0};
    CHECK_THROWS_AS(zero_row.validate(), ContractViolation);
  }
}
