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
#include <limits>
#include <numbers>

#include <doctest.h>

#include "modnet/errors.hpp"
#include "modnet/exact.hpp"
#include "modnet/random.hpp"

using namespace modnet;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

TEST_SUITE("value") {
  TEST_CASE("values carry their kind and reject the wrong accessor") {
    const Value d = Value::discrete(3);
    CHECK(d.kind() == ValueKind::DiscreteInt);
    CHECK(d.as_discrete() == 3);
    CHECK_THROWS_AS(d.as_real(), ContractViolation);

    const Value v = Value::real_vector({1.0, 2.5});
    CHECK(v.kind() == ValueKind::RealVector);
    CHECK(v.length() == 2);
    CHECK(v == Value::real_vector({1.0, 2.5}));
    CHECK_FALSE(v == Value::real_vector({1.0, 2.0}));
  }

  TEST_CASE("real values must be finite") {
    CHECK_THROWS_AS(Value::real(std::nan("")), ContractViolation);
    CHECK_THROWS_AS(Value::real(kInf), ContractViolation);
    CHECK_THROWS_AS(Value::real_vector({0.0, -kInf}), ContractViolation);
  }

  TEST_CASE("log-weights admit -inf but not NaN or +inf") {
    CHECK(LogWeight::impossible().is_impossible());
    CHECK((LogWeight(-1.5) + LogWeight::impossible()).is_impossible());
    CHECK((LogWeight(-1.5) + LogWeight(0.5)).value() == -1.0);
    CHECK_THROWS_AS(LogWeight(std::nan("")), ContractViolation);
    CHECK_THROWS_AS(LogWeight{kInf}, ContractViolation);
    CHECK(LogWeight::impossible() < LogWeight(-1e300));
  }

  TEST_CASE("schema checks compare kind and length") {
    const std::vector<PortSpec> ports{{"b", ValueKind::RealVector, 3}};
    CHECK_NOTHROW(check_schema(ports, {Value::real_vector({1, 2, 3})}, "t"));
    CHECK_THROWS_AS(check_schema(ports, {Value::real_vector({1, 2})}, "t"), ContractViolation);
    CHECK_THROWS_AS(check_schema(ports, {Value::discrete(1)}, "t"), ContractViolation);
    CHECK_THROWS_AS(check_schema(ports, {}, "t"), ContractViolation);
  }

  TEST_CASE("seed derivation is a fixed function of master and index") {
    CHECK(derive_seed(1, 0) == mix64(mix64(1) ^ 1));
    CHECK(derive_seed(1, 0) != derive_seed(1, 1));
    CHECK(derive_seed(1, 0) != derive_seed(2, 0));
    // SplitMix64 reference output for state 0.
    CHECK(mix64(0) == 0xE220A8397B1DCDAFULL);
  }

  TEST_CASE("log_sum_exp handles empty and impossible inputs") {
    CHECK(log_sum_exp(std::vector<double>{}) == -kInf);
    CHECK(log_sum_exp(std::vector<double>{-kInf, -kInf}) == -kInf);
    CHECK(log_sum_exp(std::vector<double>{1000.0, 1000.0}) == doctest::Approx(1000.0 + std::log(2.0)));
    CHECK(log_sum_exp(std::vector<double>{std::log(0.25), std::log(0.75)}) == doctest::Approx(0.0));
  }

  TEST_CASE("categorical_log refuses an all-impossible row") {
    Rng rng(1);
    std::vector<double> w{-kInf, -kInf};
    CHECK_THROWS_AS(categorical_log(rng, w), ContractViolation);
    w[1] = 0.0;
    for (int i = 0; i < 50; ++i) CHECK(categorical_log(rng, w) == 1);
  }
}

TEST_SUITE("exact") {
  TEST_CASE("bernoulli regenerate equals log p exactly and is deterministic") {
    const auto m = bernoulli_module(0.3);
    Rng rng(7);
    CHECK(m->regenerate({}, {Value::discrete(1)}, rng).weight.value() == std::log(0.3));
    CHECK(m->regenerate({}, {Value::discrete(0)}, rng).weight.value() == std::log(0.7));
    CHECK(m->regenerate({}, {Value::discrete(2)}, rng).weight.is_impossible());
    const auto r = m->regenerate({}, {Value::discrete(1)}, rng);
    CHECK(r.aux.empty());
  }

  TEST_CASE("normal regenerate matches the closed-form density") {
    const auto m = normal_module(0.5, 1.3);
    Rng rng(3);
    const double z = 2.1;
    const double u = (z - 0.5) / 1.3;
    const double expected = -0.5 * u * u - std::log(1.3) - 0.5 * std::log(2.0 * std::numbers::pi);
    CHECK(m->regenerate({}, {Value::real(z)}, rng).weight.value() == doctest::Approx(expected).epsilon(1e-15));
  }

  TEST_CASE("simulate weight agrees with regenerate at the simulated output") {
    const auto m = categorical_module({0.2, 0.5, 0.3});
    Rng rng(11);
    for (int i = 0; i < 20; ++i) {
      const auto s = m->simulate({}, rng);
      CHECK(s.weight == m->regenerate({}, s.outputs, rng).weight);
    }
  }

  TEST_CASE("cpt rows are indexed with the first input most significant") {
    const auto m = cpt_module({"a", "b"}, {2, 3}, {{1, 0}, {0, 1}, {1, 0}, {0, 1}, {0, 1}, {1, 0}}, "c");
    Rng rng(1);
    // row index = 3a + b; row 5 puts all mass on 0
    CHECK(m->regenerate({Value::discrete(1), Value::discrete(2)}, {Value::discrete(0)}, rng).weight.value() == 0.0);
    CHECK(m->regenerate({Value::discrete(1), Value::discrete(2)}, {Value::discrete(1)}, rng).weight.is_impossible());
    CHECK(m->regenerate({Value::discrete(0), Value::discrete(1)}, {Value::discrete(1)}, rng).weight.value() == 0.0);
    // parent outside its domain has density zero
    CHECK(m->regenerate({Value::discrete(2), Value::discrete(0)}, {Value::discrete(0)}, rng).weight.is_impossible());
  }

  TEST_CASE("schema violations are contract errors") {
    const auto m = bernoulli_module(0.5);
    Rng rng(1);
    CHECK_THROWS_AS(m->regenerate({}, {Value::real(0.0)}, rng), ContractViolation);
    CHECK_THROWS_AS(m->regenerate({Value::discrete(0)}, {Value::discrete(0)}, rng), ContractViolation);
    CHECK_THROWS_AS(bernoulli_module(1.5), ContractViolation);
  }

  TEST_CASE("aux states are stamped with increasing sequence numbers") {
    const auto m = bernoulli_module(0.5);
    Rng rng(1);
    const auto a = m->regenerate({}, {Value::discrete(0)}, rng);
    const auto b = m->regenerate({}, {Value::discrete(0)}, rng);
    CHECK(b.aux.sequence() > a.aux.sequence());
  }
}
