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
#include <map>

#include <doctest.h>

#include "modnet/errors.hpp"
#include "modnet/exact.hpp"
#include "modnet/mh.hpp"

using namespace modnet;

namespace {

const std::vector<std::vector<double>> kRowsB{{0.9, 0.1}, {0.2, 0.8}};

ModuleNetwork two_nodes(double pa) {
  return ModuleNetwork::build({{"A", bernoulli_module(pa, "a")}, {"B", cpt_module({"a"}, {2}, kRowsB, "b")}},
                              {{"A", "a", "B", "a"}}, {{"B", {{"b", Value::discrete(1)}}}});
}

double log_joint(double pa, std::int64_t a) { return std::log(a ? pa : 1.0 - pa) + std::log(kRowsB[a][1]); }

/// Proposes a value outside the support half of the time.
class OverreachingProposal final : public Proposal {
 public:
  ModuleIO propose(const ModuleIO& current, Rng& rng) const override {
    return {Value::discrete(bernoulli(rng, 0.5) ? 5 : 1 - current[0].as_discrete())};
  }
  double log_density(const ModuleIO&, const ModuleIO&) const override { return std::log(0.5); }
  std::string name() const override { return "overreach"; }
};

}  // namespace

TEST_SUITE("mh") {
  TEST_CASE("on exact modules the update is textbook single-site MH, draw for draw") {
    const double pa = 0.3;
    auto net = two_nodes(pa);
    Rng rng(42);
    net.initialize(rng);
    const SiteProposal site{0, flip_proposal()};

    Rng ref_rng = rng;
    std::int64_t ref_a = net.outputs(0)[0].as_discrete();
    for (int t = 0; t < 10000; ++t) {
      const auto d = mh_update(net, site, rng);
      // reference: flip a, accept with min(1, p(a', b) / p(a, b))
      const std::int64_t proposed = 1 - ref_a;
      const double log_alpha = log_joint(pa, proposed) - log_joint(pa, ref_a);
      const bool accept = std::log(uniform_open01(ref_rng)) <= log_alpha;
      if (accept) ref_a = proposed;
      REQUIRE(d.accepted == accept);
      REQUIRE(net.outputs(0)[0].as_discrete() == ref_a);
      REQUIRE(d.log_alpha == doctest::Approx(log_alpha).epsilon(1e-14));
    }
    CHECK(rng() == ref_rng());
  }

  TEST_CASE("symmetric proposal on a fair root with no children always accepts") {
    auto net = ModuleNetwork::build({{"A", bernoulli_module(0.5, "a")}, {"C", normal_module(0, 1, "c")}}, {},
                                    {{"C", {{"c", Value::real(0.0)}}}});
    Rng rng(1);
    net.initialize(rng);
    for (int t = 0; t < 200; ++t) {
      const auto d = mh_update(net, {0, flip_proposal()}, rng);
      CHECK(d.log_alpha == 0.0);
      CHECK(d.accepted);
    }
  }

  TEST_CASE("acceptance probabilities from a fixed state match the assembled ratio") {
    // From a = 0, a flip is accepted with probability min(1, p(1, b) / p(0, b)).
    const double pa = 0.05;
    const double alpha = std::min(1.0, std::exp(log_joint(pa, 1) - log_joint(pa, 0)));
    const double back = std::min(1.0, std::exp(log_joint(pa, 0) - log_joint(pa, 1)));
    auto base = two_nodes(pa);
    Rng init(3);
    do {
      base.initialize(init);
    } while (base.outputs(0)[0].as_discrete() != 0);
    auto from_one = base;
    from_one.set_outputs(0, {Value::discrete(1)});
    from_one.update_log_weight(0, from_one.module(0).regenerate({}, {Value::discrete(1)}, init));
    from_one.update_log_weight(1, from_one.module(1).regenerate({Value::discrete(1)}, {Value::discrete(1)}, init));

    Rng rng(9);
    const int n = 1000000;
    int up = 0;
    int down = 0;
    for (int i = 0; i < n; ++i) {
      auto a = base;
      up += mh_update(a, {0, flip_proposal()}, rng).accepted;
      auto b = from_one;
      down += mh_update(b, {0, flip_proposal()}, rng).accepted;
    }
    const double sd_up = std::sqrt(alpha * (1 - alpha) / n);
    CHECK(std::abs(up / double(n) - alpha) <= 4 * sd_up);
    CHECK(back == 1.0);
    CHECK(down == n);
  }

  TEST_CASE("rejection leaves outputs, weights and aux untouched") {
    auto net = two_nodes(0.3);
    Rng rng(17);
    net.initialize(rng);
    const SiteProposal site{0, std::make_shared<OverreachingProposal>()};
    int rejected = 0;
    int impossible = 0;
    for (int t = 0; t < 2000; ++t) {
      const auto z = net.outputs(0);
      const auto w0 = net.lookup_log_weight(0);
      const auto w1 = net.lookup_log_weight(1);
      const auto s0 = net.aux_state(0).sequence();
      const auto s1 = net.aux_state(1).sequence();
      const auto d = mh_update(net, site, rng);
      if (d.impossible()) {
        ++impossible;
        CHECK_FALSE(d.accepted);
        CHECK(d.log_alpha == -INFINITY);
      }
      if (!d.accepted) {
        ++rejected;
        CHECK(net.outputs(0) == z);
        CHECK(net.lookup_log_weight(0) == w0);
        CHECK(net.lookup_log_weight(1) == w1);
        CHECK(net.aux_state(0).sequence() == s0);
        CHECK(net.aux_state(1).sequence() == s1);
      } else {
        CHECK(net.aux_state(0).sequence() > s0);
        CHECK(net.aux_state(1).sequence() > s1);
      }
    }
    CHECK(impossible > 500);
    CHECK(rejected > impossible);
  }

  TEST_CASE("acceptance applies every regenerated weight, including the site's own") {
    auto net = two_nodes(0.3);
    Rng rng(5);
    net.initialize(rng);
    for (int t = 0; t < 100; ++t) {
      const auto d = mh_update(net, {0, flip_proposal()}, rng);
      CHECK(d.touched == std::vector<NodeId>{0, 1});
      if (d.accepted) {
        CHECK(net.lookup_log_weight(0).value() == d.new_weights[0]);
        CHECK(net.lookup_log_weight(1).value() == d.new_weights[1]);
      }
    }
  }

  TEST_CASE("assemble_log_alpha handles impossible terms") {
    AcceptanceDecision d;
    d.touched = {0, 1};
    d.old_weights = {-1.0, -2.0};
    d.new_weights = {-1.5, -2.5};
    CHECK(assemble_log_alpha(d) == doctest::Approx(-1.0));
    d.new_weights[1] = -INFINITY;
    CHECK(assemble_log_alpha(d) == -INFINITY);
    d.new_weights[1] = -2.5;
    d.log_r_reverse = -INFINITY;
    CHECK(assemble_log_alpha(d) == -INFINITY);
    d.log_r_reverse = 0.0;
    d.old_weights[0] = -INFINITY;
    CHECK(assemble_log_alpha(d) == INFINITY);
  }

  TEST_CASE("three-node chain converges to the enumerated posterior") {
    // a -> b -> c, c observed; posterior by direct enumeration.
    const double pa = 0.4;
    const std::vector<std::vector<double>> rb{{0.7, 0.3}, {0.25, 0.75}};
    const std::vector<std::vector<double>> rc{{0.8, 0.2}, {0.1, 0.9}};
    auto net = ModuleNetwork::build({{"A", bernoulli_module(pa, "a")},
                                     {"B", cpt_module({"a"}, {2}, rb, "b")},
                                     {"C", cpt_module({"b"}, {2}, rc, "c")}},
                                    {{"A", "a", "B", "a"}, {"B", "b", "C", "b"}}, {{"C", {{"c", Value::discrete(1)}}}});
    std::map<std::pair<int, int>, double> exact;
    double total = 0.0;
    for (int a = 0; a < 2; ++a) {
      for (int b = 0; b < 2; ++b) {
        const double p = (a ? pa : 1 - pa) * rb[a][b] * rc[b][1];
        exact[{a, b}] = p;
        total += p;
      }
    }
    Rng rng(2024);
    net.initialize(rng);
    std::map<std::pair<int, int>, double> freq;
    const int n = 200000;
    run_chain(net, {{0, flip_proposal()}, {1, discrete_uniform_proposal(2)}}, n, rng, [&](const ChainRecord& r) {
      freq[{static_cast<int>(r.values[0].as_discrete()), static_cast<int>(r.values[1].as_discrete())}] += 1.0 / n;
    });
    double tv = 0.0;
    for (const auto& [k, p] : exact) tv += std::abs(p / total - freq[k]) / 2;
    CHECK(tv < 0.01);
  }

  TEST_CASE("run_chain streams one record per iteration and counts per site") {
    auto net = two_nodes(0.3);
    Rng rng(8);
    net.initialize(rng);
    std::vector<ChainRecord> records;
    const auto summary =
        run_chain(net, {{0, flip_proposal()}}, 500, rng, [&](const ChainRecord& r) { records.push_back(r); });
    REQUIRE(records.size() == 500);
    CHECK(records.front().iteration == 0);
    CHECK(records.back().iteration == 499);
    CHECK(summary.sites.at(0).proposed == 500);
    std::uint64_t acc = 0;
    for (const auto& r : records) {
      acc += r.accepted;
      CHECK(r.total_log_weight == doctest::Approx(r.node_log_weights[0] + r.node_log_weights[1]));
    }
    CHECK(summary.sites.at(0).accepted == acc);
    const auto stats = acceptance_stats(records);
    CHECK(stats.acceptance_rate.at(0) == doctest::Approx(acc / 500.0));
    CHECK(stats.node_log_weight.size() == 2);
  }

  TEST_CASE("cyclic scan visits sites in schedule order") {
    auto net = ModuleNetwork::build({{"A", bernoulli_module(0.5, "a")}, {"B", bernoulli_module(0.5, "b")},
                                     {"C", normal_module(0, 1, "c")}},
                                    {}, {{"C", {{"c", Value::real(0.0)}}}});
    Rng rng(1);
    net.initialize(rng);
    std::vector<NodeId> sites;
    run_chain(net, {{1, flip_proposal()}, {0, flip_proposal()}}, 6, rng,
              [&](const ChainRecord& r) { sites.push_back(r.site); }, ScanOrder::Cyclic);
    CHECK(sites == std::vector<NodeId>{1, 0, 1, 0, 1, 0});
  }

  TEST_CASE("chains are reproducible from the seed") {
    auto run = [](std::uint64_t seed) {
      auto net = two_nodes(0.3);
      Rng rng(seed);
      net.initialize(rng);
      std::vector<std::int64_t> trace;
      run_chain(net, {{0, discrete_uniform_proposal(2)}}, 300, rng,
                [&](const ChainRecord& r) { trace.push_back(r.values[0].as_discrete()); });
      return trace;
    };
    CHECK(run(3) == run(3));
    CHECK(run(3) != run(4));
  }

  TEST_CASE("run_chain checks its schedule") {
    auto net = two_nodes(0.3);
    Rng rng(1);
    std::vector<ChainRecord> sink;
    CHECK_THROWS_AS(run_chain(net, {{0, flip_proposal()}}, 1, rng, nullptr), ContractViolation);  // uninitialized
    net.initialize(rng);
    CHECK_THROWS_AS(run_chain(net, {}, 1, rng, nullptr), ContractViolation);
    CHECK_THROWS_AS(run_chain(net, {{1, flip_proposal()}}, 1, rng, nullptr), ContractViolation);  // observed
    CHECK_THROWS_AS(acceptance_stats(sink), ContractViolation);
  }

  TEST_CASE("proposal densities") {
    Rng rng(1);
    const auto flip = flip_proposal();
    CHECK(flip->propose({Value::discrete(0)}, rng) == ModuleIO{Value::discrete(1)});
    CHECK(flip->log_density({Value::discrete(1)}, {Value::discrete(0)}) == 0.0);
    CHECK(flip->log_density({Value::discrete(0)}, {Value::discrete(0)}) == -INFINITY);
    const auto uni = discrete_uniform_proposal(4);
    CHECK(uni->log_density({Value::discrete(2)}, {Value::discrete(0)}) == doctest::Approx(-std::log(4.0)));
    const auto walk = gaussian_random_walk(0.5);
    const auto next = walk->propose({Value::real(1.0)}, rng);
    CHECK(walk->log_density(next, {Value::real(1.0)}) == doctest::Approx(walk->log_density({Value::real(1.0)}, next)));
  }
}
