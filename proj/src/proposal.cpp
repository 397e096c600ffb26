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

#include "modnet/proposal.hpp"

#include <cmath>
#include <limits>

#include "modnet/errors.hpp"

namespace modnet {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

bool same_except(const ModuleIO& a, const ModuleIO& b, std::size_t port) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (i != port && !(a[i] == b[i])) return false;
  }
  return true;
}

class FlipProposal final : public Proposal {
 public:
  explicit FlipProposal(std::size_t port) : port_(port) {}

  ModuleIO propose(const ModuleIO& current, Rng&) const override {
    const std::int64_t v = current.at(port_).as_discrete();
    if (v != 0 && v != 1) throw ContractViolation("flip proposal: value is not binary");
    ModuleIO next = current;
    next[port_] = Value::discrete(1 - v);
    return next;
  }

  double log_density(const ModuleIO& to, const ModuleIO& from) const override {
    if (!same_except(to, from, port_)) return kNegInf;
    const std::int64_t f = from.at(port_).as_discrete();
    const std::int64_t t = to.at(port_).as_discrete();
    return (f == 0 || f == 1) && t == 1 - f ? 0.0 : kNegInf;
  }

  std::string name() const override { return "flip"; }

 private:
  std::size_t port_;
};

class DiscreteUniformProposal final : public Proposal {
 public:
  DiscreteUniformProposal(std::int64_t cardinality, std::size_t port) : cardinality_(cardinality), port_(port) {
    if (cardinality < 1) throw ContractViolation("uniform proposal: cardinality must be positive");
  }

  ModuleIO propose(const ModuleIO& current, Rng& rng) const override {
    ModuleIO next = current;
    next.at(port_) = Value::discrete(
        static_cast<std::int64_t>(uniform_index(rng, static_cast<std::size_t>(cardinality_))));
    return next;
  }

  double log_density(const ModuleIO& to, const ModuleIO& from) const override {
    if (!same_except(to, from, port_)) return kNegInf;
    const std::int64_t t = to.at(port_).as_discrete();
    return t >= 0 && t < cardinality_ ? -std::log(static_cast<double>(cardinality_)) : kNegInf;
  }

  std::string name() const override { return "uniform"; }

 private:
  std::int64_t cardinality_;
  std::size_t port_;
};

class GaussianRandomWalk final : public Proposal {
 public:
  GaussianRandomWalk(double sigma, std::size_t port) : sigma_(sigma), port_(port) {
    if (!(sigma > 0.0)) throw ContractViolation("random walk: sigma must be positive");
  }

  ModuleIO propose(const ModuleIO& current, Rng& rng) const override {
    ModuleIO next = current;
    next.at(port_) = Value::real(normal(rng, current.at(port_).as_real(), sigma_));
    return next;
  }

  double log_density(const ModuleIO& to, const ModuleIO& from) const override {
    if (!same_except(to, from, port_)) return kNegInf;
    return log_normal_pdf(to.at(port_).as_real(), from.at(port_).as_real(), sigma_);
  }

  std::string name() const override { return "gaussian"; }

 private:
  double sigma_;
  std::size_t port_;
};

}  // namespace

ProposalPtr flip_proposal(std::size_t port) { return std::make_shared<FlipProposal>(port); }

ProposalPtr discrete_uniform_proposal(std::int64_t cardinality, std::size_t port) {
  return std::make_shared<DiscreteUniformProposal>(cardinality, port);
}

ProposalPtr gaussian_random_walk(double sigma, std::size_t port) {
  return std::make_shared<GaussianRandomWalk>(sigma, port);
}

}  // namespace modnet
