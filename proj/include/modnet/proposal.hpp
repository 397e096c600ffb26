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

#include <cstdint>
#include <memory>
#include <string>

#include "modnet/value.hpp"
#include "modnet/random.hpp"

namespace modnet {

/// Proposal kernel r(z'; z) over one output port of a node; other ports are
/// carried over unchanged.
class Proposal {
 public:
  virtual ~Proposal() = default;

  virtual ModuleIO propose(const ModuleIO& current, Rng& rng) const = 0;
  /// log r(to; from).
  virtual double log_density(const ModuleIO& to, const ModuleIO& from) const = 0;
  virtual std::string name() const = 0;
};

using ProposalPtr = std::shared_ptr<const Proposal>;

/// Deterministic 0 <-> 1 toggle on a binary discrete port.
ProposalPtr flip_proposal(std::size_t port = 0);

/// Independent uniform draw over {0, .., cardinality - 1}; may propose the current value.
ProposalPtr discrete_uniform_proposal(std::int64_t cardinality, std::size_t port = 0);

/// Symmetric Gaussian random walk on a real port.
ProposalPtr gaussian_random_walk(double sigma, std::size_t port = 0);

}  // namespace modnet
