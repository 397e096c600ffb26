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

#include <any>
#include <cstdint>
#include <memory>
#include <string>

#include "modnet/random.hpp"
#include "modnet/value.hpp"

namespace modnet {

/// Auxiliary variables u of one module instance. Opaque to everything but the
/// module that produced it; `sequence` identifies the producing call.
class AuxState {
 public:
  AuxState() = default;
  explicit AuxState(std::any payload) : payload_(std::move(payload)) {}

  bool empty() const noexcept { return !payload_.has_value(); }
  std::uint64_t sequence() const noexcept { return sequence_; }

  /// Only meaningful to the producing module. Returns nullptr on type mismatch.
  template <class T>
  const T* get() const noexcept {
    return std::any_cast<T>(&payload_);
  }

 private:
  friend class ProbModule;

  std::any payload_;
  std::uint64_t sequence_ = 0;
};

/// Result of regenerate: log p(u,z;x) - log q(u;x,z) paired with the sampled u.
struct Regeneration {
  LogWeight weight;
  AuxState aux;
};

/// Result of simulate: (u, z) ~ p(u,z;x) with the same log-weight.
struct Simulation {
  ModuleIO outputs;
  LogWeight weight;
  AuxState aux;
};

/// The probabilistic module contract. Implementations override the do_*
/// hooks; the public entry points check schemas and stamp AuxState with a
/// process-wide call sequence number so (weight, aux) pairing is auditable.
///
/// Both calls are const: a module has no observable side effects beyond its
/// return values, so a single instance may back many network nodes and chains.
class ProbModule {
 public:
  virtual ~ProbModule() = default;

  virtual const Signature& signature() const = 0;
  virtual std::string type_name() const = 0;

  Simulation simulate(const ModuleIO& inputs, Rng& rng) const;
  Regeneration regenerate(const ModuleIO& inputs, const ModuleIO& outputs, Rng& rng) const;

 protected:
  virtual Simulation do_simulate(const ModuleIO& inputs, Rng& rng) const = 0;
  virtual Regeneration do_regenerate(const ModuleIO& inputs, const ModuleIO& outputs, Rng& rng) const = 0;

 private:
  static void stamp(AuxState& aux);
};

using ModulePtr = std::shared_ptr<const ProbModule>;

}  // namespace modnet
