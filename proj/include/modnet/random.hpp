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

#include <cmath>
#include <cstdint>
#include <random>
#include <span>

namespace modnet {

/// Every stochastic call takes the caller's engine; modules keep no RNG state.
using Rng = std::mt19937_64;

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Seed for chain `index` under `master`: mix64(mix64(master) ^ (index + 1)).
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  return mix64(mix64(master) ^ (index + 1));
}

/// Uniform on [0, 1) with 53 random bits.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

/// Uniform on the open interval (0, 1); safe to take the log of.
inline double uniform_open01(Rng& rng) { return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53; }

/// Box-Muller draw, one variate per call.
double standard_normal(Rng& rng);

inline double normal(Rng& rng, double mean, double sd) { return mean + sd * standard_normal(rng); }

inline bool bernoulli(Rng& rng, double p) { return uniform01(rng) < p; }

/// Index drawn with probability proportional to `weights` (non-negative, positive sum).
std::size_t categorical(Rng& rng, std::span<const double> weights);

/// Index drawn proportional to exp(log_weights). Requires at least one finite entry.
std::size_t categorical_log(Rng& rng, std::span<const double> log_weights);

/// Uniform integer in [0, n).
std::size_t uniform_index(Rng& rng, std::size_t n);

/// Max-shifted log(sum(exp(x))); -inf for empty input or all -inf.
double log_sum_exp(std::span<const double> xs);

inline double log_mean_exp(std::span<const double> xs) {
  return log_sum_exp(xs) - std::log(static_cast<double>(xs.size()));
}

double log_normal_pdf(double x, double mean, double sd);

}  // namespace modnet
