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

#include <array>
#include <cstdint>
#include <memory>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "modnet/inverse.hpp"
#include "modnet/mh.hpp"
#include "modnet/network.hpp"
#include "modnet/smc.hpp"

namespace modnet::apps {

/// Module B: line (intercept, slope) ~ N(prior_mean, diag(prior_variance));
/// indicator_i ~ Bernoulli(outlier_prob[a]);
/// b_i ~ N(intercept + slope * x_i, indicator_i ? sigma_outlier : sigma_inlier).
struct RegressionConstants {
  std::array<double, 2> prior_mean{0.0, 0.0};
  std::array<double, 2> prior_variance{1.0, 0.25};
  std::array<double, 2> outlier_prob{0.01, 0.1};
  double sigma_inlier = 0.22;
  double sigma_outlier = 3.16;
};

/// Module A: u1 -> u2 -> u3 -> a, all binary. Each pair holds
/// P(child = 1 | parent = 0), P(child = 1 | parent = 1).
struct SwitchConstants {
  double p_u1 = 0.5;
  std::array<double, 2> p_u2{0.2, 0.7};
  std::array<double, 2> p_u3{0.1, 0.9};
  std::array<double, 2> p_a{0.15, 0.8};
};

struct OutlierConstants {
  RegressionConstants regression;
  SwitchConstants switch_model;
};

OutlierConstants constants_from_json(const nlohmann::json& j);
nlohmann::json to_json(const OutlierConstants& c);

/// Gaussian posterior over (intercept, slope) given a prefix of the data and
/// the indicators chosen for it.
struct ConjugateLineState {
  std::array<double, 2> mean{};
  std::array<std::array<double, 2>, 2> cov{};

  static ConjugateLineState prior(const RegressionConstants& c);

  /// log N(b; mean . [1, x], [1, x] cov [1, x]^T + sigma^2)
  double log_predictive(double x, double b, double sigma) const;
  /// Conditions on b observed at x with noise sd sigma.
  void update(double x, double b, double sigma);
  /// Both eigenvalues exceed `tol` and cov is symmetric.
  bool positive_definite(double tol = 1e-10) const;
};

/// Posterior from all points at once: S = (S0^-1 + sum phi phi^T / s^2)^-1,
/// m = S (S0^-1 m0 + sum phi b / s^2).
ConjugateLineState batch_posterior(const RegressionConstants& c, const std::vector<double>& xs,
                                   const std::vector<double>& bs, const std::vector<double>& sigmas);

/// Regression with outlier indicators as a sequential model. The line is
/// integrated out while the indicators are swept and drawn exactly from its
/// conjugate posterior at the end (globals = {intercept, slope}).
class OutlierRegressionModel {
 public:
  using State = ConjugateLineState;

  OutlierRegressionModel(std::vector<double> covariates, RegressionConstants constants);

  const Signature& signature() const noexcept { return sig_; }
  const std::vector<double>& covariates() const noexcept { return xs_; }
  const RegressionConstants& constants() const noexcept { return c_; }

  std::size_t num_steps(const ModuleIO&, const ModuleIO&) const noexcept { return xs_.size(); }
  State initial_state(const ModuleIO&) const { return ConjugateLineState::prior(c_); }
  Value propose(State& s, std::size_t t, const ModuleIO& x, Rng& rng) const;
  double extend(State& s, std::size_t t, const ModuleIO& x, const ModuleIO& z, const Value& indicator) const;
  std::vector<double> sample_globals(State& s, const ModuleIO& x, const ModuleIO& z, Rng& rng) const;
  std::pair<SmcLatents, ModuleIO> sample_forward(const ModuleIO& x, Rng& rng) const;

  double outlier_prob(const ModuleIO& x) const;

 private:
  std::vector<double> xs_;
  RegressionConstants c_;
  Signature sig_;
};

static_assert(SequentialModel<OutlierRegressionModel>);

/// Module B: input "a", output "b" (one response per covariate), SMC regeneration.
std::shared_ptr<const SmcModule<OutlierRegressionModel>> build_module_b(std::vector<double> covariates,
                                                                        std::size_t particles,
                                                                        const RegressionConstants& constants);

/// Module A's internal model: variables u1, u2, u3, a with a the output.
DiscreteModelSpec switch_model_spec(const SwitchConstants& c);

/// Module A: switch model with an inverse trained on `n_train` prior samples.
ModulePtr build_module_a(std::uint64_t n_train, Rng& rng, const SwitchConstants& constants = {},
                         double smoothing = 1.0);

struct Dataset {
  std::vector<double> xs;
  std::vector<double> bs;
  std::uint64_t seed = 0;
  double intercept = 0.0;
  double slope = 0.0;
  std::vector<std::size_t> outliers;
};

/// Nine evenly spaced covariates on [-1, 1]; line from the prior; points 2
/// and 6 (zero-based) forced to be outliers; remaining noise drawn from the
/// model. Uses only std::mt19937_64 output and libm so it is reproducible.
Dataset generate_dataset(std::uint64_t seed, const RegressionConstants& c = {});

/// The frozen dataset used by the experiments, equal to generate_dataset(kDatasetSeed).
Dataset default_dataset();

inline constexpr std::uint64_t kDatasetSeed = 2019;

struct OutlierNetwork {
  ModuleNetwork network;
  std::vector<SiteProposal> schedule;
};

/// A -> B with B observed at `data.bs`; one MH site on a with a uniform
/// {0, 1} proposal.
OutlierNetwork build_outlier_network(std::size_t particles, std::uint64_t n_train, Rng& rng, const OutlierConstants& c,
                               const Dataset& data);

/// Same network around pre-built modules.
OutlierNetwork assemble_outlier_network(ModulePtr module_a, ModulePtr module_b, const Dataset& data);

}  // namespace modnet::apps
