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

// Brute-force reference computations for small models. Nothing here depends
// on the inference engine, so the two can be checked against each other.

#include <array>
#include <cstddef>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace modnet::oracle {

class OracleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::size_t kMaxConfigurations = std::size_t{1} << 20;

struct Variable {
  std::string name;
  int cardinality = 2;
  std::vector<std::size_t> parents;  ///< earlier variables
  std::vector<std::vector<double>> cpt;  ///< rows in mixed radix of parents, first most significant
};

/// Discrete variables in topological order, optionally times a continuous
/// leaf whose density given the discrete configuration is known in closed form.
struct FactoredDiscreteModel {
  std::vector<Variable> variables;
  /// log density of the continuous observation given a full discrete configuration.
  std::function<double(const std::vector<int>&)> continuous_leaf;

  void validate() const;
  std::size_t configurations() const;
  std::size_t index_of(const std::string& name) const;
};

struct JointRow {
  std::vector<int> config;
  double probability;
};

/// Every configuration with its probability (times the leaf density, if any).
std::vector<JointRow> enumerate_joint(const FactoredDiscreteModel& model);

/// variable index -> observed value
using Observation = std::map<std::size_t, int>;

double log_evidence(const FactoredDiscreteModel& model, const Observation& obs);
double evidence(const FactoredDiscreteModel& model, const Observation& obs);

struct Distribution {
  std::vector<std::size_t> variables;
  std::vector<std::vector<int>> configs;
  std::vector<double> probabilities;

  double probability_of(const std::vector<int>& config) const;
  double total() const;
};

/// Exact conditional of `query` given `obs`. Throws OracleError when the
/// observation has probability zero.
Distribution posterior(const FactoredDiscreteModel& model, const Observation& obs,
                       const std::vector<std::size_t>& query);

double total_variation(const Distribution& p, const std::map<std::vector<int>, double>& q);

// ---- linear regression with outlier indicators ----------------------------

struct RegressionProblem {
  std::vector<double> xs;
  std::vector<double> bs;
  std::array<double, 2> prior_mean{0.0, 0.0};
  std::array<double, 2> prior_variance{1.0, 0.25};
  double sigma_inlier = 0.22;
  double sigma_outlier = 3.16;
};

/// log N(b; Phi m0, Phi S0 Phi^T + diag(sigma_i^2)) with the line integrated
/// out, via the matrix determinant lemma and Woodbury identity (2x2 only).
double log_marginal_likelihood(const RegressionProblem& problem, const std::vector<int>& indicators);

/// log p(b; a): sum over all 2^n indicator vectors of prior times marginal likelihood.
double log_regression_evidence(const RegressionProblem& problem, double outlier_prob);

/// Discrete model over u1, u2, u3, a (binary chain) with CPT rows given as
/// P(child = 1 | parent = 0/1).
FactoredDiscreteModel switch_chain_model(double p_u1, std::array<double, 2> p_u2, std::array<double, 2> p_u3,
                                         std::array<double, 2> p_a);

/// Hidden Markov chain with variables ordered h_0, o_0, h_1, o_1, ...
FactoredDiscreteModel hidden_markov_model(const std::vector<double>& initial,
                                          const std::vector<std::vector<double>>& transition,
                                          const std::vector<std::vector<double>>& emission, std::size_t length);

}  // namespace modnet::oracle
