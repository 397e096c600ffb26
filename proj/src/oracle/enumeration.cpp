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

#include "modnet/oracle/enumeration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace modnet::oracle {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double logaddexp(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

bool advance(std::vector<int>& config, const std::vector<Variable>& vars) {
  for (std::size_t i = config.size(); i-- > 0;) {
    if (++config[i] < vars[i].cardinality) return true;
    config[i] = 0;
  }
  return false;
}

double log_prior(const FactoredDiscreteModel& model, const std::vector<int>& config) {
  double lp = 0.0;
  for (std::size_t v = 0; v < model.variables.size(); ++v) {
    const auto& var = model.variables[v];
    std::size_t row = 0;
    for (std::size_t p : var.parents) {
      row = row * static_cast<std::size_t>(model.variables[p].cardinality) + static_cast<std::size_t>(config[p]);
    }
    const double prob = var.cpt[row][static_cast<std::size_t>(config[v])];
    if (prob == 0.0) return kNegInf;
    lp += std::log(prob);
  }
  return lp;
}

/// Calls fn(config, log_weight) for every configuration consistent with obs.
template <class Fn>
void for_each_config(const FactoredDiscreteModel& model, const Observation& obs, Fn&& fn) {
  model.validate();
  for (const auto& [var, value] : obs) {
    if (var >= model.variables.size() || value < 0 || value >= model.variables[var].cardinality) {
      throw OracleError("observation outside the model");
    }
  }
  std::vector<int> config(model.variables.size(), 0);
  do {
    bool consistent = true;
    for (const auto& [var, value] : obs) {
      if (config[var] != value) {
        consistent = false;
        break;
      }
    }
    if (!consistent) continue;
    double lw = log_prior(model, config);
    if (lw != kNegInf && model.continuous_leaf) lw += model.continuous_leaf(config);
    fn(config, lw);
  } while (advance(config, model.variables));
}

}  // namespace

void FactoredDiscreteModel::validate() const {
  for (std::size_t v = 0; v < variables.size(); ++v) {
    const auto& var = variables[v];
    if (var.cardinality < 1) throw OracleError("variable '" + var.name + "' has no values");
    std::size_t rows = 1;
    for (std::size_t p : var.parents) {
      if (p >= v) throw OracleError("variable '" + var.name + "' has a parent later in order");
      rows *= static_cast<std::size_t>(variables[p].cardinality);
    }
    if (var.cpt.size() != rows) throw OracleError("variable '" + var.name + "' has the wrong number of CPT rows");
    for (const auto& row : var.cpt) {
      if (row.size() != static_cast<std::size_t>(var.cardinality)) {
        throw OracleError("variable '" + var.name + "' has a CPT row of the wrong width");
      }
      double total = 0.0;
      for (double p : row) total += p;
      if (std::abs(total - 1.0) > 1e-12) throw OracleError("variable '" + var.name + "' CPT row does not sum to 1");
    }
  }
  configurations();
}

std::size_t FactoredDiscreteModel::configurations() const {
  std::size_t n = 1;
  for (const auto& v : variables) {
    n *= static_cast<std::size_t>(v.cardinality);
    if (n > kMaxConfigurations) throw OracleError("state space too large to enumerate");
  }
  return n;
}

std::size_t FactoredDiscreteModel::index_of(const std::string& name) const {
  for (std::size_t v = 0; v < variables.size(); ++v) {
    if (variables[v].name == name) return v;
  }
  throw OracleError("no variable named '" + name + "'");
}

std::vector<JointRow> enumerate_joint(const FactoredDiscreteModel& model) {
  std::vector<JointRow> rows;
  for_each_config(model, {}, [&](const std::vector<int>& c, double lw) { rows.push_back({c, std::exp(lw)}); });
  return rows;
}

double log_evidence(const FactoredDiscreteModel& model, const Observation& obs) {
  double acc = kNegInf;
  for_each_config(model, obs, [&](const std::vector<int>&, double lw) { acc = logaddexp(acc, lw); });
  return acc;
}

double evidence(const FactoredDiscreteModel& model, const Observation& obs) { return std::exp(log_evidence(model, obs)); }

double Distribution::probability_of(const std::vector<int>& config) const {
  for (std::size_t i = 0; i < configs.size(); ++i) {
    if (configs[i] == config) return probabilities[i];
  }
  return 0.0;
}

double Distribution::total() const {
  double t = 0.0;
  for (double p : probabilities) t += p;
  return t;
}

Distribution posterior(const FactoredDiscreteModel& model, const Observation& obs,
                       const std::vector<std::size_t>& query) {
  for (std::size_t q : query) {
    if (q >= model.variables.size()) throw OracleError("query variable out of range");
  }
  std::map<std::vector<int>, double> log_mass;
  double log_total = kNegInf;
  for_each_config(model, obs, [&](const std::vector<int>& c, double lw) {
    std::vector<int> key;
    for (std::size_t q : query) key.push_back(c[q]);
    auto [it, fresh] = log_mass.try_emplace(key, kNegInf);
    it->second = logaddexp(it->second, lw);
    log_total = logaddexp(log_total, lw);
  });
  if (log_total == kNegInf) throw OracleError("observation has probability zero; conditional undefined");
  Distribution d;
  d.variables = query;
  for (const auto& [key, lm] : log_mass) {
    d.configs.push_back(key);
    d.probabilities.push_back(std::exp(lm - log_total));
  }
  return d;
}

double total_variation(const Distribution& p, const std::map<std::vector<int>, double>& q) {
  double tv = 0.0;
  for (std::size_t i = 0; i < p.configs.size(); ++i) {
    auto it = q.find(p.configs[i]);
    tv += std::abs(p.probabilities[i] - (it == q.end() ? 0.0 : it->second));
  }
  for (const auto& [config, prob] : q) {
    if (std::find(p.configs.begin(), p.configs.end(), config) == p.configs.end()) tv += prob;
  }
  return tv / 2.0;
}

double log_marginal_likelihood(const RegressionProblem& problem, const std::vector<int>& indicators) {
  const std::size_t n = problem.xs.size();
  if (problem.bs.size() != n || indicators.size() != n) throw OracleError("regression: length mismatch");
  // A = S0^-1 + Phi^T D^-1 Phi, g = Phi^T D^-1 r, r = b - Phi m0.
  double a00 = 1.0 / problem.prior_variance[0];
  double a11 = 1.0 / problem.prior_variance[1];
  double a01 = 0.0;
  double g0 = 0.0;
  double g1 = 0.0;
  double log_det_d = 0.0;
  double quad_d = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double sigma = indicators[i] ? problem.sigma_outlier : problem.sigma_inlier;
    const double var = sigma * sigma;
    const double x = problem.xs[i];
    const double r = problem.bs[i] - (problem.prior_mean[0] + problem.prior_mean[1] * x);
    a00 += 1.0 / var;
    a01 += x / var;
    a11 += x * x / var;
    g0 += r / var;
    g1 += x * r / var;
    log_det_d += std::log(var);
    quad_d += r * r / var;
  }
  const double det_a = a00 * a11 - a01 * a01;
  const double log_det_c = log_det_d + std::log(problem.prior_variance[0] * problem.prior_variance[1]) + std::log(det_a);
  // g^T A^-1 g with A^-1 = [a11 -a01; -a01 a00] / det_a
  const double correction = (a11 * g0 * g0 - 2.0 * a01 * g0 * g1 + a00 * g1 * g1) / det_a;
  const double quad = quad_d - correction;
  return -0.5 * (static_cast<double>(n) * std::log(2.0 * std::numbers::pi) + log_det_c + quad);
}

double log_regression_evidence(const RegressionProblem& problem, double outlier_prob) {
  const std::size_t n = problem.xs.size();
  if (n > 20) throw OracleError("regression: too many points to enumerate");
  double acc = kNegInf;
  std::vector<int> ind(n, 0);
  for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
    double lp = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      ind[i] = static_cast<int>((mask >> i) & 1U);
      lp += std::log(ind[i] ? outlier_prob : 1.0 - outlier_prob);
    }
    acc = logaddexp(acc, lp + log_marginal_likelihood(problem, ind));
  }
  return acc;
}

FactoredDiscreteModel switch_chain_model(double p_u1, std::array<double, 2> p_u2, std::array<double, 2> p_u3,
                                         std::array<double, 2> p_a) {
  auto row = [](double p) { return std::vector<double>{1.0 - p, p}; };
  FactoredDiscreteModel m;
  m.variables = {
      {"u1", 2, {}, {row(p_u1)}},
      {"u2", 2, {0}, {row(p_u2[0]), row(p_u2[1])}},
      {"u3", 2, {1}, {row(p_u3[0]), row(p_u3[1])}},
      {"a", 2, {2}, {row(p_a[0]), row(p_a[1])}},
  };
  return m;
}

FactoredDiscreteModel hidden_markov_model(const std::vector<double>& initial,
                                          const std::vector<std::vector<double>>& transition,
                                          const std::vector<std::vector<double>>& emission, std::size_t length) {
  const int states = static_cast<int>(initial.size());
  const int symbols = emission.empty() ? 0 : static_cast<int>(emission.front().size());
  FactoredDiscreteModel m;
  for (std::size_t t = 0; t < length; ++t) {
    const std::string suffix = std::to_string(t);
    if (t == 0) {
      m.variables.push_back({"h" + suffix, states, {}, {initial}});
    } else {
      m.variables.push_back({"h" + suffix, states, {2 * t - 2}, transition});
    }
    m.variables.push_back({"o" + suffix, symbols, {2 * t}, emission});
  }
  return m;
}

}  // namespace modnet::oracle
