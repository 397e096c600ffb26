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

#include "modnet/apps/outlier_regression.hpp"

#include <cmath>

#include "modnet/errors.hpp"

namespace modnet::apps {

OutlierConstants constants_from_json(const nlohmann::json& j) {
  OutlierConstants c;
  const auto& r = j.at("regression");
  r.at("prior_mean").get_to(c.regression.prior_mean);
  r.at("prior_variance").get_to(c.regression.prior_variance);
  r.at("outlier_prob").get_to(c.regression.outlier_prob);
  r.at("sigma_inlier").get_to(c.regression.sigma_inlier);
  r.at("sigma_outlier").get_to(c.regression.sigma_outlier);
  const auto& s = j.at("switch");
  s.at("p_u1").get_to(c.switch_model.p_u1);
  s.at("p_u2").get_to(c.switch_model.p_u2);
  s.at("p_u3").get_to(c.switch_model.p_u3);
  s.at("p_a").get_to(c.switch_model.p_a);
  if (!(c.regression.prior_variance[0] > 0.0 && c.regression.prior_variance[1] > 0.0)) {
    throw ConfigError("regression.prior_variance", "variances must be positive");
  }
  if (!(c.regression.sigma_inlier > 0.0 && c.regression.sigma_outlier > 0.0)) {
    throw ConfigError("regression.sigma_inlier", "noise scales must be positive");
  }
  return c;
}

nlohmann::json to_json(const OutlierConstants& c) {
  return {{"regression",
           {{"prior_mean", c.regression.prior_mean},
            {"prior_variance", c.regression.prior_variance},
            {"outlier_prob", c.regression.outlier_prob},
            {"sigma_inlier", c.regression.sigma_inlier},
            {"sigma_outlier", c.regression.sigma_outlier}}},
          {"switch",
           {{"p_u1", c.switch_model.p_u1},
            {"p_u2", c.switch_model.p_u2},
            {"p_u3", c.switch_model.p_u3},
            {"p_a", c.switch_model.p_a}}}};
}

ConjugateLineState ConjugateLineState::prior(const RegressionConstants& c) {
  ConjugateLineState s;
  s.mean = c.prior_mean;
  s.cov = {{{c.prior_variance[0], 0.0}, {0.0, c.prior_variance[1]}}};
  return s;
}

double ConjugateLineState::log_predictive(double x, double b, double sigma) const {
  const double s0 = cov[0][0] + cov[0][1] * x;
  const double s1 = cov[1][0] + cov[1][1] * x;
  const double var = s0 + s1 * x + sigma * sigma;
  return log_normal_pdf(b, mean[0] + mean[1] * x, std::sqrt(var));
}

void ConjugateLineState::update(double x, double b, double sigma) {
  // S phi
  const double s0 = cov[0][0] + cov[0][1] * x;
  const double s1 = cov[1][0] + cov[1][1] * x;
  const double var = s0 + s1 * x + sigma * sigma;
  const double resid = b - (mean[0] + mean[1] * x);
  const double k0 = s0 / var;
  const double k1 = s1 / var;
  mean[0] += k0 * resid;
  mean[1] += k1 * resid;
  cov[0][0] -= k0 * s0;
  cov[1][1] -= k1 * s1;
  const double off = cov[0][1] - k0 * s1;
  cov[0][1] = off;
  cov[1][0] = off;
}

bool ConjugateLineState::positive_definite(double tol) const {
  if (cov[0][1] != cov[1][0]) return false;
  const double tr = cov[0][0] + cov[1][1];
  const double det = cov[0][0] * cov[1][1] - cov[0][1] * cov[1][0];
  const double disc = std::sqrt(std::max(0.0, tr * tr / 4.0 - det));
  return tr / 2.0 - disc > tol;
}

ConjugateLineState batch_posterior(const RegressionConstants& c, const std::vector<double>& xs,
                                   const std::vector<double>& bs, const std::vector<double>& sigmas) {
  if (xs.size() != bs.size() || xs.size() != sigmas.size()) {
    throw ContractViolation("batch_posterior: length mismatch");
  }
  // Precision P = S0^-1 + sum phi phi^T / s^2; h = S0^-1 m0 + sum phi b / s^2.
  double p00 = 1.0 / c.prior_variance[0];
  double p11 = 1.0 / c.prior_variance[1];
  double p01 = 0.0;
  double h0 = c.prior_mean[0] / c.prior_variance[0];
  double h1 = c.prior_mean[1] / c.prior_variance[1];
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double w = 1.0 / (sigmas[i] * sigmas[i]);
    p00 += w;
    p01 += w * xs[i];
    p11 += w * xs[i] * xs[i];
    h0 += w * bs[i];
    h1 += w * xs[i] * bs[i];
  }
  const double det = p00 * p11 - p01 * p01;
  ConjugateLineState s;
  s.cov = {{{p11 / det, -p01 / det}, {-p01 / det, p00 / det}}};
  s.mean = {s.cov[0][0] * h0 + s.cov[0][1] * h1, s.cov[1][0] * h0 + s.cov[1][1] * h1};
  return s;
}

OutlierRegressionModel::OutlierRegressionModel(std::vector<double> covariates, RegressionConstants constants)
    : xs_(std::move(covariates)), c_(constants) {
  for (double x : xs_) {
    if (!std::isfinite(x)) throw ContractViolation("OutlierRegressionModel: non-finite covariate");
  }
  sig_.inputs.push_back({"a", ValueKind::DiscreteInt});
  sig_.outputs.push_back({"b", ValueKind::RealVector, static_cast<std::int64_t>(xs_.size())});
}

double OutlierRegressionModel::outlier_prob(const ModuleIO& x) const {
  const std::int64_t a = x[0].as_discrete();
  if (a != 0 && a != 1) throw ContractViolation("OutlierRegressionModel: input a must be 0 or 1");
  return c_.outlier_prob[static_cast<std::size_t>(a)];
}

Value OutlierRegressionModel::propose(State&, std::size_t, const ModuleIO& x, Rng& rng) const {
  return Value::discrete(bernoulli(rng, outlier_prob(x)) ? 1 : 0);
}

double OutlierRegressionModel::extend(State& s, std::size_t t, const ModuleIO&, const ModuleIO& z,
                                      const Value& indicator) const {
  const double sigma = indicator.as_discrete() == 1 ? c_.sigma_outlier : c_.sigma_inlier;
  const double b = z[0].as_real_vector()[t];
  const double lp = s.log_predictive(xs_[t], b, sigma);
  s.update(xs_[t], b, sigma);
  return lp;
}

namespace {

std::array<double, 2> sample_gaussian2(const std::array<double, 2>& mean,
                                       const std::array<std::array<double, 2>, 2>& cov, Rng& rng) {
  const double l00 = std::sqrt(cov[0][0]);
  const double l10 = cov[1][0] / l00;
  const double l11 = std::sqrt(std::max(0.0, cov[1][1] - l10 * l10));
  const double e0 = standard_normal(rng);
  const double e1 = standard_normal(rng);
  return {mean[0] + l00 * e0, mean[1] + l10 * e0 + l11 * e1};
}

}  // namespace

std::vector<double> OutlierRegressionModel::sample_globals(State& s, const ModuleIO&, const ModuleIO&,
                                                           Rng& rng) const {
  const auto line = sample_gaussian2(s.mean, s.cov, rng);
  return {line[0], line[1]};
}

std::pair<SmcLatents, ModuleIO> OutlierRegressionModel::sample_forward(const ModuleIO& x, Rng& rng) const {
  const double p = outlier_prob(x);
  const double intercept = normal(rng, c_.prior_mean[0], std::sqrt(c_.prior_variance[0]));
  const double slope = normal(rng, c_.prior_mean[1], std::sqrt(c_.prior_variance[1]));
  SmcLatents v;
  v.globals = {intercept, slope};
  std::vector<double> bs(xs_.size());
  for (std::size_t i = 0; i < xs_.size(); ++i) {
    const bool outlier = bernoulli(rng, p);
    v.trajectory.push_back(Value::discrete(outlier ? 1 : 0));
    bs[i] = normal(rng, intercept + slope * xs_[i], outlier ? c_.sigma_outlier : c_.sigma_inlier);
  }
  return {std::move(v), ModuleIO{Value::real_vector(std::move(bs))}};
}

std::shared_ptr<const SmcModule<OutlierRegressionModel>> build_module_b(std::vector<double> covariates,
                                                                        std::size_t particles,
                                                                        const RegressionConstants& constants) {
  auto model = std::make_shared<const OutlierRegressionModel>(std::move(covariates), constants);
  return make_smc_module(std::move(model), particles, "outlier_regression");
}

DiscreteModelSpec switch_model_spec(const SwitchConstants& c) {
  auto bern_row = [](double p) { return std::vector<double>{1.0 - p, p}; };
  DiscreteModelSpec spec;
  spec.variables = {
      {"u1", 2, {}, {bern_row(c.p_u1)}},
      {"u2", 2, {0}, {bern_row(c.p_u2[0]), bern_row(c.p_u2[1])}},
      {"u3", 2, {1}, {bern_row(c.p_u3[0]), bern_row(c.p_u3[1])}},
      {"a", 2, {2}, {bern_row(c.p_a[0]), bern_row(c.p_a[1])}},
  };
  spec.outputs = {3};
  spec.validate();
  return spec;
}

ModulePtr build_module_a(std::uint64_t n_train, Rng& rng, const SwitchConstants& constants, double smoothing) {
  auto spec = std::make_shared<const DiscreteModelSpec>(switch_model_spec(constants));
  auto inv = std::make_shared<const InverseNetwork>(train_inverse(*spec, n_train, smoothing, rng));
  return make_inverse_module(std::move(spec), std::move(inv), "outlier_prior");
}

Dataset generate_dataset(std::uint64_t seed, const RegressionConstants& c) {
  Rng rng(seed);
  Dataset d;
  d.seed = seed;
  d.outliers = {2, 6};
  d.intercept = normal(rng, c.prior_mean[0], std::sqrt(c.prior_variance[0]));
  d.slope = normal(rng, c.prior_mean[1], std::sqrt(c.prior_variance[1]));
  for (int i = 0; i < 9; ++i) {
    const double x = -1.0 + 0.25 * i;
    const bool outlier = i == 2 || i == 6;
    d.xs.push_back(x);
    d.bs.push_back(normal(rng, d.intercept + d.slope * x, outlier ? c.sigma_outlier : c.sigma_inlier));
  }
  return d;
}

Dataset default_dataset() {
  Dataset d;
  d.seed = kDatasetSeed;
  d.outliers = {2, 6};
  d.intercept = 0.83393737407373891;
  d.slope = 0.029590281556698118;
  d.xs = {-1.0, -0.75, -0.5, -0.25, 0.0, 0.25, 0.5, 0.75, 1.0};
  d.bs = {0.87728442555915542, 0.53687295070438767, 4.9727709845041259,
          0.85790159552058409, 1.0431518161620743,  0.88947043671205028,
          1.8765510349602601,  0.89278486130983803, 1.2151246988823745};
  return d;
}

OutlierNetwork assemble_outlier_network(ModulePtr module_a, ModulePtr module_b, const Dataset& data) {
  std::vector<NodeSpec> nodes{{"A", std::move(module_a)}, {"B", std::move(module_b)}};
  std::vector<EdgeSpec> edges{{"A", "a", "B", "a"}};
  std::vector<ObservationSpec> obs{{"B", {{"b", Value::real_vector(data.bs)}}}};
  OutlierNetwork out{ModuleNetwork::build(std::move(nodes), edges, obs), {}};
  out.schedule.push_back({out.network.id_of("A"), discrete_uniform_proposal(2)});
  return out;
}

OutlierNetwork build_outlier_network(std::size_t particles, std::uint64_t n_train, Rng& rng, const OutlierConstants& c,
                               const Dataset& data) {
  ModulePtr a = build_module_a(n_train, rng, c.switch_model);
  ModulePtr b = build_module_b(data.xs, particles, c.regression);
  return assemble_outlier_network(std::move(a), std::move(b), data);
}

}  // namespace modnet::apps
