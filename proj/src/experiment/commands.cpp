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

#include "modnet/experiment/commands.hpp"

#include <atomic>
#include <exception>
#include <fstream>
#include <iostream>
#include <map>
#include <thread>

#include <spdlog/spdlog.h>

#include "modnet/apps/discrete_hmm.hpp"
#include "modnet/apps/outlier_regression.hpp"
#include "modnet/errors.hpp"
#include "modnet/oracle/enumeration.hpp"
#include "modnet/validation/acceptance.hpp"

namespace modnet::experiment {

using nlohmann::json;

std::vector<SiteProposal> build_schedule(const ModuleNetwork& net, const std::vector<ProposalSetting>& settings) {
  std::map<NodeId, SiteProposal> by_node;
  for (std::size_t k = 0; k < settings.size(); ++k) {
    const auto& s = settings[k];
    const std::string field = "proposals[" + std::to_string(k) + "]";
    NodeId id = 0;
    try {
      id = net.id_of(s.node);
    } catch (const NetworkError& e) {
      throw ConfigError(field + ".node", e.what());
    }
    if (net.observed(id)) throw ConfigError(field + ".node", "node '" + s.node + "' is observed");
    if (by_node.count(id)) throw ConfigError(field + ".node", "second proposal for node '" + s.node + "'");
    const auto& outs = net.module(id).signature().outputs;
    std::string port = s.port;
    if (port.empty()) {
      if (outs.size() != 1) throw ConfigError(field + ".port", "node has several outputs; name one");
      port = outs.front().name;
    }
    const int idx = net.module(id).signature().output_index(port);
    if (idx < 0) throw ConfigError(field + ".port", "no output '" + port + "'");
    const auto port_index = static_cast<std::size_t>(idx);
    ProposalPtr p;
    if (s.kind == "uniform") {
      if (s.cardinality < 1) throw ConfigError(field + ".cardinality", "must be at least 1");
      p = discrete_uniform_proposal(s.cardinality, port_index);
    } else if (s.kind == "flip") {
      p = flip_proposal(port_index);
    } else if (s.kind == "gaussian") {
      if (!(s.sigma > 0.0)) throw ConfigError(field + ".sigma", "must be positive");
      p = gaussian_random_walk(s.sigma, port_index);
    } else {
      throw ConfigError(field + ".kind", "expected uniform, flip or gaussian");
    }
    by_node.emplace(id, SiteProposal{id, std::move(p)});
  }
  std::vector<SiteProposal> schedule;
  for (NodeId i : net.unobserved()) {
    auto it = by_node.find(i);
    if (it == by_node.end()) throw ConfigError("proposals", "no proposal for unobserved node '" + net.name(i) + "'");
    schedule.push_back(it->second);
  }
  return schedule;
}

InferenceRun run_chains(const NetworkBlueprint& blueprint, const ChainPlan& plan) {
  InferenceRun run{blueprint.instantiate(), {}, {}};
  run.layout = trace_layout(run.reference);
  const auto schedule = build_schedule(run.reference, plan.proposals);
  run.chains.resize(plan.chains);
  std::vector<std::exception_ptr> errors(plan.chains);
  std::atomic<std::uint64_t> next{0};

  auto worker = [&] {
    for (std::uint64_t c = next++; c < plan.chains; c = next++) {
      try {
        ChainTrace& trace = run.chains[c];
        trace.seed = chain_seed(plan.seed, c);
        Rng rng(trace.seed);
        ModuleNetwork net = blueprint.instantiate();
        net.initialize(rng);
        trace.records.reserve(plan.iterations);
        trace.summary = run_chain(
            net, schedule, plan.iterations, rng, [&](const ChainRecord& r) { trace.records.push_back(r); },
            plan.scan);
        spdlog::debug("chain {} finished", c);
      } catch (...) {
        errors[c] = std::current_exception();
      }
    }
  };
  const auto n_threads = std::min<std::uint64_t>(plan.workers, plan.chains);
  std::vector<std::thread> pool;
  for (std::uint64_t t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return run;
}

NetworkBlueprint load_blueprint(const ExperimentConfig& config) {
  BuildContext ctx;
  Rng rng(build_seed(*config.seed));
  ctx.rng = &rng;
  ctx.particles = config.particles;
  ctx.train_samples = config.train_samples;
  if (!config.constants.empty()) ctx.constants = read_json_file(config.constants);
  const json doc = read_json_file(config.network);
  try {
    return blueprint_from_json(doc, ModuleRegistry::with_builtins(), ctx);
  } catch (const ConfigError& e) {
    throw ConfigError(config.network.filename().string() + ": " + e.field(), e.message());
  }
}

ChainPlan plan_from(const ExperimentConfig& config) {
  return {*config.seed, config.chains, config.iterations, config.workers, config.scan, config.proposals};
}

void write_trace(std::ostream& out, const InferenceRun& run) {
  out << run.layout.header() << '\n';
  for (std::size_t c = 0; c < run.chains.size(); ++c) {
    for (const auto& r : run.chains[c].records) write_trace_row(out, run.reference, c, r);
  }
}

namespace {

json weight_json(double w) { return std::isinf(w) ? json(nullptr) : json(w); }

struct Moments {
  std::uint64_t n = 0;
  double mean = 0.0;
  double m2 = 0.0;
  std::uint64_t impossible = 0;

  void add(double x) {
    if (std::isinf(x)) {
      ++impossible;
      return;
    }
    ++n;
    const double d = x - mean;
    mean += d / static_cast<double>(n);
    m2 += d * (x - mean);
  }
  json to_json() const {
    return {{"count", n},
            {"mean", n ? json(mean) : json(nullptr)},
            {"variance", n > 1 ? json(m2 / static_cast<double>(n - 1)) : json(nullptr)},
            {"impossible", impossible}};
  }
};

/// Columns holding a single discrete value, by position in ChainRecord::values.
std::vector<std::size_t> discrete_columns(const InferenceRun& run) {
  std::vector<std::size_t> cols;
  if (run.chains.empty() || run.chains.front().records.empty()) return cols;
  const auto& values = run.chains.front().records.front().values;
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (values[k].kind() == ValueKind::DiscreteInt) cols.push_back(k);
  }
  return cols;
}

json chain_stats(const std::vector<const ChainTrace*>& chains, const InferenceRun& run) {
  const auto cols = discrete_columns(run);
  std::map<std::string, std::map<std::string, std::uint64_t>> counts;
  std::map<std::string, std::map<std::string, std::vector<Moments>>> at_value;
  std::map<std::string, SiteCounts> sites;
  std::uint64_t total = 0;
  for (const auto* ch : chains) {
    for (const auto& [id, sc] : ch->summary.sites) {
      sites[run.reference.name(id)].proposed += sc.proposed;
      sites[run.reference.name(id)].accepted += sc.accepted;
    }
    for (const auto& r : ch->records) {
      ++total;
      for (std::size_t k : cols) {
        const std::string& col = run.layout.value_columns[k];
        const std::string v = std::to_string(r.values[k].as_discrete());
        ++counts[col][v];
        auto& m = at_value[col][v];
        if (m.empty()) m.resize(r.node_log_weights.size());
        for (std::size_t i = 0; i < r.node_log_weights.size(); ++i) m[i].add(r.node_log_weights[i]);
      }
    }
  }
  json out;
  json rates = json::object();
  for (const auto& [name, sc] : sites) {
    rates[name] = sc.proposed ? static_cast<double>(sc.accepted) / static_cast<double>(sc.proposed) : 0.0;
  }
  out["acceptance_rate"] = rates;
  json freq = json::object();
  for (const auto& [col, table] : counts) {
    for (const auto& [v, n] : table) freq[col][v] = static_cast<double>(n) / static_cast<double>(total);
  }
  out["value_frequencies"] = freq;
  json lw = json::object();
  for (const auto& [col, table] : at_value) {
    for (const auto& [v, ms] : table) {
      for (std::size_t i = 0; i < ms.size(); ++i) lw[col][v][run.reference.name(i)] = ms[i].to_json();
    }
  }
  out["log_weight_at_fixed_value"] = lw;
  out["records"] = total;
  return out;
}

}  // namespace

json summarize(const InferenceRun& run, const ChainPlan& plan) {
  json s;
  s["schema"] = "modnet-summary/1";
  s["trace_schema"] = kTraceSchema;
  s["seed"] = plan.seed;
  s["chains"] = plan.chains;
  s["iterations"] = plan.iterations;
  s["scan"] = plan.scan == ScanOrder::Random ? "random" : "cyclic";
  s["nodes"] = run.layout.node_names;
  std::vector<const ChainTrace*> all;
  for (const auto& c : run.chains) all.push_back(&c);
  s["pooled"] = chain_stats(all, run);
  json per_chain = json::array();
  for (std::size_t c = 0; c < run.chains.size(); ++c) {
    json entry = chain_stats({&run.chains[c]}, run);
    entry["seed"] = run.chains[c].seed;
    const auto& recs = run.chains[c].records;
    entry["final_total_log_weight"] = recs.empty() ? json(nullptr) : weight_json(recs.back().total_log_weight);
    per_chain.push_back(std::move(entry));
  }
  s["per_chain"] = per_chain;
  return s;
}

int cmd_infer(const ExperimentConfig& config) {
  const NetworkBlueprint bp = load_blueprint(config);
  const ChainPlan plan = plan_from(config);
  spdlog::info("running {} chain(s) of {} iterations on {} worker(s)", plan.chains, plan.iterations, plan.workers);
  const InferenceRun run = run_chains(bp, plan);
  std::filesystem::create_directories(config.out_dir);
  {
    std::ofstream csv(config.out_dir / "trace.csv");
    write_trace(csv, run);
  }
  {
    std::ofstream js(config.out_dir / "summary.json");
    js << summarize(run, plan).dump(2) << '\n';
  }
  spdlog::info("wrote {}", (config.out_dir / "trace.csv").string());
  return kExitOk;
}

namespace {

json regression_fixture(const json& model, const apps::OutlierConstants& c) {
  apps::Dataset d = apps::default_dataset();
  if (model.contains("covariates")) model.at("covariates").get_to(d.xs);
  if (model.contains("responses")) model.at("responses").get_to(d.bs);
  oracle::RegressionProblem pr{d.xs, d.bs, c.regression.prior_mean, c.regression.prior_variance,
                               c.regression.sigma_inlier, c.regression.sigma_outlier};
  const double l0 = oracle::log_regression_evidence(pr, c.regression.outlier_prob[0]);
  const double l1 = oracle::log_regression_evidence(pr, c.regression.outlier_prob[1]);
  const auto& s = c.switch_model;
  const auto prior = oracle::posterior(oracle::switch_chain_model(s.p_u1, s.p_u2, s.p_u3, s.p_a), {}, {3});
  const double pa1 = prior.probability_of({1});
  const double pa0 = prior.probability_of({0});
  // P(a=1 | b) = p(a=1) p(b|a=1) / sum_a p(a) p(b|a), in log space.
  const double hi = std::max(l0, l1);
  const double w0 = pa0 * std::exp(l0 - hi);
  const double w1 = pa1 * std::exp(l1 - hi);
  return {{"log_evidence", {l0, l1}}, {"prior_a", {pa0, pa1}}, {"posterior_a", {w0 / (w0 + w1), w1 / (w0 + w1)}}};
}

json switch_fixture(const apps::OutlierConstants& c) {
  const auto& s = c.switch_model;
  const auto d = oracle::posterior(oracle::switch_chain_model(s.p_u1, s.p_u2, s.p_u3, s.p_a), {}, {3});
  return {{"p_a", {d.probability_of({0}), d.probability_of({1})}}};
}

json hmm_fixture(const json& model) {
  const apps::HmmConstants h =
      model.contains("model") ? apps::hmm_constants_from_json(model.at("model")) : apps::default_hmm_constants();
  const std::vector<std::int64_t> obs = model.contains("observations")
                                            ? model.at("observations").get<std::vector<std::int64_t>>()
                                            : apps::default_hmm_observations();
  if (obs.size() != h.length) throw ConfigError("observations", "length differs from the model");
  json lps = json::array();
  for (const auto& row : h.initial) {
    const auto m = oracle::hidden_markov_model(row, h.transition, h.emission, h.length);
    oracle::Observation o;
    for (std::size_t t = 0; t < obs.size(); ++t) o[2 * t + 1] = static_cast<int>(obs[t]);
    lps.push_back(oracle::log_evidence(m, o));
  }
  return {{"observations", obs}, {"log_evidence", lps}};
}

}  // namespace

json compute_fixtures(const json& models, const json& constants) {
  const apps::OutlierConstants c = constants.is_null() ? apps::OutlierConstants{} : apps::constants_from_json(constants);
  json out = json::object();
  for (std::size_t k = 0; k < models.size(); ++k) {
    const std::string field = "oracle.models[" + std::to_string(k) + "]";
    const auto& m = models[k];
    if (!m.contains("name") || !m.contains("kind")) throw ConfigError(field, "needs 'name' and 'kind'");
    const auto name = m.at("name").get<std::string>();
    const auto kind = m.at("kind").get<std::string>();
    try {
      if (kind == "outlier_regression") {
        out[name] = regression_fixture(m, c);
      } else if (kind == "switch_model") {
        out[name] = switch_fixture(c);
      } else if (kind == "discrete_hmm") {
        out[name] = hmm_fixture(m);
      } else {
        throw ConfigError(field + ".kind", "unknown oracle model '" + kind + "'");
      }
    } catch (const json::exception& e) {
      throw ConfigError(field, e.what());
    } catch (const ConfigError& e) {
      throw ConfigError(e.field().rfind("oracle", 0) == 0 ? e.field() : field + "." + e.field(), e.message());
    }
  }
  return out;
}

int cmd_oracle(const ExperimentConfig& config) {
  if (config.fixtures.empty()) throw ConfigError("fixtures", "required");
  const json constants = config.constants.empty() ? json() : read_json_file(config.constants);
  const json fixtures = compute_fixtures(config.oracle_models, constants);
  if (config.fixtures.has_parent_path()) std::filesystem::create_directories(config.fixtures.parent_path());
  std::ofstream out(config.fixtures);
  out << fixtures.dump(2) << '\n';
  spdlog::info("wrote {}", config.fixtures.string());
  return kExitOk;
}

int cmd_validate(const ExperimentConfig& config, const ValidateOptions& options) {
  if (config.fixtures.empty()) throw ConfigError("fixtures", "required");
  validation::AcceptanceOptions opts;
  opts.fixtures = read_json_file(config.fixtures);
  opts.seed = *config.seed;
  opts.workers = config.workers;
  opts.out_dir = config.out_dir;
  opts.quick = options.quick;
  opts.criteria = options.criteria;
  const auto report = validation::run_acceptance(opts);
  validation::print_report(std::cout, report);
  return report.passed() ? kExitOk : kExitValidationFailure;
}

}  // namespace modnet::experiment
