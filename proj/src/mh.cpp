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

#include "modnet/mh.hpp"

#include <cmath>
#include <limits>

#include "modnet/errors.hpp"

namespace modnet {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

bool AcceptanceDecision::impossible() const {
  if (log_r_reverse == -kInf) return true;
  for (double w : new_weights) {
    if (w == -kInf) return true;
  }
  return false;
}

double assemble_log_alpha(const AcceptanceDecision& d) {
  if (d.impossible()) return -kInf;
  double log_alpha = d.log_r_reverse - d.log_r_forward;
  for (std::size_t k = 0; k < d.touched.size(); ++k) {
    if (d.old_weights[k] == -kInf) return kInf;
    log_alpha += d.new_weights[k] - d.old_weights[k];
  }
  return log_alpha;
}

AcceptanceDecision mh_update(ModuleNetwork& net, const SiteProposal& site, Rng& rng) {
  const NodeId i = site.target;
  if (net.observed(i)) throw ContractViolation("mh_update: node '" + net.name(i) + "' is observed");
  if (!site.proposal) throw ContractViolation("mh_update: missing proposal");

  const ModuleIO current = net.outputs(i);
  const ModuleIO proposed = site.proposal->propose(current, rng);

  AcceptanceDecision d;
  d.log_r_reverse = site.proposal->log_density(current, proposed);
  d.log_r_forward = site.proposal->log_density(proposed, current);
  d.touched.push_back(i);
  d.touched.insert(d.touched.end(), net.children(i).begin(), net.children(i).end());

  std::vector<Regeneration> fresh;
  fresh.reserve(d.touched.size());
  for (NodeId j : d.touched) {
    d.old_weights.push_back(net.lookup_log_weight(j).value());
    const ModuleIO x = net.inputs_with(j, i, proposed);
    Regeneration r = net.module(j).regenerate(x, j == i ? proposed : net.outputs(j), rng);
    d.new_weights.push_back(r.weight.value());
    fresh.push_back(std::move(r));
  }

  d.log_alpha = assemble_log_alpha(d);
  d.log_u = std::log(uniform_open01(rng));
  d.accepted = d.log_alpha != -kInf && d.log_u <= d.log_alpha;

  if (d.accepted) {
    net.set_outputs(i, proposed);
    for (std::size_t k = 0; k < d.touched.size(); ++k) net.update_log_weight(d.touched[k], std::move(fresh[k]));
  }
  return d;
}

ChainRecord make_record(const ModuleNetwork& net, std::uint64_t iteration, const AcceptanceDecision& d, NodeId site) {
  ChainRecord rec;
  rec.iteration = iteration;
  rec.site = site;
  rec.accepted = d.accepted;
  rec.proposal_impossible = d.impossible();
  rec.node_log_weights.reserve(net.size());
  LogWeight total;
  for (NodeId j = 0; j < net.size(); ++j) {
    const LogWeight w = net.lookup_log_weight(j);
    rec.node_log_weights.push_back(w.value());
    total += w;
  }
  rec.total_log_weight = total.value();
  for (NodeId j : net.unobserved()) {
    for (const Value& v : net.outputs(j)) rec.values.push_back(v);
  }
  return rec;
}

ChainSummary run_chain(ModuleNetwork& net, const std::vector<SiteProposal>& schedule, std::uint64_t n_iters,
                       Rng& rng, const RecordSink& sink, ScanOrder scan) {
  if (schedule.empty()) throw ContractViolation("run_chain: empty schedule");
  for (const auto& s : schedule) {
    if (net.observed(s.target)) throw ContractViolation("run_chain: node '" + net.name(s.target) + "' is observed");
  }
  if (!net.initialized()) throw ContractViolation("run_chain: network is not initialized");

  ChainSummary summary;
  for (const auto& s : schedule) summary.sites[s.target];
  for (std::uint64_t it = 0; it < n_iters; ++it) {
    const std::size_t pick = scan == ScanOrder::Random ? uniform_index(rng, schedule.size())
                                                       : static_cast<std::size_t>(it % schedule.size());
    const SiteProposal& site = schedule[pick];
    const AcceptanceDecision d = mh_update(net, site, rng);
    auto& counts = summary.sites[site.target];
    ++counts.proposed;
    if (d.accepted) ++counts.accepted;
    ++summary.iterations;
    if (sink) sink(make_record(net, it, d, site.target));
  }
  return summary;
}

AcceptanceStats acceptance_stats(const std::vector<ChainRecord>& records) {
  if (records.empty()) throw ContractViolation("acceptance_stats: no records");
  AcceptanceStats stats;
  std::map<NodeId, SiteCounts> counts;
  const std::size_t n_nodes = records.front().node_log_weights.size();
  std::vector<std::uint64_t> finite(n_nodes, 0);
  // Welford per node.
  std::vector<double> mean(n_nodes, 0.0), m2(n_nodes, 0.0);
  for (const auto& r : records) {
    auto& c = counts[r.site];
    ++c.proposed;
    if (r.accepted) ++c.accepted;
    if (r.proposal_impossible) ++stats.impossible_proposals;
    for (std::size_t j = 0; j < n_nodes && j < r.node_log_weights.size(); ++j) {
      const double w = r.node_log_weights[j];
      if (!std::isfinite(w)) continue;
      ++finite[j];
      const double delta = w - mean[j];
      mean[j] += delta / static_cast<double>(finite[j]);
      m2[j] += delta * (w - mean[j]);
    }
  }
  for (const auto& [site, c] : counts) {
    stats.acceptance_rate[site] = static_cast<double>(c.accepted) / static_cast<double>(c.proposed);
  }
  for (std::size_t j = 0; j < n_nodes; ++j) {
    stats.node_log_weight.push_back(
        {mean[j], finite[j] > 1 ? m2[j] / static_cast<double>(finite[j] - 1) : 0.0});
  }
  return stats;
}

}  // namespace modnet
