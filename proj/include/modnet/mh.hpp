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
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "modnet/network.hpp"
#include "modnet/proposal.hpp"

namespace modnet {

struct SiteProposal {
  NodeId target;
  ProposalPtr proposal;
};

/// Inputs and outcome of one acceptance test.
struct AcceptanceDecision {
  double log_r_reverse = 0.0;  ///< log r(z_i; z_i')
  double log_r_forward = 0.0;  ///< log r(z_i'; z_i)
  std::vector<NodeId> touched;  ///< {i} followed by c_i
  std::vector<double> old_weights;
  std::vector<double> new_weights;
  double log_alpha = 0.0;
  double log_u = 0.0;
  bool accepted = false;

  /// True when some proposed weight or the reverse proposal density is zero.
  bool impossible() const;
};

/// Assembles log alpha from its terms. -inf when the proposal is impossible,
/// +inf when it revives a stored -inf weight.
double assemble_log_alpha(const AcceptanceDecision& d);

/// One application of the single-site update to node `site.target`.
///
/// Proposes z_i' ~ r(.; z_i), regenerates node i and each child against the
/// substituted inputs, then draws a single uniform and accepts iff
/// log u <= log alpha. On acceptance z_i and every touched (weight, aux)
/// pair are replaced; on rejection the network is not modified.
AcceptanceDecision mh_update(ModuleNetwork& net, const SiteProposal& site, Rng& rng);

struct ChainRecord {
  std::uint64_t iteration = 0;
  NodeId site = 0;
  bool accepted = false;
  bool proposal_impossible = false;
  std::vector<double> node_log_weights;  ///< one per node, by node id
  double total_log_weight = 0.0;
  std::vector<Value> values;  ///< outputs of unobserved nodes, by node id then port
};

enum class ScanOrder { Random, Cyclic };

struct SiteCounts {
  std::uint64_t proposed = 0;
  std::uint64_t accepted = 0;
};

struct ChainSummary {
  std::uint64_t iterations = 0;
  std::map<NodeId, SiteCounts> sites;
};

using RecordSink = std::function<void(const ChainRecord&)>;

/// Runs `n_iters` updates, picking the site uniformly from `schedule`
/// (or cycling through it) and streaming one record per update.
ChainSummary run_chain(ModuleNetwork& net, const std::vector<SiteProposal>& schedule, std::uint64_t n_iters,
                       Rng& rng, const RecordSink& sink, ScanOrder scan = ScanOrder::Random);

/// Snapshot of the network after an update.
ChainRecord make_record(const ModuleNetwork& net, std::uint64_t iteration, const AcceptanceDecision& d, NodeId site);

struct LogWeightMoments {
  double mean = 0.0;
  double variance = 0.0;  ///< unbiased; 0 for fewer than two finite values
};

struct AcceptanceStats {
  std::map<NodeId, double> acceptance_rate;
  std::vector<LogWeightMoments> node_log_weight;
  std::uint64_t impossible_proposals = 0;
};

/// Throws ContractViolation on empty input.
AcceptanceStats acceptance_stats(const std::vector<ChainRecord>& records);

}  // namespace modnet
