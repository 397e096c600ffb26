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
#include <filesystem>
#include <set>
#include <vector>

#include <nlohmann/json.hpp>

#include "modnet/experiment/config.hpp"
#include "modnet/network_json.hpp"
#include "modnet/trace_csv.hpp"

namespace modnet::experiment {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidationFailure = 1;
inline constexpr int kExitConfigError = 2;

/// Random stream used to build modules (e.g. inverse training). Chain c uses
/// chain_seed(master, c).
inline constexpr std::uint64_t build_seed(std::uint64_t master) { return derive_seed(master, 0); }
inline constexpr std::uint64_t chain_seed(std::uint64_t master, std::uint64_t chain) {
  return derive_seed(master, chain + 1);
}

struct ChainTrace {
  std::uint64_t seed = 0;
  std::vector<ChainRecord> records;
  ChainSummary summary;
};

struct ChainPlan {
  std::uint64_t seed = 0;
  std::uint64_t chains = 1;
  std::uint64_t iterations = 1;
  std::uint64_t workers = 1;
  ScanOrder scan = ScanOrder::Random;
  std::vector<ProposalSetting> proposals;
};

struct InferenceRun {
  ModuleNetwork reference;  ///< freshly built network, for names and layout
  TraceLayout layout;
  std::vector<ChainTrace> chains;
};

/// Resolves proposal settings against a network. Every unobserved node
/// needs exactly one setting.
std::vector<SiteProposal> build_schedule(const ModuleNetwork& net, const std::vector<ProposalSetting>& settings);

/// Runs plan.chains independent chains on a pool of plan.workers threads.
/// The result depends only on the blueprint and the plan, not on the
/// number of workers.
InferenceRun run_chains(const NetworkBlueprint& blueprint, const ChainPlan& plan);

/// Builds the blueprint named by the config, training any learned modules
/// from the build stream.
NetworkBlueprint load_blueprint(const ExperimentConfig& config);

ChainPlan plan_from(const ExperimentConfig& config);

void write_trace(std::ostream& out, const InferenceRun& run);
nlohmann::json summarize(const InferenceRun& run, const ChainPlan& plan);

/// Writes <out>/trace.csv and <out>/summary.json.
int cmd_infer(const ExperimentConfig& config);

/// Exact quantities for each entry of `models`; keys are the model names.
nlohmann::json compute_fixtures(const nlohmann::json& models, const nlohmann::json& constants);

/// Writes the fixtures file named by the config.
int cmd_oracle(const ExperimentConfig& config);

struct ValidateOptions {
  bool quick = false;
  std::set<int> criteria;  ///< empty means all
};

/// Runs the acceptance suite against the config's fixtures and prints the report.
int cmd_validate(const ExperimentConfig& config, const ValidateOptions& options);

}  // namespace modnet::experiment
