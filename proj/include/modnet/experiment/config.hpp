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
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "modnet/mh.hpp"

namespace modnet::experiment {

/// MH proposal for one unobserved node.
struct ProposalSetting {
  std::string node;
  std::string kind = "uniform";  ///< uniform | flip | gaussian
  std::string port;  ///< defaults to the node's only output
  int cardinality = 2;
  double sigma = 1.0;
};

struct ExperimentConfig {
  std::filesystem::path network;  ///< network document
  std::filesystem::path constants;  ///< optional model constants document
  std::filesystem::path fixtures;  ///< oracle fixtures (validate, oracle)
  std::filesystem::path out_dir = "out";
  std::optional<std::uint64_t> seed;  ///< required
  std::uint64_t chains = 4;
  std::uint64_t iterations = 50000;
  std::uint64_t particles = 30;
  std::uint64_t train_samples = 100000;
  std::uint64_t workers = 1;
  ScanOrder scan = ScanOrder::Random;
  std::vector<ProposalSetting> proposals;
  nlohmann::json oracle_models = nlohmann::json::array();

  /// Throws ConfigError if the seed or network is missing or a count is zero.
  void validate() const;
};

/// Command-line values that take precedence over the file.
struct Overrides {
  std::optional<std::filesystem::path> out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> chains;
  std::optional<std::uint64_t> iterations;
  std::optional<std::uint64_t> particles;
  std::optional<std::uint64_t> train_samples;
  std::optional<std::uint64_t> workers;
};

/// Parses a config document. Relative paths resolve against `base_dir`.
/// The seed is mandatory.
ExperimentConfig config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);

/// Reads and parses a JSON file; syntax errors are reported as
/// ConfigError("<path>:<line>:<column>", ...).
nlohmann::json read_json_file(const std::filesystem::path& path);

ExperimentConfig load_config(const std::filesystem::path& path);

/// Applies overrides, then validates.
ExperimentConfig resolve(ExperimentConfig c, const Overrides& o);

}  // namespace modnet::experiment
