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

#include <cstdlib>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "modnet/errors.hpp"
#include "modnet/experiment/commands.hpp"

namespace ex = modnet::experiment;

namespace {

void configure_logging() {
  spdlog::set_default_logger(spdlog::stderr_color_st("modnet"));
  spdlog::set_pattern("[%l] %v");
  const char* level = std::getenv("MODNET_LOG");
  spdlog::set_level(level ? spdlog::level::from_str(level) : spdlog::level::warn);
}

std::set<int> parse_criteria(const std::string& list) {
  std::set<int> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.insert(std::stoi(item));
    } catch (const std::exception&) {
      throw modnet::ConfigError("--criteria", "expected a comma-separated list of numbers");
    }
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  configure_logging();
  CLI::App app{"Module networks: inference, oracle fixtures and acceptance checks"};
  app.require_subcommand(1);

  std::string config_path;
  ex::Overrides ov;
  std::string out_dir;
  std::uint64_t seed = 0;
  std::uint64_t chains = 0;
  std::uint64_t iters = 0;
  std::uint64_t particles = 0;
  std::uint64_t train = 0;
  std::uint64_t workers = 0;
  bool quick = false;
  std::string criteria;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "experiment config (JSON)")->required();
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--seed", seed, "master seed");
    sub->add_option("--chains", chains, "number of chains");
    sub->add_option("--iters", iters, "iterations per chain");
    sub->add_option("--particles", particles, "SMC particles K");
    sub->add_option("--train-samples", train, "inverse training samples");
    sub->add_option("--workers", workers, "worker threads");
  };
  auto* infer = app.add_subcommand("infer", "run MH chains and write trace.csv and summary.json");
  auto* oracle = app.add_subcommand("oracle", "compute exact fixtures by enumeration");
  auto* validate = app.add_subcommand("validate", "run the acceptance suite");
  for (auto* sub : {infer, oracle, validate}) add_common(sub);
  validate->add_flag("--quick", quick, "skip statistical criteria");
  validate->add_option("--criteria", criteria, "comma-separated subset, e.g. 1,7,8");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : ex::kExitConfigError;
  }

  auto given = [&](const char* flag) {
    for (auto* sub : app.get_subcommands()) {
      if (sub->count(flag)) return true;
    }
    return false;
  };
  if (given("--out")) ov.out_dir = out_dir;
  if (given("--seed")) ov.seed = seed;
  if (given("--chains")) ov.chains = chains;
  if (given("--iters")) ov.iterations = iters;
  if (given("--particles")) ov.particles = particles;
  if (given("--train-samples")) ov.train_samples = train;
  if (given("--workers")) ov.workers = workers;

  try {
    const ex::ExperimentConfig config = ex::resolve(ex::load_config(config_path), ov);
    if (infer->parsed()) return ex::cmd_infer(config);
    if (oracle->parsed()) return ex::cmd_oracle(config);
    ex::ValidateOptions opts;
    opts.quick = quick;
    if (!criteria.empty()) opts.criteria = parse_criteria(criteria);
    return ex::cmd_validate(config, opts);
  } catch (const modnet::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return ex::kExitConfigError;
  } catch (const modnet::NetworkError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return ex::kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return ex::kExitValidationFailure;
  }
}
