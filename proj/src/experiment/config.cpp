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

#include "modnet/experiment/config.hpp"

#include <fstream>
#include <sstream>

#include "modnet/errors.hpp"

namespace modnet::experiment {

using nlohmann::json;

namespace {

template <class T>
void read_field(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    j.at(key).get_to(out);
  } catch (const json::exception& e) {
    throw ConfigError(key, e.what());
  }
}

std::filesystem::path read_path(const json& j, const char* key, const std::filesystem::path& base) {
  std::string s;
  read_field(j, key, s);
  if (s.empty()) return {};
  std::filesystem::path p(s);
  return p.is_absolute() ? p : base / p;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (!seed) throw ConfigError("seed", "required");
  if (network.empty()) throw ConfigError("network", "required");
  if (chains < 1) throw ConfigError("chains", "must be at least 1");
  if (iterations < 1) throw ConfigError("iterations", "must be at least 1");
  if (particles < 1) throw ConfigError("particles", "must be at least 1");
  if (train_samples < 1) throw ConfigError("train_samples", "must be at least 1");
  if (workers < 1) throw ConfigError("workers", "must be at least 1");
}

ExperimentConfig config_from_json(const json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object()) throw ConfigError("", "config must be a JSON object");
  ExperimentConfig c;
  c.network = read_path(j, "network", base_dir);
  c.constants = read_path(j, "constants", base_dir);
  c.fixtures = read_path(j, "fixtures", base_dir);
  if (j.contains("out")) c.out_dir = read_path(j, "out", base_dir);
  if (j.contains("seed")) {
    const auto& sj = j.at("seed");
    if (!sj.is_number_unsigned() && !(sj.is_number_integer() && sj.get<std::int64_t>() >= 0)) {
      throw ConfigError("seed", "must be a non-negative integer");
    }
    c.seed = j.at("seed").get<std::uint64_t>();
  }
  read_field(j, "chains", c.chains);
  read_field(j, "iterations", c.iterations);
  read_field(j, "particles", c.particles);
  read_field(j, "train_samples", c.train_samples);
  read_field(j, "workers", c.workers);
  std::string scan = "random";
  read_field(j, "scan", scan);
  if (scan == "random") {
    c.scan = ScanOrder::Random;
  } else if (scan == "cyclic") {
    c.scan = ScanOrder::Cyclic;
  } else {
    throw ConfigError("scan", "expected 'random' or 'cyclic'");
  }
  if (j.contains("proposals")) {
    const auto& ps = j.at("proposals");
    if (!ps.is_array()) throw ConfigError("proposals", "expected an array");
    for (std::size_t k = 0; k < ps.size(); ++k) {
      const std::string field = "proposals[" + std::to_string(k) + "]";
      ProposalSetting s;
      try {
        ps[k].at("node").get_to(s.node);
        s.kind = ps[k].value("kind", s.kind);
        s.port = ps[k].value("port", s.port);
        s.cardinality = ps[k].value("cardinality", s.cardinality);
        s.sigma = ps[k].value("sigma", s.sigma);
      } catch (const json::exception& e) {
        throw ConfigError(field, e.what());
      }
      if (s.kind != "uniform" && s.kind != "flip" && s.kind != "gaussian") {
        throw ConfigError(field + ".kind", "expected uniform, flip or gaussian");
      }
      c.proposals.push_back(std::move(s));
    }
  }
  if (j.contains("oracle")) {
    const auto& o = j.at("oracle");
    if (!o.is_object() || !o.contains("models") || !o.at("models").is_array()) {
      throw ConfigError("oracle.models", "expected an array");
    }
    c.oracle_models = o.at("models");
  }
  return c;
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string(), "cannot open file");
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1;
    std::size_t col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ConfigError(path.string() + ":" + std::to_string(line) + ":" + std::to_string(col), e.what());
  }
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  return config_from_json(read_json_file(path), path.parent_path());
}

ExperimentConfig resolve(ExperimentConfig c, const Overrides& o) {
  if (o.out_dir) c.out_dir = *o.out_dir;
  if (o.chains) c.chains = *o.chains;
  if (o.iterations) c.iterations = *o.iterations;
  if (o.particles) c.particles = *o.particles;
  if (o.train_samples) c.train_samples = *o.train_samples;
  if (o.workers) c.workers = *o.workers;
  if (o.seed) c.seed = *o.seed;
  c.validate();
  return c;
}

}  // namespace modnet::experiment
