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
#include <filesystem>
#include <fstream>
#include <sstream>

#include <doctest.h>

#include "modnet/errors.hpp"
#include "modnet/experiment/commands.hpp"
#include "modnet/experiment/config.hpp"
#include "modnet/trace_csv.hpp"

using namespace modnet;
using namespace modnet::experiment;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

/// Fresh directory under the system temp dir, removed on scope exit.
struct ScratchDir {
  fs::path path;
  explicit ScratchDir(const std::string& tag) {
    static int counter = 0;
    path = fs::temp_directory_path() / ("modnet_" + tag + "_" + std::to_string(::getpid()) + "_" +
                                        std::to_string(counter++));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~ScratchDir() { fs::remove_all(path); }
};

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream(p) << text;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const char* kThreeNode = R"({
  "nodes": [
    {"id": "A", "type": "bernoulli", "params": {"p": 0.4, "output": "a"}},
    {"id": "B", "type": "cpt", "params": {"inputs": [{"name": "a", "cardinality": 2}],
                                         "rows": [[0.7, 0.3], [0.25, 0.75]], "output": "b"}},
    {"id": "C", "type": "cpt", "params": {"inputs": [{"name": "b", "cardinality": 2}],
                                         "rows": [[0.8, 0.2], [0.1, 0.9]], "output": "c"}}
  ],
  "edges": [{"from": "A.a", "to": "B.a"}, {"from": "B.b", "to": "C.b"}],
  "observations": {"C": {"c": 1}}
})";

json small_config() {
  return {{"network", "net.json"},
          {"out", "out"},
          {"seed", 11},
          {"chains", 3},
          {"iterations", 400},
          {"workers", 2},
          {"proposals", json::array({{{"node", "A"}, {"kind", "flip"}}, {{"node", "B"}, {"kind", "uniform"}}})},
          {"oracle", {{"models", json::array({{{"name", "sw"}, {"kind", "switch_model"}},
                                              {{"name", "hmm"}, {"kind", "discrete_hmm"}}})}}}};
}

ScratchDir small_experiment(const std::string& tag, const json& cfg = small_config()) {
  ScratchDir d(tag);
  write_file(d.path / "net.json", kThreeNode);
  write_file(d.path / "experiment.json", cfg.dump(2));
  return d;
}

TraceTable read_trace(const fs::path& p) {
  std::ifstream in(p);
  return read_trace_csv(in);
}

int run_cli(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string(MODNET_CLI) + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_SUITE("experiment") {
  TEST_CASE("config errors name the offending location") {
    ScratchDir d("cfg");
    write_file(d.path / "broken.json", "{\n  \"seed\": 3,\n  \"network\": ]\n}\n");
    try {
      read_json_file(d.path / "broken.json");
      FAIL("expected a parse error");
    } catch (const ConfigError& e) {
      CHECK(e.field().find("broken.json:3:") != std::string::npos);
    }
    CHECK_THROWS_AS(read_json_file(d.path / "missing.json"), ConfigError);

    auto no_seed = small_config();
    no_seed.erase("seed");
    CHECK_THROWS_AS(resolve(config_from_json(no_seed, d.path), {}), ConfigError);
    auto zero = small_config();
    zero["chains"] = 0;
    CHECK_THROWS_AS(resolve(config_from_json(zero, d.path), {}), ConfigError);
    auto bad_scan = small_config();
    bad_scan["scan"] = "sideways";
    CHECK_THROWS_AS(config_from_json(bad_scan, d.path), ConfigError);
  }

  TEST_CASE("relative paths resolve against the config and overrides win") {
    const auto c = config_from_json(small_config(), "/some/dir");
    CHECK(c.network == fs::path("/some/dir/net.json"));
    CHECK(c.out_dir == fs::path("/some/dir/out"));
    Overrides o;
    o.seed = 99;
    o.iterations = 7;
    const auto r = resolve(c, o);
    CHECK(*r.seed == 99);
    CHECK(r.iterations == 7);
    CHECK(r.chains == 3);
  }

  TEST_CASE("schedule needs one proposal per unobserved node") {
    auto d = small_experiment("sched");
    const auto cfg = resolve(load_config(d.path / "experiment.json"), {});
    const auto bp = load_blueprint(cfg);
    const auto net = bp.instantiate();
    CHECK(build_schedule(net, cfg.proposals).size() == 2);
    CHECK_THROWS_AS(build_schedule(net, {cfg.proposals[0]}), ConfigError);
    auto observed = cfg.proposals;
    observed.push_back({"C", "flip", ""});
    CHECK_THROWS_AS(build_schedule(net, observed), ConfigError);
    CHECK_THROWS_AS(build_schedule(net, {{"A", "flip", ""}, {"B", "teleport", ""}}), ConfigError);
  }

  TEST_CASE("runs are reproducible, independent of worker count, and split across chains") {
    auto d = small_experiment("det");
    auto cfg = resolve(load_config(d.path / "experiment.json"), {});
    const auto bp = load_blueprint(cfg);
    auto plan = plan_from(cfg);
    auto render = [&](const ChainPlan& p) {
      std::ostringstream os;
      write_trace(os, run_chains(bp, p));
      return os.str();
    };
    const auto first = render(plan);
    CHECK(first == render(plan));
    plan.workers = 1;
    CHECK(first == render(plan));

    const auto run = run_chains(bp, plan);
    REQUIRE(run.chains.size() == 3);
    CHECK(run.chains[0].seed == chain_seed(11, 0));
    CHECK(run.chains[2].seed == chain_seed(11, 2));
    CHECK(build_seed(11) != chain_seed(11, 0));
    std::vector<std::int64_t> c0;
    std::vector<std::int64_t> c1;
    for (const auto& r : run.chains[0].records) c0.push_back(r.values[0].as_discrete());
    for (const auto& r : run.chains[1].records) c1.push_back(r.values[0].as_discrete());
    CHECK(c0 != c1);
  }

  TEST_CASE("infer writes a trace and summary") {
    auto d = small_experiment("infer");
    const auto cfg = resolve(load_config(d.path / "experiment.json"), {});
    REQUIRE(cmd_infer(cfg) == kExitOk);
    const auto table = read_trace(d.path / "out" / "trace.csv");
    CHECK(table.header == std::vector<std::string>{"chain", "iteration", "site", "a", "b", "lw_A", "lw_B",
                                                   "lw_C", "total_lw", "accepted"});
    CHECK(table.rows.size() == 3 * 400);
    const auto summary = read_json_file(d.path / "out" / "summary.json");
    CHECK(summary["schema"] == "modnet-summary/1");
    CHECK(summary["trace_schema"] == kTraceSchema);
    CHECK(summary["per_chain"].size() == 3);
    CHECK(summary["pooled"].contains("acceptance_rate"));
  }

  TEST_CASE("fixtures are deterministic and keyed by model name") {
    const auto models = small_config()["oracle"]["models"];
    const auto a = compute_fixtures(models, nullptr);
    CHECK(a == compute_fixtures(models, nullptr));
    CHECK(a["sw"]["p_a"][1].get<double>() == doctest::Approx(0.449).epsilon(1e-14));
    CHECK(a["hmm"]["log_evidence"].size() == 2);
    CHECK(compute_fixtures(json::array(), nullptr) == json::object());
    CHECK_THROWS_AS(compute_fixtures(json::array({{{"name", "x"}, {"kind", "nonsense"}}}), nullptr), ConfigError);
  }

  TEST_CASE("checked-in fixtures match a fresh oracle run") {
    const auto cfg = load_config(fs::path(MODNET_SOURCE_DIR) / "config" / "outlier_experiment.json");
    const auto fresh = compute_fixtures(cfg.oracle_models, read_json_file(cfg.constants));
    CHECK(fresh == read_json_file(MODNET_FIXTURES));
  }
}

TEST_SUITE("cli") {
  TEST_CASE("infer succeeds and a missing seed is a config error") {
    auto d = small_experiment("cli_infer");
    const auto log = d.path / "log.txt";
    CHECK(run_cli("infer --config " + (d.path / "experiment.json").string() + " --iters 50", log) == kExitOk);
    CHECK(fs::exists(d.path / "out" / "trace.csv"));
    CHECK(read_trace(d.path / "out" / "trace.csv").rows.size() == 150);

    auto no_seed = small_config();
    no_seed.erase("seed");
    write_file(d.path / "noseed.json", no_seed.dump());
    CHECK(run_cli("infer --config " + (d.path / "noseed.json").string(), log) == kExitConfigError);
    CHECK(read_file(log).find("seed") != std::string::npos);
    CHECK(run_cli("infer --config " + (d.path / "noseed.json").string() + " --seed 5", log) == kExitOk);
    CHECK(run_cli("infer --config " + (d.path / "nowhere.json").string(), log) == kExitConfigError);
  }

  TEST_CASE("same seed gives byte-identical traces") {
    auto d = small_experiment("cli_det");
    const auto cfg = (d.path / "experiment.json").string();
    const auto log = d.path / "log.txt";
    REQUIRE(run_cli("infer --config " + cfg + " --out " + (d.path / "r1").string(), log) == kExitOk);
    REQUIRE(run_cli("infer --config " + cfg + " --out " + (d.path / "r2").string() + " --workers 1", log) == kExitOk);
    REQUIRE(run_cli("infer --config " + cfg + " --out " + (d.path / "r3").string() + " --seed 12", log) == kExitOk);
    CHECK(read_file(d.path / "r1" / "trace.csv") == read_file(d.path / "r2" / "trace.csv"));
    CHECK(read_file(d.path / "r1" / "trace.csv") != read_file(d.path / "r3" / "trace.csv"));
  }

  TEST_CASE("oracle writes the fixtures file") {
    auto cfg = small_config();
    cfg["fixtures"] = "fx.json";
    auto d = small_experiment("cli_oracle", cfg);
    CHECK(run_cli("oracle --config " + (d.path / "experiment.json").string(), d.path / "log.txt") == kExitOk);
    const auto fx = read_json_file(d.path / "fx.json");
    CHECK(fx.contains("sw"));
    CHECK(fx.contains("hmm"));
  }

  TEST_CASE("validate reports skips in quick mode and fails on a bad fixture") {
    const auto source = fs::path(MODNET_SOURCE_DIR) / "config";
    ScratchDir d("cli_validate");
    auto cfg = read_json_file(source / "outlier_experiment.json");
    cfg["network"] = (source / "outlier_model.json").string();
    cfg["constants"] = (source / "outlier_constants.json").string();
    cfg["fixtures"] = MODNET_FIXTURES;
    cfg["out"] = (d.path / "out").string();
    write_file(d.path / "good.json", cfg.dump());
    const auto log = d.path / "log.txt";
    CHECK(run_cli("validate --quick --criteria 1,2,8 --config " + (d.path / "good.json").string(), log) == kExitOk);
    const auto text = read_file(log);
    CHECK(text.find("[PASS] criterion 1") != std::string::npos);
    CHECK(text.find("[SKIP] criterion 2") != std::string::npos);
    CHECK(text.find("[PASS] criterion 8") != std::string::npos);

    auto fx = read_json_file(MODNET_FIXTURES);
    fx["hmm"]["log_evidence"][0] = fx["hmm"]["log_evidence"][0].get<double>() + 0.5;
    write_file(d.path / "bad_fx.json", fx.dump());
    cfg["fixtures"] = (d.path / "bad_fx.json").string();
    write_file(d.path / "bad.json", cfg.dump());
    CHECK(run_cli("validate --criteria 4 --config " + (d.path / "bad.json").string(), log) ==
          kExitValidationFailure);
    CHECK(read_file(log).find("[FAIL] criterion 4") != std::string::npos);
  }
}
