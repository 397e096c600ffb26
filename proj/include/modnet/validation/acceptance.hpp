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
#include <iosfwd>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace modnet::validation {

enum class Verdict { Pass, Fail, Skipped };

std::string to_string(Verdict v);

/// One measured quantity against its bound.
struct Check {
  std::string label;
  double measured = 0.0;
  std::string relation;  ///< "<", "<=", "==" or ">="
  double bound = 0.0;
  bool pass = false;
};

struct CriterionResult {
  int id = 0;
  std::string title;
  Verdict verdict = Verdict::Fail;
  std::vector<Check> checks;
  std::string note;
  double seconds = 0.0;
};

struct AcceptanceOptions {
  nlohmann::json fixtures;
  std::uint64_t seed = 2026;
  std::size_t workers = 4;
  std::filesystem::path out_dir = "acceptance_out";
  /// Skip the statistical criteria (2-6) instead of running them.
  bool quick = false;
  std::set<int> criteria;  ///< empty means all
};

struct AcceptanceReport {
  std::vector<CriterionResult> results;

  /// No criterion failed. Skipped criteria do not count as failures.
  bool passed() const;
};

/// Criteria that need sampling budgets; skipped under `quick`.
bool is_statistical(int criterion);

AcceptanceReport run_acceptance(const AcceptanceOptions& options);

/// One "[PASS]/[FAIL]/[SKIP]" line per criterion, followed by its checks.
void print_report(std::ostream& out, const AcceptanceReport& report);

nlohmann::json to_json(const AcceptanceReport& report);

}  // namespace modnet::validation
