/*
 * Copyright 2026 The Forge Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef FORGE_BANK_HPP_
#define FORGE_BANK_HPP_

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "forge/model.hpp"
#include "forge/scenario.hpp"

namespace forge {

enum class BankKind { kFm, kAgri };

std::string_view bank_name(BankKind kind);  // "fm" / "agri"
// Accepts fm|agri in any case; throws InvalidArgument otherwise.
BankKind parse_bank(std::string_view text);

struct ScenarioRecipe {
  std::string id;
  BankKind bank = BankKind::kFm;
  // Parameter name -> factor. Absent means 1.0; a "0%" table cell is kept
  // as an explicit 1.0.
  std::map<std::string, double, std::less<>> multipliers;

  double factor(std::string_view name) const;
  bool operator==(const ScenarioRecipe&) const = default;
};

// The 26 designed perturbations of each bank, S01..S26.
std::vector<ScenarioRecipe> builtin_recipes(BankKind kind);

// Baseline with every named tensor scaled by its factor; scenario_id set
// to the recipe id. Unknown names throw InvalidArgument.
ScenarioData materialize(const ScenarioData& baseline, const ScenarioRecipe& recipe);

struct ScenarioBank {
  BankKind kind = BankKind::kFm;
  ScenarioData baseline;
  std::vector<ScenarioRecipe> recipes;
  std::map<std::string, ScenarioData, std::less<>> materialized;

  static ScenarioBank make(BankKind kind, ScenarioData baseline);
  const ScenarioRecipe& recipe(std::string_view id) const;
  std::vector<std::string> ids() const;
};

// Optimal plan of one scenario plus the derived output tensors.
struct ScenarioOutputs {
  Solution solution;
  Abatement abatement;
  Eigen::VectorXd cost_fm;    // EUR per (t, f, r)
  Eigen::VectorXd cost_agri;  // EUR per (t, a, r)
  double total_cost = 0.0;
  double max_violation = 0.0;
  std::int64_t iterations = 0;
};

ScenarioOutputs evaluate_outputs(const ScenarioData& data, const Solution& sol, std::int64_t iterations);

// Output tensor names, in file order: capFMs, capAgri, ghgAbateFMs,
// ghgAbateAgri, costTechFMs, costTechAgri, purCO2.
const std::vector<std::string>& output_names();
ParamTensor output_tensor(const ScenarioOutputs& out, std::string_view name);

// Solves every scenario, in parallel over `workers` threads. Results are
// independent of the worker count. Any non-optimal scenario aborts the run
// with Error naming the id.
std::map<std::string, ScenarioOutputs, std::less<>> run_bank(const ScenarioBank& bank, int workers = 1,
                                                            const SolverOptions& options = {});

// Layout under `root`:
//   manifest.json                 schema 1, bank, seed, sets, recipes, checksums
//   baseline/inputs/*.csv
//   <id>/inputs/*.csv, <id>/outputs/*.csv, <id>/outputs/summary.json
void save_bank(const ScenarioBank& bank, const std::filesystem::path& root);
// Loads inputs from disk and checks them against the manifest checksums
// (Error "checksum_mismatch").
ScenarioBank load_bank(const std::filesystem::path& root);

void save_outputs(const ScenarioData& data, const ScenarioOutputs& out, const std::filesystem::path& dir);
ScenarioOutputs load_outputs(const ScenarioData& data, const std::filesystem::path& dir);

}  // namespace forge

#endif  // FORGE_BANK_HPP_
