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

#include "forge/bank.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cctype>
#include <fstream>
#include <thread>

#include "forge/checksum.hpp"
#include "forge/error.hpp"
#include "json.hpp"

namespace forge {
namespace {

using json = nlohmann::json;

constexpr int kUnchanged = 1000;  // a "--" cell
constexpr int X = kUnchanged;

// Relative changes in percent, one row per scenario, columns as in the
// designed tables. A column may scale several tensors at once.
struct TableSpec {
  std::vector<std::vector<std::string_view>> columns;
  std::array<std::array<int, 11>, 26> rows;
};

const TableSpec& fm_table() {
  static const TableSpec table{
      {{param::kCo2Price},
       {param::kFmGrowth},
       {param::kBeechArea0},
       {param::kGrassArea0},
       {param::kGhgTarget},
       {param::kCap0Fm},
       {param::kCostMargFm},
       {param::kCostInvFm},
       {param::kCostInvLevelFm},
       {param::kGhgFm},
       {param::kCostInvAgri, param::kCostMargAgri, param::kCostInvLevelAgri, param::kAgriArea0}},
      {{
          {-20, -20, -20, X, X, X, X, X, X, X, X},
          {-20, 0, -20, X, X, X, X, X, X, X, X},
          {-20, 0, 0, X, X, X, X, X, X, X, X},
          {20, 0, 20, X, X, X, X, X, X, X, X},
          {20, 20, -20, X, X, X, X, X, X, X, X},
          {20, 20, 20, X, X, X, X, X, X, X, X},
          {X, -20, X, X, X, X, X, X, -20, X, X},
          {X, -20, X, X, -20, X, X, X, -20, -20, X},
          {X, 20, X, X, X, X, X, X, 20, X, X},
          {X, 20, X, X, 20, X, X, X, 20, 20, X},
          {X, -20, -20, -20, -20, -20, X, X, X, X, X},
          {X, 20, 20, 20, 20, 20, X, X, X, X, X},
          {X, X, X, X, X, X, X, X, X, X, -20},
          {X, X, X, X, X, X, X, X, X, X, 20},
          {X, X, X, X, X, X, X, -20, -20, X, X},
          {X, X, X, X, X, X, X, -10, 10, X, X},
          {X, X, X, X, X, X, X, 20, 20, X, X},
          {X, X, X, X, X, X, -50, -50, -50, X, X},
          {X, X, X, X, X, X, -50, -50, -50, -50, X},
          {X, X, X, X, X, -20, -20, -20, -20, X, X},
          {X, X, X, X, X, X, -20, -20, -20, -20, X},
          {X, X, X, X, X, 20, 20, 20, 20, X, X},
          {X, X, X, X, X, X, 20, 20, 20, 20, X},
          {X, X, X, X, X, X, 50, 50, 50, X, X},
          {X, X, X, X, X, X, 50, 50, 50, 50, X},
          {X, 30, 30, 30, 30, X, X, X, X, X, X},
      }}};
  return table;
}

const TableSpec& agri_table() {
  static const TableSpec table{
      {{param::kCo2Price},
       {param::kFmGrowth},
       {param::kBeechArea0},
       {param::kCostMargAgri},
       {param::kCostInvAgri},
       {param::kCostInvLevelAgri},
       {param::kGhgAgri},
       {param::kAgriGrowth},
       {param::kAgriArea0},
       {param::kPeatExtract}},
      {{
          {X, X, X, X, X, X, X, 90, 90, 90, X},
          {X, X, X, X, X, X, X, -60, -60, -60, X},
          {-20, -20, -20, X, X, X, X, X, X, X, X},
          {-20, 0, -20, X, X, X, X, X, X, X, X},
          {-20, 0, 0, X, X, X, X, X, X, X, X},
          {20, 0, 20, X, X, X, X, X, X, X, X},
          {20, 20, -20, X, X, X, X, X, X, X, X},
          {20, 20, 20, X, X, X, X, X, X, X, X},
          {X, X, X, X, X, X, X, X, X, X, X},
          {X, X, X, X, -50, -50, -50, -50, -50, X, X},
          {X, X, X, X, -20, -20, X, -20, X, X, X},
          {X, X, X, X, -20, -20, -20, X, X, X, X},
          {X, X, X, X, 20, 20, X, 20, X, X, X},
          {X, X, X, X, 20, 20, 20, X, X, X, X},
          {X, X, X, X, -30, -30, X, -30, X, X, X},
          {X, X, X, X, 70, 70, X, 70, X, X, X},
          {X, X, X, -40, X, X, X, -40, X, X, X},
          {X, X, X, 50, X, X, 50, 50, 50, 50, X},
          {X, X, X, 60, X, X, X, 60, X, X, X},
          {X, X, X, 100, 100, 100, X, X, X, X, X},
          {X, X, X, X, X, X, -50, X, X, -50, X},
          {X, X, X, X, X, X, -20, -20, -20, -20, X},
          {X, X, X, X, X, X, 20, 20, 20, 20, X},
          {X, X, X, X, X, X, 50, 50, 50, 50, X},
          {X, X, X, X, X, X, 80, 80, 80, 80, X},
          {X, X, X, X, X, X, 80, X, X, 80, X},
      }}};
  return table;
}

std::string scenario_id(int i) {
  char buf[8];
  std::snprintf(buf, sizeof buf, "S%02d", i + 1);
  return buf;
}

void write_json(const std::filesystem::path& path, const json& doc) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << doc.dump(2) << '\n';
}

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

}  // namespace

std::string_view bank_name(BankKind kind) { return kind == BankKind::kFm ? "fm" : "agri"; }

BankKind parse_bank(std::string_view text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "fm") return BankKind::kFm;
  if (lower == "agri") return BankKind::kAgri;
  throw InvalidArgument("bank must be fm or agri, got '" + std::string(text) + "'");
}

double ScenarioRecipe::factor(std::string_view name) const {
  const auto it = multipliers.find(name);
  return it == multipliers.end() ? 1.0 : it->second;
}

std::vector<ScenarioRecipe> builtin_recipes(BankKind kind) {
  const auto& table = kind == BankKind::kFm ? fm_table() : agri_table();
  std::vector<ScenarioRecipe> out;
  for (int i = 0; i < 26; ++i) {
    ScenarioRecipe recipe;
    recipe.id = scenario_id(i);
    recipe.bank = kind;
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
      const int pct = table.rows[i][c];
      if (pct == kUnchanged) continue;
      for (auto name : table.columns[c]) {
        recipe.multipliers[std::string(name)] = (100.0 + pct) / 100.0;
      }
    }
    out.push_back(std::move(recipe));
  }
  return out;
}

ScenarioData materialize(const ScenarioData& baseline, const ScenarioRecipe& recipe) {
  for (const auto& [name, f] : recipe.multipliers) {
    if (!baseline.params.contains(name)) {
      throw InvalidArgument("recipe " + recipe.id + ": unknown parameter '" + name + "'");
    }
    if (!(f > 0.0) || !std::isfinite(f)) {
      throw InvalidArgument("recipe " + recipe.id + ": factor for '" + name + "' must be positive");
    }
  }
  ScenarioData out = baseline;
  out.scenario_id = recipe.id;
  for (const auto& [name, f] : recipe.multipliers) {
    if (f != 1.0) out.tensor(name).values *= f;
  }
  return out;
}

ScenarioBank ScenarioBank::make(BankKind kind, ScenarioData baseline) {
  ScenarioBank bank;
  bank.kind = kind;
  bank.baseline = std::move(baseline);
  bank.recipes = builtin_recipes(kind);
  for (const auto& r : bank.recipes) bank.materialized.emplace(r.id, materialize(bank.baseline, r));
  return bank;
}

const ScenarioRecipe& ScenarioBank::recipe(std::string_view id) const {
  for (const auto& r : recipes) {
    if (r.id == id) return r;
  }
  throw InvalidArgument("unknown scenario id '" + std::string(id) + "'");
}

std::vector<std::string> ScenarioBank::ids() const {
  std::vector<std::string> out;
  for (const auto& r : recipes) out.push_back(r.id);
  return out;
}

ScenarioOutputs evaluate_outputs(const ScenarioData& data, const Solution& sol, std::int64_t iterations) {
  ScenarioOutputs out;
  out.solution = sol;
  out.abatement = abatement(data, sol);
  out.cost_fm = tech_cost_fm(data, sol);
  out.cost_agri = tech_cost_agri(data, sol);
  out.total_cost = total_cost(data, sol);
  out.max_violation = validate(data, sol).max_violation;
  out.iterations = iterations;
  return out;
}

const std::vector<std::string>& output_names() {
  static const std::vector<std::string> names = {"capFMs",       "capAgri",      "ghgAbateFMs", "ghgAbateAgri",
                                                 "costTechFMs", "costTechAgri", "purCO2"};
  return names;
}

ParamTensor output_tensor(const ScenarioOutputs& out, std::string_view name) {
  if (name == "capFMs") return {Layout::kYearFmRegion, out.solution.cap_fms};
  if (name == "capAgri") return {Layout::kYearAgriRegion, out.solution.cap_agri};
  if (name == "ghgAbateFMs") return {Layout::kYearFmRegion, out.abatement.fm};
  if (name == "ghgAbateAgri") return {Layout::kYearAgriRegion, out.abatement.agri};
  if (name == "costTechFMs") return {Layout::kYearFmRegion, out.cost_fm};
  if (name == "costTechAgri") return {Layout::kYearAgriRegion, out.cost_agri};
  if (name == "purCO2") return {Layout::kYear, out.solution.pur_co2};
  throw InvalidArgument("unknown output tensor '" + std::string(name) + "'");
}

std::map<std::string, ScenarioOutputs, std::less<>> run_bank(const ScenarioBank& bank, int workers,
                                                            const SolverOptions& options) {
  const auto ids = bank.ids();
  for (const auto& id : ids) {
    if (!bank.materialized.contains(id)) throw InvalidArgument("scenario " + id + " is not materialized");
  }
  const int n = static_cast<int>(ids.size());
  std::vector<ScenarioOutputs> results(n);
  std::vector<std::string> errors(n);
  std::vector<std::string> codes(n);
  std::atomic<int> next{0};
  auto work = [&] {
    for (int i = next++; i < n; i = next++) {
      const auto& data = bank.materialized.find(ids[i])->second;
      try {
        const auto run = solve_model(data, options);
        results[i] = evaluate_outputs(data, run.solution, run.outcome.iterations);
      } catch (const Error& e) {
        codes[i] = e.code();
        errors[i] = e.what();
      } catch (const std::exception& e) {
        codes[i] = "internal";
        errors[i] = e.what();
      }
    }
  };
  const int threads = std::clamp(workers, 1, std::max(1, n));
  std::vector<std::thread> pool;
  for (int k = 1; k < threads; ++k) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  for (int i = 0; i < n; ++i) {
    if (!errors[i].empty()) throw Error(codes[i], "scenario " + ids[i] + ": " + errors[i]);
  }
  std::map<std::string, ScenarioOutputs, std::less<>> out;
  for (int i = 0; i < n; ++i) out.emplace(ids[i], std::move(results[i]));
  return out;
}

void save_bank(const ScenarioBank& bank, const std::filesystem::path& root) {
  save_scenario(bank.baseline, root / "baseline" / "inputs");
  json recipes = json::array();
  json checksums = json::object();
  for (const auto& r : bank.recipes) {
    json m = json::object();
    for (const auto& [k, v] : r.multipliers) m[k] = v;
    recipes.push_back({{"id", r.id}, {"multipliers", m}});
    const auto& data = bank.materialized.at(r.id);
    save_scenario(data, root / r.id / "inputs");
    checksums[r.id] = checksum(data);
  }
  const auto& s = bank.baseline.sets;
  write_json(root / "manifest.json",
             {{"schema", 1},
              {"bank", bank_name(bank.kind)},
              {"seed", bank.baseline.seed},
              {"sets",
               {{"years", s.years}, {"regions", s.regions}, {"fm_techs", s.fm_techs}, {"agri_techs", s.agri_techs}}},
              {"baseline_checksum", checksum(bank.baseline)},
              {"recipes", recipes},
              {"checksums", checksums}});
}

ScenarioBank load_bank(const std::filesystem::path& root) {
  const json manifest = read_json(root / "manifest.json");
  if (manifest.value("schema", 0) != 1) throw IoError("unsupported bank manifest schema");
  ScenarioBank bank;
  bank.kind = parse_bank(manifest.at("bank").get<std::string>());
  bank.baseline = load_scenario(root / "baseline" / "inputs");
  if (checksum(bank.baseline) != manifest.at("baseline_checksum").get<std::string>()) {
    throw Error("checksum_mismatch", "baseline inputs differ from the manifest");
  }
  for (const auto& entry : manifest.at("recipes")) {
    ScenarioRecipe r;
    r.id = entry.at("id").get<std::string>();
    r.bank = bank.kind;
    for (const auto& [k, v] : entry.at("multipliers").items()) r.multipliers[k] = v.get<double>();
    auto data = load_scenario(root / r.id / "inputs");
    if (checksum(data) != manifest.at("checksums").at(r.id).get<std::string>()) {
      throw Error("checksum_mismatch", "inputs of " + r.id + " differ from the manifest");
    }
    bank.materialized.emplace(r.id, std::move(data));
    bank.recipes.push_back(std::move(r));
  }
  return bank;
}

void save_outputs(const ScenarioData& data, const ScenarioOutputs& out, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (const auto& name : output_names()) write_tensor_csv(dir / (name + ".csv"), data.sets, output_tensor(out, name));
  write_json(dir / "summary.json", {{"schema", 1},
                                    {"scenario_id", data.scenario_id},
                                    {"objective", out.solution.objective},
                                    {"total_cost", out.total_cost},
                                    {"co2_gap_rewt", out.solution.co2_gap_rewt},
                                    {"ghg_abate_fm_total", out.abatement.fm_total},
                                    {"ghg_abate_agri_total", out.abatement.agri_total},
                                    {"pur_co2_total", out.solution.pur_co2.sum()},
                                    {"max_violation", out.max_violation},
                                    {"iterations", out.iterations}});
}

ScenarioOutputs load_outputs(const ScenarioData& data, const std::filesystem::path& dir) {
  const auto& s = data.sets;
  Solution sol = Solution::zeros(s);
  sol.cap_fms = read_tensor_csv(dir / "capFMs.csv", s, Layout::kYearFmRegion, "capFMs").values;
  sol.cap_agri = read_tensor_csv(dir / "capAgri.csv", s, Layout::kYearAgriRegion, "capAgri").values;
  sol.pur_co2 = read_tensor_csv(dir / "purCO2.csv", s, Layout::kYear, "purCO2").values;
  const json summary = read_json(dir / "summary.json");
  sol.co2_gap_rewt = summary.at("co2_gap_rewt").get<double>();
  sol.objective = summary.at("objective").get<double>();
  return evaluate_outputs(data, sol, summary.at("iterations").get<std::int64_t>());
}

}  // namespace forge
