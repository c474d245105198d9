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

// Acceptance suite: one PASS/FAIL line per criterion, tolerances fixed here.
// Exit status is nonzero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <thread>
#include <unistd.h>

#include "fixtures.hpp"
#include "forge/checksum.hpp"
#include "forge/csv.hpp"
#include "forge/model.hpp"
#include "forge/pipeline.hpp"
#include "forge/simplex.hpp"
#include "oracles.hpp"

namespace forge {
namespace {

namespace fs = std::filesystem;

constexpr std::uint64_t kSeed = 7;

// LP correctness
constexpr int kLpInstances = 50;
constexpr double kLpRelTol = 1e-8;
constexpr double kLpSeconds = 5.0;
constexpr double kFdStep = 1e-4;
constexpr double kFdRelTol = 1e-3;
// Model feasibility
constexpr double kMaxViolation = 1e-6;
constexpr double kPeatlandFloor = 5e6;
constexpr double kFullSolveSeconds = 60.0;
// Clustering
constexpr int kUpgmaInstances = 200;
constexpr int kUpgmaMaxN = 10;
// Dispersion
constexpr double kFmInputRhoFloor = 0.98;
// Surrogate
constexpr int kFolds = 10;
constexpr int kTrees = 50;
constexpr double kMinR2 = 0.90;
constexpr double kMaxRmseShare = 0.05;
constexpr double kTrainSeconds = 120.0;
// SHAP
constexpr int kShapPoints = 1000;
constexpr double kLocalAccuracy = 1e-8;
constexpr int kOracleTrees = 100;
constexpr double kOracleTol = 1e-8;

const char* kCo2Question = "What happens if CO2 price increases by 20%?";
const char* kInvQuestion = "What happens if cost of investment in agriculture i.e. costInvAgri decreases?";

struct Verdict {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

int threads() { return static_cast<int>(std::max(1u, std::thread::hardware_concurrency())); }

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("forge_accept_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(p);
  return p;
}

double min_offdiag(const Eigen::MatrixXd& rho) {
  double m = 1.0;
  for (Eigen::Index i = 0; i < rho.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < rho.cols(); ++j) m = std::min(m, rho(i, j));
  }
  return m;
}

Verdict lp_correctness() {
  std::mt19937_64 rng(20260101);
  double worst = 0.0;
  int fd_checked = 0, fd_bad = 0;
  double solve_time = 0.0;
  for (int k = 0; k < kLpInstances; ++k) {
    const auto r = fixture::random_lp(rng, 6, 8);
    const auto want = oracle::vertex_optimum(r.A, r.b, r.c);
    if (!want) return {false, "instance " + std::to_string(k) + " has no feasible vertex"};
    const auto lp = StandardFormLP::generic(r.c, r.A, r.b);
    const auto t0 = std::chrono::steady_clock::now();
    const auto out = solve(lp);
    solve_time += seconds_since(t0);
    if (out.status != SolveStatus::kOptimal) return {false, "instance " + std::to_string(k) + " not optimal"};
    worst = std::max(worst, std::abs(out.objective - *want) / std::max(1.0, std::abs(*want)));
    // Dual against a central finite difference on each rhs; kinks are skipped.
    const auto y = dual_values(out, lp);
    for (Eigen::Index i = 0; i < r.b.size(); ++i) {
      auto up = r.b, down = r.b;
      up[i] += kFdStep;
      down[i] -= kFdStep;
      const double fwd = (solve(StandardFormLP::generic(r.c, r.A, up)).objective - out.objective) / kFdStep;
      const double bwd = (out.objective - solve(StandardFormLP::generic(r.c, r.A, down)).objective) / kFdStep;
      if (std::abs(fwd - bwd) > kFdRelTol * std::max(1.0, std::abs(fwd))) continue;
      ++fd_checked;
      if (std::abs(y[i] - fwd) > kFdRelTol * std::max(1.0, std::abs(fwd))) ++fd_bad;
    }
  }
  const bool pass = worst <= kLpRelTol && solve_time < kLpSeconds && fd_bad == 0;
  return {pass, std::to_string(kLpInstances) + " LPs, max rel err " + fmt("%.2e", worst) + ", solve time " +
                    fmt("%.3f", solve_time) + " s, duals vs finite differences " +
                    std::to_string(fd_checked - fd_bad) + "/" + std::to_string(fd_checked)};
}

std::string feasibility_of(const ScenarioData& data, double* seconds, bool* ok) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto run = solve_model(data);
  *seconds = seconds_since(t0);
  const auto rep = validate(data, run.solution);
  double peat = -1.0;
  bool peat_ok = false;
  for (const auto& e : rep.entries) {
    if (e.family == "peatland_2030") peat = e.lhs, peat_ok = e.satisfied && e.lhs >= kPeatlandFloor - kMaxViolation;
  }
  *ok = rep.max_violation <= kMaxViolation && peat_ok;
  return "max_violation " + fmt("%.2e", rep.max_violation) + ", peatland lhs " + fmt("%.6g", peat) + ", solve " +
         fmt("%.2f", *seconds) + " s";
}

Verdict model_feasibility() {
  double t_desk = 0, t_full = 0;
  bool ok_desk = false, ok_full = false;
  const auto desk = feasibility_of(synthesize_baseline(SetsSpec::desk(), kSeed), &t_desk, &ok_desk);
  const auto full = feasibility_of(synthesize_baseline(SetsSpec::full(), kSeed), &t_full, &ok_full);
  return {ok_desk && ok_full && t_full < kFullSolveSeconds, "desk: " + desk + "; full: " + full};
}

// "--" absent, "+20%" -> 1.2. The FM "*" column scales the four Agri tensors.
std::map<std::string, double, std::less<>> golden_row(const csv::Table& t, std::size_t i) {
  std::map<std::string, double, std::less<>> out;
  for (std::size_t j = 1; j < t.header.size(); ++j) {
    const auto& cell = t.rows[i][j];
    if (cell == "--") continue;
    const double f = (100.0 + std::stoi(cell.substr(0, cell.size() - 1))) / 100.0;
    if (t.header[j] == "*") {
      for (const auto* n : {"costInvAgri", "costMargAgri", "costInvLevelAgri", "Agriarea0"}) out[n] = f;
    } else {
      out[t.header[j]] = f;
    }
  }
  return out;
}

Verdict bank_fidelity() {
  int cell_mismatch = 0, cells = 0;
  for (auto kind : {BankKind::kFm, BankKind::kAgri}) {
    const auto t = csv::read(fs::path(FORGE_GOLDEN_DIR) / (std::string(bank_name(kind)) + "_recipes.csv"));
    const auto recipes = builtin_recipes(kind);
    if (recipes.size() != 26 || t.rows.size() != 26) return {false, "expected 26 rows per table"};
    for (std::size_t i = 0; i < 26; ++i) {
      const auto want = golden_row(t, i);
      cells += static_cast<int>(t.header.size() - 1);
      if (recipes[i].id != t.rows[i][0] || recipes[i].multipliers != want) ++cell_mismatch;
    }
  }
  const auto base = synthesize_baseline(SetsSpec::desk(), kSeed);
  const auto before = checksum(base);
  int scenarios = 0, tensor_mismatch = 0;
  for (auto kind : {BankKind::kFm, BankKind::kAgri}) {
    for (const auto& r : builtin_recipes(kind)) {
      const auto out = materialize(base, r);
      ++scenarios;
      for (const auto& name : parameter_names()) {
        const bool changed = checksum(out.params.at(name)) != checksum(base.params.at(name));
        if (changed != (r.factor(name) != 1.0)) ++tensor_mismatch;
      }
    }
  }
  const bool pass = cell_mismatch == 0 && tensor_mismatch == 0 && checksum(base) == before && scenarios == 52;
  return {pass, "rows differing from golden tables " + std::to_string(cell_mismatch) + " (" + std::to_string(cells) +
                    " cells), " + std::to_string(scenarios) + " scenarios materialized, tensors changed or kept wrongly " +
                    std::to_string(tensor_mismatch)};
}

double cell(const FeatureMatrix& m, const std::string& region, const std::string& tech, const std::string& column) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    if (m.regions[i] != region || m.techs[i] != tech) continue;
    for (std::size_t j = 2; j < m.columns.size(); ++j) {
      if (m.columns[j] == column) return m.values(i, static_cast<Eigen::Index>(j - 2));
    }
  }
  throw InvalidArgument("no cell " + region + "/" + tech + "/" + column);
}

Verdict feature_shapes() {
  const auto base = synthesize_baseline(SetsSpec::full(), kSeed);
  const auto fm = assemble(base, BankKind::kFm);
  const auto agri = assemble(base, BankKind::kAgri);
  const bool shapes = fm.rows() == 112 && fm.cols() == 25 && agri.rows() == 96 && agri.cols() == 21;
  const std::vector<std::pair<std::string, double>> anchors = {
      {"GHG_2020", 11.52}, {"CO2_2020", 20.0}, {"CO2_2050", 249.197564}, {"ForestGrowth_Slope", 0.0}};
  int exact = 0;
  for (const auto& [col, want] : anchors) exact += cell(fm, "DE2", "FM04_DouglasFir", col) == want;
  return {shapes && exact == static_cast<int>(anchors.size()),
          "FM " + std::to_string(fm.rows()) + "x" + std::to_string(fm.cols()) + ", Agri " + std::to_string(agri.rows()) +
              "x" + std::to_string(agri.cols()) + ", anchored cells exact " + std::to_string(exact) + "/" +
              std::to_string(anchors.size())};
}

Verdict clustering_oracle() {
  std::mt19937_64 rng(8128);
  std::uniform_int_distribution<int> size(2, kUpgmaMaxN);
  int differing = 0;
  for (int k = 0; k < kUpgmaInstances; ++k) {
    const auto D = fixture::random_distances(rng, size(rng), k % 4 == 0);
    const auto got = average_linkage(fixture::condense(D));
    const auto want = oracle::upgma(D);
    differing += !(got.merges == want.merges);
  }
  // Desk FM bank in input space, cut above the highest merge.
  const auto bank = ScenarioBank::make(BankKind::kFm, synthesize_baseline(SetsSpec::desk(), kSeed));
  const auto mats = input_matrices(bank);
  auto a = analyze_clusters(mats, Space::kInput, "features", kDefaultClusterThreshold);
  const double top = a.linkage.merges.back().height;
  const double t = top + 1e-3;
  const auto labels = flat_clusters(a.linkage, t);
  const bool one = labels.size() == 26 && std::all_of(labels.begin(), labels.end(), [](int l) { return l == 1; });
  const auto recipes = builtin_recipes(BankKind::kFm);
  const auto q = parse_query(kCo2Question, ParameterMap::builtin(), BankKind::kFm);
  const auto g = ground(match_scenarios(q, recipes), labels, a.correlation, recipes);
  const bool text = build_prompt(q, g).find("contains 26 scenarios") != std::string::npos;
  return {differing == 0 && one && text,
          std::to_string(kUpgmaInstances - differing) + "/" + std::to_string(kUpgmaInstances) +
              " linkages equal the brute-force oracle; t = " + fmt("%.6g", t) + " gives " +
              std::to_string(g.cluster_size) + " members in cluster #1"};
}

Verdict dispersion() {
  std::vector<std::string> warnings;
  const auto full = synthesize_baseline(SetsSpec::full(), kSeed);
  const auto fm = ScenarioBank::make(BankKind::kFm, full);
  const auto fm_rho = scenario_correlation(input_matrices(fm), &warnings);
  const auto agri = ScenarioBank::make(BankKind::kAgri, full);
  const auto agri_in = scenario_correlation(input_matrices(agri), &warnings);
  const auto outputs = run_bank(agri, threads());
  const auto agri_out = scenario_correlation(output_matrices(agri, outputs, default_output(BankKind::kAgri)), &warnings);
  const double fm_min = min_offdiag(fm_rho.rho);
  const double in_min = min_offdiag(agri_in.rho);
  const double out_min = min_offdiag(agri_out.rho);
  const bool complete = fm_rho.ids.size() == 26 && agri_in.ids.size() == 26 && agri_out.ids.size() == 26;
  return {complete && fm_min >= kFmInputRhoFloor && out_min < in_min,
          "FM input min rho " + fmt("%.6f", fm_min) + "; Agri " + default_output(BankKind::kAgri) + " min rho " +
              fmt("%.6f", out_min) + " vs input " + fmt("%.6f", in_min) + "; excluded scenarios " +
              std::to_string(warnings.size())};
}

// Desk FM bank, solved, with the pooled capFMs learning set.
struct DeskLearning {
  ScenarioBank bank;
  OutputsMap outputs;
  LearningSet ls;
};

const DeskLearning& desk_learning() {
  static const DeskLearning d = [] {
    DeskLearning x;
    x.bank = ScenarioBank::make(BankKind::kFm, synthesize_baseline(SetsSpec::desk(), kSeed));
    x.outputs = run_bank(x.bank, threads());
    x.ls = build_learning_set(x.bank, x.outputs, "capFMs");
    return x;
  }();
  return d;
}

EnsembleConfig surrogate_config() {
  EnsembleConfig c;
  c.n_folds = kFolds;
  c.trees_per_forest = kTrees;
  c.seed = kSeed;
  c.threads = threads();
  return c;
}

const TrainedSurrogate* g_surrogate = nullptr;

Verdict surrogate_quality() {
  const auto& d = desk_learning();
  const auto t0 = std::chrono::steady_clock::now();
  static TrainedSurrogate s = train_surrogate(d.ls, surrogate_config());
  const double secs = seconds_since(t0);
  g_surrogate = &s;
  const double range = d.ls.y.maxCoeff() - d.ls.y.minCoeff();
  const double share = s.test.rmse / range;
  return {s.test.r2 >= kMinR2 && share <= kMaxRmseShare && secs < kTrainSeconds,
          std::to_string(d.ls.y.size()) + " rows, K=" + std::to_string(kFolds) + ", " + std::to_string(kTrees) +
              " trees: test R2 " + fmt("%.4f", s.test.r2) + ", RMSE " + fmt("%.4g", s.test.rmse) + " (" +
              fmt("%.2f", 100.0 * share) + "% of range), training " + fmt("%.1f", secs) + " s"};
}

Verdict shap_axioms() {
  if (!g_surrogate) surrogate_quality();
  const auto& d = desk_learning();
  const auto& s = *g_surrogate;
  // Held-out rows first, then training rows, up to the point budget.
  std::vector<int> rows(s.split.test.begin(), s.split.test.end());
  for (int i : s.split.train) {
    if (static_cast<int>(rows.size()) >= kShapPoints) break;
    rows.push_back(i);
  }
  rows.resize(std::min<std::size_t>(rows.size(), kShapPoints));
  const auto X = select_rows(d.ls.design.X, rows);
  const auto A = ensemble_shap(s.ensemble, X, select_rows(d.ls.design.X, s.split.train), ShapOptions{1, 0, kSeed, threads()});
  const auto f = predict(s.ensemble, X);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < A.phi.rows(); ++i) {
    worst = std::max(worst, std::abs(f[A.sample_ids[i]] - A.phi0 - A.phi.row(i).sum()));
  }

  std::mt19937_64 rng(314159);
  std::uniform_int_distribution<int> nf(1, 4), depth(1, 3), bg_rows(1, 30);
  double oracle_err = 0.0;
  for (int k = 0; k < kOracleTrees; ++k) {
    const auto t = fixture::random_tree(rng, nf(rng), depth(rng));
    const auto bg = fixture::uniform_matrix(rng, bg_rows(rng), t.n_features);
    const Eigen::RowVectorXd x = fixture::uniform_matrix(rng, 1, t.n_features);
    const auto got = tree_shap(t, x, bg);
    oracle_err = std::max(oracle_err, (got.phi - oracle::exhaustive_shapley(t, x, bg)).cwiseAbs().maxCoeff());
  }

  int nonzero = 0;
  for (int k = 0; k < 50; ++k) {
    auto t = fixture::random_tree(rng, 3, 3);
    t.n_features = 5;
    const auto r = tree_shap(t, fixture::uniform_matrix(rng, 1, 5), fixture::uniform_matrix(rng, 20, 5));
    nonzero += (r.phi[3] != 0.0) + (r.phi[4] != 0.0);
  }
  return {static_cast<int>(A.phi.rows()) == kShapPoints && worst <= kLocalAccuracy && oracle_err <= kOracleTol &&
              nonzero == 0,
          std::to_string(A.phi.rows()) + " points, max |f - phi0 - sum phi| " + fmt("%.2e", worst) + "; " +
              std::to_string(kOracleTrees) + " trees vs exhaustive oracle max err " + fmt("%.2e", oracle_err) +
              "; unused-feature attributions nonzero " + std::to_string(nonzero)};
}

// bank generate -> run -> features -> cluster -> train -> shap, under `dir`.
void build_run(const fs::path& dir, BankKind kind, const EnsembleConfig& config, const ShapOptions& shap) {
  step_bank_generate(kind, SetsSpec::desk(), kSeed, dir);
  step_bank_run(dir, threads());
  step_features(dir);
  step_cluster(dir, Space::kInput, kDefaultClusterThreshold);
  step_cluster(dir, Space::kOutput, kDefaultClusterThreshold);
  step_train(dir, default_target(kind), config);
  step_shap(dir, shap, 3);
}

Verdict query_pipeline() {
  const auto map = ParameterMap::builtin();
  const auto co2 = parse_query(kCo2Question, map, BankKind::kFm);
  const auto inv = parse_query(kInvQuestion, map, BankKind::kAgri);
  const bool parsed = co2.parameter == "CO2price" && co2.multiplier && *co2.multiplier == 1.2 &&
                      inv.parameter == "costInvAgri" && inv.direction == Direction::kDecrease && !inv.multiplier;
  const auto fm_ids = match_scenarios(co2, builtin_recipes(BankKind::kFm)).ids;
  const auto agri_ids = match_scenarios(inv, builtin_recipes(BankKind::kAgri)).ids;
  auto has = [](const std::vector<std::string>& v, std::initializer_list<const char*> want) {
    return std::all_of(want.begin(), want.end(), [&](const char* id) { return std::find(v.begin(), v.end(), id) != v.end(); });
  };
  const bool matched = has(fm_ids, {"S04", "S05", "S06"}) && has(agri_ids, {"S10", "S11", "S12"});

  // Two independent runs per bank, each answered with the stub.
  EnsembleConfig small;
  small.n_folds = 2;
  small.trees_per_forest = 5;
  small.seed = kSeed;
  ShapOptions so{1, 50, kSeed, threads()};
  bool identical = true, headers = true;
  const Config config;
  for (auto [kind, question] : {std::pair{BankKind::kFm, kCo2Question}, std::pair{BankKind::kAgri, kInvQuestion}}) {
    std::string first;
    for (int rep = 0; rep < 2; ++rep) {
      const auto dir = scratch(std::string("query_") + std::string(bank_name(kind)) + std::to_string(rep));
      build_run(dir, kind, small, so);
      StubClient stub;
      const auto plain = step_ask(dir, question, Space::kInput, false, config, stub);
      const auto rich = step_ask(dir, question, Space::kInput, true, config, stub);
      const std::string bytes = to_json(plain).dump() + to_json(rich).dump();
      if (rep == 0) first = bytes;
      else identical = identical && bytes == first;
      for (const char* h : {"**Objective**", "**Model Performance**", "Influential Features**",
                            "**Regional & Policy Highlights**", "**Question**", "**Task**"}) {
        headers = headers && rich.prompt.find(h) != std::string::npos;
      }
      fs::remove_all(dir);
    }
  }
  return {parsed && matched && identical && headers,
          std::string("parse ") + (parsed ? "ok" : "wrong") + ", CO2price +20% -> " + std::to_string(fm_ids.size()) +
              " ids, costInvAgri decrease -> " + std::to_string(agri_ids.size()) + " ids, stub runs " +
              (identical ? "byte-identical" : "differ") + ", SHAP headers " + (headers ? "present" : "missing")};
}

Verdict determinism() {
  std::string sums[2];
  std::size_t files = 0;
  for (int rep = 0; rep < 2; ++rep) {
    const auto dir = scratch("determinism" + std::to_string(rep));
    EnsembleConfig c = surrogate_config();
    c.threads = rep == 0 ? 1 : threads();
    build_run(dir, BankKind::kFm, c, ShapOptions{2, 100, kSeed, c.threads});
    StubClient stub;
    step_ask(dir, kCo2Question, Space::kOutput, true, Config{}, stub);
    sums[rep] = tree_checksums(dir);
    files = static_cast<std::size_t>(std::count(sums[rep].begin(), sums[rep].end(), '\n'));
    fs::remove_all(dir);
  }
  return {sums[0] == sums[1] && files > 0,
          std::to_string(files) + " artifacts, tree checksum " + sha256_hex(sums[0]).substr(0, 16) +
              (sums[0] == sums[1] ? " equal" : " differs from " + sha256_hex(sums[1]).substr(0, 16))};
}

}  // namespace
}  // namespace forge

int main() {
  using Criterion = std::pair<const char*, std::function<forge::Verdict()>>;
  const std::vector<Criterion> criteria = {
      {"lp_correctness", forge::lp_correctness},       {"model_feasibility", forge::model_feasibility},
      {"bank_fidelity", forge::bank_fidelity},         {"feature_shapes", forge::feature_shapes},
      {"clustering_oracle", forge::clustering_oracle}, {"dispersion", forge::dispersion},
      {"surrogate_quality", forge::surrogate_quality}, {"shap_axioms", forge::shap_axioms},
      {"query_pipeline", forge::query_pipeline},       {"determinism", forge::determinism},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    forge::Verdict v;
    try {
      v = run();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    failed += !v.pass;
    std::printf("%s %s: %s\n", v.pass ? "PASS" : "FAIL", name, v.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
