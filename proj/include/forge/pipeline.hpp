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

#ifndef FORGE_PIPELINE_HPP_
#define FORGE_PIPELINE_HPP_

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "forge/bank.hpp"
#include "forge/features.hpp"
#include "forge/forest.hpp"
#include "forge/narrator.hpp"
#include "forge/shap.hpp"
#include "forge/similarity.hpp"
#include "json.hpp"

namespace forge {

using OutputsMap = std::map<std::string, ScenarioOutputs, std::less<>>;

// Pooled learning data of a bank: one design row per
// (scenario, region, technology, year), scenario-major.
struct LearningSet {
  std::string target;
  DesignMatrix design;
  Eigen::VectorXd y;
  std::vector<std::string> scenario_ids;  // per design row
};

std::string default_target(BankKind kind);  // capFMs / capAgri

LearningSet build_learning_set(const ScenarioBank& bank, const OutputsMap& outputs, std::string_view target);

enum class Space { kInput, kOutput };
std::string_view space_name(Space s);
Space parse_space(std::string_view text);

// Output tensor compared across scenarios in output space.
std::string default_output(BankKind kind);  // ghgAbateFMs / costTechAgri

std::vector<NamedMatrix> input_matrices(const ScenarioBank& bank);
// Each tensor reshaped to years x (technology, region).
std::vector<NamedMatrix> output_matrices(const ScenarioBank& bank, const OutputsMap& outputs, std::string_view name);

inline constexpr double kDefaultClusterThreshold = 0.5;

struct ClusterAnalysis {
  Space space = Space::kInput;
  std::string source;  // "features" or the output tensor name
  CorrelationMatrix correlation;
  LinkageMatrix linkage;
  double t = kDefaultClusterThreshold;
  std::vector<int> labels;  // aligned with correlation.ids
  ExtremalPairs extremal;
  std::vector<std::string> warnings;
};

ClusterAnalysis analyze_clusters(std::span<const NamedMatrix> matrices, Space space, std::string source, double t);

nlohmann::json to_json(const ClusterAnalysis& a);

struct TrainedSurrogate {
  ForestEnsemble ensemble;
  Split split;
  RegressionMetrics test;
  RegressionMetrics train;
};

inline constexpr double kTestShare = 0.2;

TrainedSurrogate train_surrogate(const LearningSet& ls, const EnsembleConfig& config, double test_share = kTestShare);

Eigen::MatrixXd select_rows(const Eigen::MatrixXd& X, std::span<const int> rows);
Eigen::VectorXd select_rows(const Eigen::VectorXd& y, std::span<const int> rows);

// Region and technology with the highest mean of `values` over `rows`.
std::pair<std::string, std::string> leading_region_tech(const LearningSet& ls, std::span<const int> rows,
                                                        const Eigen::VectorXd& values);

// Command steps over a run directory. Each writes its artifacts plus a
// manifest under <run>/steps/ listing parameters and output checksums.
struct Config {
  double eps = kDefaultEps;
  double cluster_threshold = kDefaultClusterThreshold;
  nlohmann::json parameter_map = nlohmann::json::array();
  LlmClientSpec llm;
  std::string cors_origin = "*";

  static Config load(const std::filesystem::path& path);
  ParameterMap map() const;
};

void step_bank_generate(BankKind kind, const SetsSpec& sets, std::uint64_t seed, const std::filesystem::path& run);
void step_bank_run(const std::filesystem::path& run, int workers);
void step_features(const std::filesystem::path& run);
ClusterAnalysis step_cluster(const std::filesystem::path& run, Space space, double t);
TrainedSurrogate step_train(const std::filesystem::path& run, const std::string& target, const EnsembleConfig& config);
GlobalImportance step_shap(const std::filesystem::path& run, const ShapOptions& options, int top_k);
AskResult step_ask(const std::filesystem::path& run, const std::string& question, Space space, bool with_shap,
                   const Config& config, LlmClient& client);

// Artifacts a run directory holds after the steps above.
ScenarioBank load_run_bank(const std::filesystem::path& run);
OutputsMap load_run_outputs(const std::filesystem::path& run, const ScenarioBank& bank);
ClusterAnalysis load_clusters(const std::filesystem::path& run, Space space);
std::optional<PromptExtras> load_extras(const std::filesystem::path& run);

}  // namespace forge

#endif  // FORGE_PIPELINE_HPP_
