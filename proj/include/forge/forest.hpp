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

#ifndef FORGE_FOREST_HPP_
#define FORGE_FOREST_HPP_

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "forge/tree.hpp"

namespace forge {

struct EnsembleConfig {
  int n_folds = 10;
  int trees_per_forest = 50;
  TreeParams tree;          // seed field ignored; per-tree seeds are derived
  bool bootstrap = true;    // per-tree resample of the fold data
  std::uint64_t seed = 0;
  int threads = 1;
};

// One bagged forest: trees trained on resamples of the fold's rows.
struct Forest {
  std::vector<RegressionTree> trees;
  std::vector<int> rows;  // training rows of this fold

  double predict(const double* x) const;
};

// K forests plus the min-max target scaler. Forests predict in scaled
// target space; predict() maps back to target units.
struct ForestEnsemble {
  EnsembleConfig config;
  std::vector<Forest> folds;
  std::vector<std::uint64_t> seeds;  // per-fold
  double y_min = 0.0;
  double y_max = 1.0;
  int n_features = 0;
  std::vector<std::string> feature_names;

  double y_range() const { return y_max - y_min; }
};

// Fold k trains on every row outside the k-th block of a seeded
// permutation (all rows when K = 1). Targets are min-max scaled first; a
// constant target is kept with a zero range. Non-finite targets or fewer
// rows than folds throw InvalidArgument.
ForestEnsemble fit_ensemble(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const EnsembleConfig& config,
                            std::vector<std::string> feature_names = {});

// Scaled-space mean over folds of the forest means.
Eigen::VectorXd predict_scaled(const ForestEnsemble& e, const Eigen::MatrixXd& X);
// predict_scaled mapped back to target units.
Eigen::VectorXd predict(const ForestEnsemble& e, const Eigen::MatrixXd& X);

struct RegressionMetrics {
  double rmse = 0.0;
  double r2 = 0.0;
};

RegressionMetrics evaluate(const Eigen::VectorXd& y_true, const Eigen::VectorXd& y_pred);

// Seeded split into (train, test) row lists; test gets round(n * test_share).
struct Split {
  std::vector<int> train;
  std::vector<int> test;
};
Split train_test_split(int n, double test_share, std::uint64_t seed);

// Deterministic permutation of 0..n-1.
std::vector<int> permutation(int n, std::uint64_t seed);

nlohmann::json to_json(const ForestEnsemble& e);
ForestEnsemble ensemble_from_json(const nlohmann::json& doc);
void save_ensemble(const ForestEnsemble& e, const std::filesystem::path& path);
ForestEnsemble load_ensemble(const std::filesystem::path& path);

}  // namespace forge

#endif  // FORGE_FOREST_HPP_
