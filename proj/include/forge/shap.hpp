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

#ifndef FORGE_SHAP_HPP_
#define FORGE_SHAP_HPP_

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "forge/forest.hpp"
#include "forge/tree.hpp"

namespace forge {

// Number of background rows reaching each node.
std::vector<double> background_cover(const RegressionTree& tree, const Eigen::MatrixXd& background);

// Share of a node's cover sent to `child`; 1/2 when the node has no cover.
double cover_fraction(std::span<const double> cover, int node, int child);

// Cover-weighted mean leaf value (the attribution baseline).
double expected_value(const RegressionTree& tree, std::span<const double> cover);

struct ShapResult {
  double phi0 = 0.0;
  Eigen::VectorXd phi;
};

// Exact Shapley values of the path-conditioned expectation
// v(S) = E[f(x) | x_S] under the cover distribution, by the polynomial
// tree walk. phi0 + sum(phi) = tree prediction at x.
ShapResult tree_shap(const RegressionTree& tree, const double* x, std::span<const double> cover);
// Convenience overload; empty background throws InvalidArgument.
ShapResult tree_shap(const RegressionTree& tree, const Eigen::RowVectorXd& x, const Eigen::MatrixXd& background);

struct AttributionMatrix {
  Eigen::MatrixXd phi;  // rows = attributed samples, target units
  double phi0 = 0.0;
  std::vector<int> sample_ids;  // row positions in X_test
  std::vector<std::string> feature_names;
  Eigen::MatrixXd x;  // feature values of the attributed samples
  Eigen::VectorXd prediction;  // ensemble prediction, target units
};

struct ShapOptions {
  int subsamples = 1;     // L draws per fold
  int subsample_size = 0; // m rows per draw; 0 means all rows
  std::uint64_t seed = 0;
  int threads = 1;
};

// Fold k draws L row subsets of size m without replacement; every drawn row
// is attributed under forest k and averaged over the draws that contain it
// (a fixed forest gives a row the same attribution in every draw), then
// over folds. Computed in scaled target space and mapped back: phi times
// the target range, the offset added to phi0.
AttributionMatrix ensemble_shap(const ForestEnsemble& e, const Eigen::MatrixXd& X_test,
                                const Eigen::MatrixXd& background, const ShapOptions& options);

struct GlobalImportance {
  std::vector<std::string> feature_names;
  Eigen::VectorXd values;    // mean |phi| per feature
  std::vector<int> ranking;  // feature positions, descending, name order on ties
};

GlobalImportance global_importance(const AttributionMatrix& a);

struct Driver {
  std::string feature;
  double magnitude = 0.0;   // global importance
  int sign = 0;             // sign of the mean signed attribution
  double mean_value = 0.0;  // mean feature value over the attributed samples
};

std::vector<Driver> shap_prompt_payload(const GlobalImportance& g, const AttributionMatrix& a, int k);

void write_attributions(const AttributionMatrix& a, const std::filesystem::path& path);
void write_importance(const GlobalImportance& g, const std::filesystem::path& path);

}  // namespace forge

#endif  // FORGE_SHAP_HPP_
