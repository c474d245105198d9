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

#ifndef FORGE_TREE_HPP_
#define FORGE_TREE_HPP_

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <vector>

#include "json.hpp"

namespace forge {

struct TreeParams {
  int max_depth = -1;    // < 0: unbounded
  int min_leaf = 1;
  int max_features = 0;  // features evaluated per node; 0: ceil(p / 3)
  std::uint64_t seed = 0;
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;  // x[feature] <= threshold goes left
  int left = -1;
  int right = -1;
  double value = 0.0;  // mean training target below this node
  int count = 0;       // training samples below this node

  bool leaf() const { return feature < 0; }
  bool operator==(const TreeNode&) const = default;
};

// CART regression tree; node 0 is the root.
struct RegressionTree {
  std::vector<TreeNode> nodes;
  int n_features = 0;
  int depth = 0;

  double predict(const double* x) const;
  double predict(const Eigen::Ref<const Eigen::RowVectorXd>& x) const;
  Eigen::VectorXd predict(const Eigen::MatrixXd& X) const;
  // Leaf index reached by x.
  int leaf_of(const double* x) const;

  bool operator==(const RegressionTree&) const = default;
};

// Greedy variance-reduction splits with midpoint thresholds. At each node
// the features are visited in a seeded random order until max_features
// non-constant ones have been scanned. `rows` selects (with multiplicity)
// the training samples; empty means all rows.
RegressionTree fit_tree(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const TreeParams& params,
                        std::span<const int> rows = {});

nlohmann::json to_json(const RegressionTree& tree);
RegressionTree tree_from_json(const nlohmann::json& doc);

// SplitMix64 step; used to derive independent seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace forge

#endif  // FORGE_TREE_HPP_
