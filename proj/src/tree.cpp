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

#include "forge/tree.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "forge/error.hpp"

namespace forge {
namespace {

struct Builder {
  const Eigen::MatrixXd& X;
  const Eigen::VectorXd& y;
  const TreeParams& params;
  int max_features;
  std::mt19937_64 rng;
  std::vector<int> idx;
  std::vector<int> order;
  std::vector<std::pair<double, double>> scratch;  // (x, y) of the node
  RegressionTree tree;

  // Fisher-Yates with a fixed reduction so every platform draws the same
  // permutation (std::shuffle is implementation-defined).
  void shuffle_features() {
    for (int i = static_cast<int>(order.size()) - 1; i > 0; --i) {
      const auto j = static_cast<int>(rng() % static_cast<std::uint64_t>(i + 1));
      std::swap(order[i], order[j]);
    }
  }

  int grow(int lo, int hi, int depth) {
    const int id = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    tree.depth = std::max(tree.depth, depth);
    const int n = hi - lo;
    double sum = 0.0, ymin = y[idx[lo]], ymax = y[idx[lo]];
    for (int i = lo; i < hi; ++i) {
      const double v = y[idx[i]];
      sum += v;
      ymin = std::min(ymin, v);
      ymax = std::max(ymax, v);
    }
    tree.nodes[id].value = sum / n;
    tree.nodes[id].count = n;

    if ((params.max_depth >= 0 && depth >= params.max_depth) || n < 2 * params.min_leaf || ymin == ymax) {
      return id;
    }

    shuffle_features();
    const double parent_score = sum * sum / n;
    double best = parent_score;
    int best_feature = -1;
    double best_threshold = 0.0;
    int evaluated = 0;
    for (int f : order) {
      if (evaluated >= max_features) break;
      scratch.clear();
      for (int i = lo; i < hi; ++i) scratch.emplace_back(X(idx[i], f), y[idx[i]]);
      std::sort(scratch.begin(), scratch.end(),
                [](const auto& a, const auto& b) { return a.first < b.first; });
      if (scratch.front().first == scratch.back().first) continue;
      ++evaluated;
      double left = 0.0;
      for (int i = 0; i + 1 < n; ++i) {
        left += scratch[i].second;
        const int nl = i + 1;
        const int nr = n - nl;
        if (scratch[i].first == scratch[i + 1].first) continue;
        if (nl < params.min_leaf || nr < params.min_leaf) continue;
        const double right = sum - left;
        const double score = left * left / nl + right * right / nr;
        if (score > best) {
          best = score;
          best_feature = f;
          const double a = scratch[i].first, b = scratch[i + 1].first;
          double mid = a + 0.5 * (b - a);
          if (!(mid < b)) mid = a;
          best_threshold = mid;
        }
      }
    }
    // No admissible split, or no variance reduction beyond rounding.
    if (best_feature < 0 || best - parent_score <= 1e-14 * std::max(1.0, std::abs(parent_score))) return id;

    const auto mid_it = std::stable_partition(idx.begin() + lo, idx.begin() + hi,
                                              [&](int r) { return X(r, best_feature) <= best_threshold; });
    const int mid = static_cast<int>(mid_it - idx.begin());
    tree.nodes[id].feature = best_feature;
    tree.nodes[id].threshold = best_threshold;
    const int l = grow(lo, mid, depth + 1);
    const int r = grow(mid, hi, depth + 1);
    tree.nodes[id].left = l;
    tree.nodes[id].right = r;
    return id;
  }
};

}  // namespace

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double RegressionTree::predict(const double* x) const { return nodes[leaf_of(x)].value; }

double RegressionTree::predict(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
  if (x.size() != n_features) throw DimensionError("x", "feature count differs from the tree");
  const Eigen::RowVectorXd row = x;
  return predict(row.data());
}

Eigen::VectorXd RegressionTree::predict(const Eigen::MatrixXd& X) const {
  if (X.cols() != n_features) throw DimensionError("X", "feature count differs from the tree");
  Eigen::VectorXd out(X.rows());
  Eigen::RowVectorXd row(X.cols());
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    row = X.row(i);
    out[i] = predict(row.data());
  }
  return out;
}

int RegressionTree::leaf_of(const double* x) const {
  int k = 0;
  while (!nodes[k].leaf()) k = x[nodes[k].feature] <= nodes[k].threshold ? nodes[k].left : nodes[k].right;
  return k;
}

RegressionTree fit_tree(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const TreeParams& params,
                        std::span<const int> rows) {
  if (X.rows() != y.size()) throw DimensionError("y", "length differs from the rows of X");
  if (X.rows() == 0) throw InvalidArgument("fit_tree: empty dataset");
  if (params.min_leaf < 1) throw InvalidArgument("fit_tree: min_leaf must be >= 1");
  const int p = static_cast<int>(X.cols());
  Builder b{X, y, params, params.max_features > 0 ? std::min(params.max_features, p) : std::max(1, (p + 2) / 3),
            std::mt19937_64(params.seed), {}, {}, {}, {}};
  if (rows.empty()) {
    b.idx.resize(X.rows());
    std::iota(b.idx.begin(), b.idx.end(), 0);
  } else {
    b.idx.assign(rows.begin(), rows.end());
    for (int r : b.idx) {
      if (r < 0 || r >= X.rows()) throw InvalidArgument("fit_tree: row index out of range");
    }
  }
  b.order.resize(p);
  std::iota(b.order.begin(), b.order.end(), 0);
  b.tree.n_features = p;
  b.grow(0, static_cast<int>(b.idx.size()), 0);
  return std::move(b.tree);
}

nlohmann::json to_json(const RegressionTree& tree) {
  nlohmann::json feature = nlohmann::json::array(), threshold = nlohmann::json::array(),
                 left = nlohmann::json::array(), right = nlohmann::json::array(),
                 value = nlohmann::json::array(), count = nlohmann::json::array();
  for (const auto& n : tree.nodes) {
    feature.push_back(n.feature);
    threshold.push_back(n.threshold);
    left.push_back(n.left);
    right.push_back(n.right);
    value.push_back(n.value);
    count.push_back(n.count);
  }
  return {{"n_features", tree.n_features}, {"depth", tree.depth},   {"feature", feature},
          {"threshold", threshold},        {"left", left},          {"right", right},
          {"value", value},                {"count", count}};
}

RegressionTree tree_from_json(const nlohmann::json& doc) {
  RegressionTree t;
  t.n_features = doc.at("n_features").get<int>();
  t.depth = doc.at("depth").get<int>();
  const auto& f = doc.at("feature");
  const auto n = f.size();
  for (const char* key : {"threshold", "left", "right", "value", "count"}) {
    if (doc.at(key).size() != n) throw DimensionError("tree", std::string("node array '") + key + "' has the wrong length");
  }
  t.nodes.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto& node = t.nodes[i];
    node.feature = f[i].get<int>();
    node.threshold = doc["threshold"][i].get<double>();
    node.left = doc["left"][i].get<int>();
    node.right = doc["right"][i].get<int>();
    node.value = doc["value"][i].get<double>();
    node.count = doc["count"][i].get<int>();
    if (!node.leaf() && (node.left <= 0 || node.right <= 0 || node.left >= static_cast<int>(n) ||
                         node.right >= static_cast<int>(n) || node.feature >= t.n_features)) {
      throw DimensionError("tree", "node " + std::to_string(i) + " has invalid children or feature");
    }
  }
  if (n == 0) throw DimensionError("tree", "no nodes");
  return t;
}

}  // namespace forge
