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

// Random instances shared by the unit tests and the acceptance suite.

#ifndef FORGE_TESTS_FIXTURES_HPP_
#define FORGE_TESTS_FIXTURES_HPP_

#include <Eigen/Dense>

#include <random>

#include "forge/lp.hpp"
#include "forge/similarity.hpp"
#include "forge/tree.hpp"

namespace fixture {

struct RandomLp {
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
  Eigen::VectorXd c;
};

// Feasible by construction (b is taken below A x0 for some x0 >= 0) and
// bounded by a closing row -sum(x) >= -M.
inline RandomLp random_lp(std::mt19937_64& rng, int max_vars = 6, int max_rows = 8) {
  std::uniform_int_distribution<int> nv(1, max_vars), nr(1, max_rows);
  std::uniform_real_distribution<double> u(-1.0, 1.0), pos(0.0, 2.0), slack(0.0, 1.0);
  const int n = nv(rng);
  const int m = nr(rng);
  RandomLp lp;
  lp.A.resize(m, n);
  lp.c.resize(n);
  Eigen::VectorXd x0(n);
  for (int j = 0; j < n; ++j) lp.c[j] = u(rng), x0[j] = pos(rng);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) lp.A(i, j) = u(rng);
  }
  lp.A.row(m - 1).setConstant(-1.0);
  lp.b = lp.A * x0;
  for (int i = 0; i < m; ++i) lp.b[i] -= slack(rng);
  return lp;
}

inline void grow(forge::RegressionTree& t, std::mt19937_64& rng, int node, int depth, int max_depth,
                 double split_prob) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> value(0.0, 1.0);
  t.depth = std::max(t.depth, depth);
  if (depth >= max_depth || u(rng) > split_prob) {
    t.nodes[node].value = value(rng);
    return;
  }
  const int f = std::uniform_int_distribution<int>(0, t.n_features - 1)(rng);
  t.nodes[node].feature = f;
  t.nodes[node].threshold = u(rng);
  const int l = static_cast<int>(t.nodes.size());
  t.nodes.emplace_back();
  t.nodes.emplace_back();
  t.nodes[node].left = l;
  t.nodes[node].right = l + 1;
  grow(t, rng, l, depth + 1, max_depth, split_prob);
  grow(t, rng, l + 1, depth + 1, max_depth, split_prob);
}

// Tree with uniform thresholds in (0, 1); features may repeat along a path.
inline forge::RegressionTree random_tree(std::mt19937_64& rng, int n_features, int max_depth,
                                         double split_prob = 0.8) {
  forge::RegressionTree t;
  t.n_features = n_features;
  t.nodes.emplace_back();
  grow(t, rng, 0, 0, max_depth, split_prob);
  return t;
}

inline Eigen::MatrixXd uniform_matrix(std::mt19937_64& rng, int rows, int cols) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) m(i, j) = u(rng);
  }
  return m;
}

// Symmetric dissimilarities in [0, 2); `integer` draws from 1..4 so ties are common.
inline Eigen::MatrixXd random_distances(std::mt19937_64& rng, int n, bool integer) {
  std::uniform_real_distribution<double> u(0.0, 2.0);
  std::uniform_int_distribution<int> k(1, 4);
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) D(i, j) = D(j, i) = integer ? k(rng) : u(rng);
  }
  return D;
}

inline Eigen::VectorXd condense(const Eigen::MatrixXd& D) {
  const auto n = D.rows();
  Eigen::VectorXd d(n * (n - 1) / 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) d[forge::condensed_index(n, i, j)] = D(i, j);
  }
  return d;
}

}  // namespace fixture

#endif  // FORGE_TESTS_FIXTURES_HPP_
