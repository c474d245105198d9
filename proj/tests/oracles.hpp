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

// Independent reference computations used by the unit tests and the
// acceptance suite. Each one is brute force on purpose.

#ifndef FORGE_TESTS_ORACLES_HPP_
#define FORGE_TESTS_ORACLES_HPP_

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <set>
#include <span>
#include <vector>

#include "forge/similarity.hpp"
#include "forge/tree.hpp"

namespace oracle {

// min c'x s.t. Ax >= b, x >= 0 by enumerating every basic solution.
// nullopt when no vertex is feasible.
inline std::optional<double> vertex_optimum(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                                            const Eigen::VectorXd& c) {
  const auto m = A.rows();
  const auto n = A.cols();
  Eigen::MatrixXd G(m + n, n);
  G << A, Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd h(m + n);
  h << b, Eigen::VectorXd::Zero(n);
  std::optional<double> best;
  std::vector<int> pick(n);
  std::function<void(int, int)> rec = [&](int start, int depth) {
    if (depth == n) {
      Eigen::MatrixXd S(n, n);
      Eigen::VectorXd r(n);
      for (int i = 0; i < n; ++i) S.row(i) = G.row(pick[i]), r[i] = h[pick[i]];
      Eigen::FullPivLU<Eigen::MatrixXd> lu(S);
      if (lu.rank() < n) return;
      const Eigen::VectorXd x = lu.solve(r);
      const Eigen::VectorXd lhs = G * x;
      for (Eigen::Index i = 0; i < m + n; ++i) {
        if (lhs[i] < h[i] - 1e-9 * (1.0 + std::abs(h[i]))) return;
      }
      const double v = c.dot(x);
      if (!best || v < *best) best = v;
      return;
    }
    for (int i = start; i < m + n; ++i) {
      pick[depth] = i;
      rec(i + 1, depth + 1);
    }
  };
  rec(0, 0);
  return best;
}

// Average linkage straight from the definition on a full distance matrix.
inline forge::LinkageMatrix upgma(const Eigen::MatrixXd& D) {
  const int n = static_cast<int>(D.rows());
  std::vector<std::pair<int, std::set<int>>> clusters;
  for (int i = 0; i < n; ++i) clusters.push_back({i, {i}});
  forge::LinkageMatrix z;
  z.n = n;
  for (int step = 0; step < n - 1; ++step) {
    double best = std::numeric_limits<double>::infinity();
    std::pair<int, int> best_ids{n * 2, n * 2};
    std::size_t bx = 0, by = 0;
    for (std::size_t x = 0; x < clusters.size(); ++x) {
      for (std::size_t y = 0; y < clusters.size(); ++y) {
        if (clusters[x].first >= clusters[y].first) continue;
        double sum = 0.0;
        for (int a : clusters[x].second) {
          for (int b : clusters[y].second) sum += D(a, b);
        }
        const double d = sum / (double(clusters[x].second.size()) * double(clusters[y].second.size()));
        const std::pair<int, int> ids{clusters[x].first, clusters[y].first};
        if (d < best || (d == best && ids < best_ids)) best = d, best_ids = ids, bx = x, by = y;
      }
    }
    std::set<int> merged = clusters[bx].second;
    merged.insert(clusters[by].second.begin(), clusters[by].second.end());
    z.merges.push_back({best_ids.first, best_ids.second, best, static_cast<int>(merged.size())});
    clusters.erase(clusters.begin() + static_cast<std::ptrdiff_t>(std::max(bx, by)));
    clusters.erase(clusters.begin() + static_cast<std::ptrdiff_t>(std::min(bx, by)));
    clusters.push_back({n + step, merged});
  }
  return z;
}

// Node visit counts of a background set, by explicit routing.
inline std::vector<double> route_counts(const forge::RegressionTree& t, const Eigen::MatrixXd& background) {
  std::vector<double> cover(t.nodes.size(), 0.0);
  for (Eigen::Index i = 0; i < background.rows(); ++i) {
    int k = 0;
    while (true) {
      cover[k] += 1.0;
      const auto& nd = t.nodes[k];
      if (nd.leaf()) break;
      k = background(i, nd.feature) <= nd.threshold ? nd.left : nd.right;
    }
  }
  return cover;
}

// Value of coalition S (bitmask): features in S follow x, the rest are
// integrated out with background cover fractions (0.5 where a node saw no
// background sample).
inline double coalition_value(const forge::RegressionTree& t, const std::vector<double>& cover,
                              const Eigen::RowVectorXd& x, unsigned S, int node = 0) {
  const auto& nd = t.nodes[node];
  if (nd.leaf()) return nd.value;
  if (S & (1u << nd.feature)) {
    return coalition_value(t, cover, x, S, x[nd.feature] <= nd.threshold ? nd.left : nd.right);
  }
  const double wl = cover[node] > 0 ? cover[nd.left] / cover[node] : 0.5;
  const double wr = cover[node] > 0 ? cover[nd.right] / cover[node] : 0.5;
  return wl * coalition_value(t, cover, x, S, nd.left) + wr * coalition_value(t, cover, x, S, nd.right);
}

// Shapley values over all 2^d coalitions.
inline Eigen::VectorXd exhaustive_shapley(const forge::RegressionTree& t, const Eigen::RowVectorXd& x,
                                          const Eigen::MatrixXd& background) {
  const int d = t.n_features;
  const auto cover = route_counts(t, background);
  std::vector<double> fact(d + 1, 1.0);
  for (int i = 1; i <= d; ++i) fact[i] = fact[i - 1] * i;
  Eigen::VectorXd phi = Eigen::VectorXd::Zero(d);
  for (int j = 0; j < d; ++j) {
    for (unsigned S = 0; S < (1u << d); ++S) {
      if (S & (1u << j)) continue;
      const int s = __builtin_popcount(S);
      const double w = fact[s] * fact[d - s - 1] / fact[d];
      phi[j] += w * (coalition_value(t, cover, x, S | (1u << j)) - coalition_value(t, cover, x, S));
    }
  }
  return phi;
}

struct BestSplit {
  double threshold = 0.0;
  double left_mean = 0.0;
  double right_mean = 0.0;
};

// Best single split of a 1-D dataset by total squared error.
inline BestSplit exhaustive_split(std::span<const double> x, std::span<const double> y) {
  std::vector<double> values(x.begin(), x.end());
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  BestSplit best;
  double best_sse = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k + 1 < values.size(); ++k) {
    const double thr = 0.5 * (values[k] + values[k + 1]);
    double sl = 0, sr = 0;
    int nl = 0, nr = 0;
    for (std::size_t i = 0; i < x.size(); ++i) (x[i] <= thr ? (sl += y[i], ++nl) : (sr += y[i], ++nr));
    const double ml = sl / nl, mr = sr / nr;
    double sse = 0;
    for (std::size_t i = 0; i < x.size(); ++i) sse += std::pow(y[i] - (x[i] <= thr ? ml : mr), 2);
    if (sse < best_sse) best_sse = sse, best = {thr, ml, mr};
  }
  return best;
}

}  // namespace oracle

#endif  // FORGE_TESTS_ORACLES_HPP_
