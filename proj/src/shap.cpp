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

#include "forge/shap.hpp"

#include <algorithm>
#include <atomic>
#include <numeric>
#include <random>
#include <thread>

#include "forge/csv.hpp"
#include "forge/error.hpp"

namespace forge {
namespace {

struct PathElement {
  int feature = -1;
  double zero = 0.0;    // fraction of cover flowing this way when the feature is unknown
  double one = 0.0;     // 1 if x follows this way, else 0
  double weight = 0.0;  // permutation weight
};

void extend(PathElement* path, int depth, double zero, double one, int feature) {
  path[depth] = {feature, zero, one, depth == 0 ? 1.0 : 0.0};
  for (int i = depth - 1; i >= 0; --i) {
    path[i + 1].weight += one * path[i].weight * (i + 1) / static_cast<double>(depth + 1);
    path[i].weight = zero * path[i].weight * (depth - i) / static_cast<double>(depth + 1);
  }
}

void unwind(PathElement* path, int depth, int index) {
  const double one = path[index].one;
  const double zero = path[index].zero;
  double next = path[depth].weight;
  for (int i = depth - 1; i >= 0; --i) {
    if (one != 0.0) {
      const double tmp = path[i].weight;
      path[i].weight = next * (depth + 1) / ((i + 1) * one);
      next = tmp - path[i].weight * zero * (depth - i) / static_cast<double>(depth + 1);
    } else {
      path[i].weight = path[i].weight * (depth + 1) / (zero * (depth - i));
    }
  }
  for (int i = index; i < depth; ++i) {
    path[i].feature = path[i + 1].feature;
    path[i].zero = path[i + 1].zero;
    path[i].one = path[i + 1].one;
  }
}

double unwound_sum(const PathElement* path, int depth, int index) {
  const double one = path[index].one;
  const double zero = path[index].zero;
  double next = path[depth].weight;
  double total = 0.0;
  if (one != 0.0) {
    for (int i = depth - 1; i >= 0; --i) {
      const double tmp = next / ((i + 1) * one);
      total += tmp;
      next = path[i].weight - tmp * zero * (depth - i);
    }
  } else {
    for (int i = depth - 1; i >= 0; --i) total += path[i].weight / (zero * (depth - i));
  }
  return total * (depth + 1);
}

struct Walker {
  const RegressionTree& tree;
  const double* x;
  std::span<const double> cover;
  double* phi;

  void recurse(int node, int depth, PathElement* parent, double zero, double one, int feature) {
    PathElement* path = parent + depth + 1;
    std::copy(parent, parent + depth + 1, path);
    extend(path, depth, zero, one, feature);
    const auto& n = tree.nodes[node];
    if (n.leaf()) {
      for (int i = 1; i <= depth; ++i) {
        const double w = unwound_sum(path, depth, i);
        phi[path[i].feature] += w * (path[i].one - path[i].zero) * n.value;
      }
      return;
    }
    const bool go_left = x[n.feature] <= n.threshold;
    const int hot = go_left ? n.left : n.right;
    const int cold = go_left ? n.right : n.left;
    double in_zero = 1.0, in_one = 1.0;
    int k = 0;
    for (; k <= depth; ++k) {
      if (path[k].feature == n.feature) break;
    }
    if (k != depth + 1) {
      in_zero = path[k].zero;
      in_one = path[k].one;
      unwind(path, depth, k);
      --depth;
    }
    // A branch reached neither with nor without the feature carries no weight.
    const double hot_zero = cover_fraction(cover, node, hot) * in_zero;
    if (hot_zero != 0.0 || in_one != 0.0) recurse(hot, depth + 1, path, hot_zero, in_one, n.feature);
    const double cold_zero = cover_fraction(cover, node, cold) * in_zero;
    if (cold_zero != 0.0) recurse(cold, depth + 1, path, cold_zero, 0.0, n.feature);
  }
};

double expected_below(const RegressionTree& tree, std::span<const double> cover, int node) {
  const auto& n = tree.nodes[node];
  if (n.leaf()) return n.value;
  return cover_fraction(cover, node, n.left) * expected_below(tree, cover, n.left) +
         cover_fraction(cover, node, n.right) * expected_below(tree, cover, n.right);
}

}  // namespace

std::vector<double> background_cover(const RegressionTree& tree, const Eigen::MatrixXd& background) {
  if (background.rows() == 0) throw InvalidArgument("tree_shap: empty background");
  if (background.cols() != tree.n_features) throw DimensionError("background", "feature count differs from the tree");
  std::vector<double> cover(tree.nodes.size(), 0.0);
  Eigen::RowVectorXd row(background.cols());
  for (Eigen::Index i = 0; i < background.rows(); ++i) {
    row = background.row(i);
    int k = 0;
    cover[0] += 1.0;
    while (!tree.nodes[k].leaf()) {
      const auto& n = tree.nodes[k];
      k = row[n.feature] <= n.threshold ? n.left : n.right;
      cover[k] += 1.0;
    }
  }
  return cover;
}

double cover_fraction(std::span<const double> cover, int node, int child) {
  return cover[node] > 0.0 ? cover[child] / cover[node] : 0.5;
}

double expected_value(const RegressionTree& tree, std::span<const double> cover) {
  return expected_below(tree, cover, 0);
}

ShapResult tree_shap(const RegressionTree& tree, const double* x, std::span<const double> cover) {
  if (cover.size() != tree.nodes.size()) throw DimensionError("cover", "one entry per node required");
  ShapResult out;
  out.phi0 = expected_value(tree, cover);
  out.phi = Eigen::VectorXd::Zero(tree.n_features);
  const int maxd = tree.depth + 2;
  std::vector<PathElement> buffer(static_cast<std::size_t>((maxd + 1) * (maxd + 2) / 2 + 1));
  Walker w{tree, x, cover, out.phi.data()};
  w.recurse(0, 0, buffer.data(), 1.0, 1.0, -1);
  return out;
}

ShapResult tree_shap(const RegressionTree& tree, const Eigen::RowVectorXd& x, const Eigen::MatrixXd& background) {
  if (x.size() != tree.n_features) throw DimensionError("x", "feature count differs from the tree");
  const auto cover = background_cover(tree, background);
  return tree_shap(tree, x.data(), cover);
}

AttributionMatrix ensemble_shap(const ForestEnsemble& e, const Eigen::MatrixXd& X_test,
                                const Eigen::MatrixXd& background, const ShapOptions& options) {
  const auto n = static_cast<int>(X_test.rows());
  if (X_test.cols() != e.n_features) throw DimensionError("X_test", "feature count differs from the ensemble");
  const int m = options.subsample_size > 0 ? options.subsample_size : n;
  if (m > n || options.subsamples < 1) throw InvalidArgument("ensemble_shap: subsample larger than the test set");
  const int K = static_cast<int>(e.folds.size());

  // Rows drawn by any (fold, draw).
  std::vector<char> drawn(n, 0);
  for (int k = 0; k < K; ++k) {
    std::mt19937_64 rng(mix_seed(options.seed, static_cast<std::uint64_t>(k)));
    for (int l = 0; l < options.subsamples; ++l) {
      std::vector<int> pool(n);
      std::iota(pool.begin(), pool.end(), 0);
      for (int i = 0; i < m; ++i) {
        const auto j = i + static_cast<int>(rng() % static_cast<std::uint64_t>(n - i));
        std::swap(pool[i], pool[j]);
        drawn[pool[i]] = 1;
      }
    }
  }
  AttributionMatrix a;
  for (int i = 0; i < n; ++i) {
    if (drawn[i]) a.sample_ids.push_back(i);
  }
  a.feature_names = e.feature_names;
  const auto rows = static_cast<Eigen::Index>(a.sample_ids.size());

  // Covers and baselines per tree.
  std::vector<std::vector<std::vector<double>>> covers(K);
  double phi0 = 0.0;
  for (int k = 0; k < K; ++k) {
    double fold_phi0 = 0.0;
    for (const auto& t : e.folds[k].trees) {
      covers[k].push_back(background_cover(t, background));
      fold_phi0 += expected_value(t, covers[k].back());
    }
    phi0 += fold_phi0 / static_cast<double>(e.folds[k].trees.size());
  }
  phi0 /= K;

  a.phi = Eigen::MatrixXd::Zero(rows, e.n_features);
  a.x.resize(rows, e.n_features);
  std::atomic<Eigen::Index> next{0};
  auto work = [&] {
    Eigen::RowVectorXd row(e.n_features);
    for (Eigen::Index r = next++; r < rows; r = next++) {
      row = X_test.row(a.sample_ids[r]);
      a.x.row(r) = row;
      Eigen::VectorXd acc = Eigen::VectorXd::Zero(e.n_features);
      for (int k = 0; k < K; ++k) {
        Eigen::VectorXd fold = Eigen::VectorXd::Zero(e.n_features);
        const auto& trees = e.folds[k].trees;
        for (std::size_t t = 0; t < trees.size(); ++t) fold += tree_shap(trees[t], row.data(), covers[k][t]).phi;
        acc += fold / static_cast<double>(trees.size());
      }
      a.phi.row(r) = (acc / K * e.y_range()).transpose();
    }
  };
  std::vector<std::thread> pool;
  for (int t = 1; t < std::max(1, options.threads); ++t) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();

  a.phi0 = phi0 * e.y_range() + e.y_min;
  a.prediction = predict(e, a.x);
  return a;
}

GlobalImportance global_importance(const AttributionMatrix& a) {
  if (a.phi.rows() == 0) throw InvalidArgument("global_importance: no attributed samples");
  GlobalImportance g;
  g.feature_names = a.feature_names;
  if (g.feature_names.empty()) {
    for (Eigen::Index j = 0; j < a.phi.cols(); ++j) g.feature_names.push_back("f" + std::to_string(j));
  }
  g.values = a.phi.cwiseAbs().colwise().mean().transpose();
  g.ranking.resize(a.phi.cols());
  std::iota(g.ranking.begin(), g.ranking.end(), 0);
  std::stable_sort(g.ranking.begin(), g.ranking.end(), [&](int i, int j) {
    if (g.values[i] != g.values[j]) return g.values[i] > g.values[j];
    return g.feature_names[i] < g.feature_names[j];
  });
  return g;
}

std::vector<Driver> shap_prompt_payload(const GlobalImportance& g, const AttributionMatrix& a, int k) {
  if (k < 0 || k > static_cast<int>(g.ranking.size())) throw InvalidArgument("shap_prompt_payload: k out of range");
  std::vector<Driver> out;
  for (int i = 0; i < k; ++i) {
    const int j = g.ranking[i];
    const double mean_phi = a.phi.col(j).mean();
    out.push_back({g.feature_names[j], g.values[j], (mean_phi > 0) - (mean_phi < 0), a.x.col(j).mean()});
  }
  return out;
}

void write_attributions(const AttributionMatrix& a, const std::filesystem::path& path) {
  csv::Table t;
  t.header = {"sample", "phi0"};
  for (Eigen::Index j = 0; j < a.phi.cols(); ++j) {
    t.header.push_back(j < static_cast<Eigen::Index>(a.feature_names.size()) ? a.feature_names[j]
                                                                              : "f" + std::to_string(j));
  }
  for (Eigen::Index i = 0; i < a.phi.rows(); ++i) {
    std::vector<std::string> row = {std::to_string(a.sample_ids[i]), csv::format(a.phi0)};
    for (Eigen::Index j = 0; j < a.phi.cols(); ++j) row.push_back(csv::format(a.phi(i, j)));
    t.rows.push_back(std::move(row));
  }
  csv::write(path, t);
}

void write_importance(const GlobalImportance& g, const std::filesystem::path& path) {
  csv::Table t;
  t.header = {"rank", "feature", "importance"};
  for (std::size_t r = 0; r < g.ranking.size(); ++r) {
    const int j = g.ranking[r];
    t.rows.push_back({std::to_string(r + 1), g.feature_names[j], csv::format(g.values[j])});
  }
  csv::write(path, t);
}

}  // namespace forge
