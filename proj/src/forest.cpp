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

#include "forge/forest.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <thread>

#include "forge/error.hpp"

namespace forge {

using json = nlohmann::json;

double Forest::predict(const double* x) const {
  double sum = 0.0;
  for (const auto& t : trees) sum += t.predict(x);
  return sum / static_cast<double>(trees.size());
}

std::vector<int> permutation(int n, std::uint64_t seed) {
  std::vector<int> p(n);
  std::iota(p.begin(), p.end(), 0);
  std::mt19937_64 rng(seed);
  for (int i = n - 1; i > 0; --i) {
    const auto j = static_cast<int>(rng() % static_cast<std::uint64_t>(i + 1));
    std::swap(p[i], p[j]);
  }
  return p;
}

Split train_test_split(int n, double test_share, std::uint64_t seed) {
  if (!(test_share >= 0.0 && test_share < 1.0)) throw InvalidArgument("test share must lie in [0, 1)");
  const auto p = permutation(n, seed);
  const int n_test = static_cast<int>(std::lround(n * test_share));
  Split s;
  s.test.assign(p.begin(), p.begin() + n_test);
  s.train.assign(p.begin() + n_test, p.end());
  std::sort(s.test.begin(), s.test.end());
  std::sort(s.train.begin(), s.train.end());
  return s;
}

ForestEnsemble fit_ensemble(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const EnsembleConfig& config,
                            std::vector<std::string> feature_names) {
  const int n = static_cast<int>(X.rows());
  if (y.size() != n) throw DimensionError("y", "length differs from the rows of X");
  if (config.n_folds < 1 || config.trees_per_forest < 1) throw InvalidArgument("fit_ensemble: need >= 1 fold and tree");
  if (n < config.n_folds || n == 0) throw InvalidArgument("fit_ensemble: fewer rows than folds");
  if (!y.allFinite()) throw InvalidArgument("fit_ensemble: non-finite target");
  if (!feature_names.empty() && static_cast<Eigen::Index>(feature_names.size()) != X.cols()) {
    throw DimensionError("feature_names", "count differs from the columns of X");
  }

  ForestEnsemble e;
  e.config = config;
  e.n_features = static_cast<int>(X.cols());
  e.feature_names = std::move(feature_names);
  e.y_min = y.minCoeff();
  e.y_max = y.maxCoeff();
  const double range = e.y_range();
  const Eigen::VectorXd ys =
      range > 0.0 ? Eigen::VectorXd((y.array() - e.y_min) / range) : Eigen::VectorXd::Zero(n);

  const int K = config.n_folds;
  const auto perm = permutation(n, mix_seed(config.seed, 0x5eedf01dULL));
  e.folds.resize(K);
  for (int k = 0; k < K; ++k) {
    e.seeds.push_back(mix_seed(config.seed, static_cast<std::uint64_t>(k)));
    auto& rows = e.folds[k].rows;
    if (K == 1) {
      rows = perm;
    } else {
      const int lo = static_cast<int>(static_cast<std::int64_t>(k) * n / K);
      const int hi = static_cast<int>(static_cast<std::int64_t>(k + 1) * n / K);
      for (int i = 0; i < n; ++i) {
        if (i < lo || i >= hi) rows.push_back(perm[i]);
      }
    }
    std::sort(rows.begin(), rows.end());
    e.folds[k].trees.resize(config.trees_per_forest);
  }

  const int tasks = K * config.trees_per_forest;
  std::atomic<int> next{0};
  std::vector<std::string> errors(tasks);
  auto work = [&] {
    for (int task = next++; task < tasks; task = next++) {
      const int k = task / config.trees_per_forest;
      const int j = task % config.trees_per_forest;
      const auto& rows = e.folds[k].rows;
      TreeParams params = config.tree;
      params.seed = mix_seed(e.seeds[k], static_cast<std::uint64_t>(j));
      std::vector<int> sample;
      if (config.bootstrap) {
        std::mt19937_64 rng(mix_seed(params.seed, 0xb007ULL));
        sample.resize(rows.size());
        for (auto& s : sample) s = rows[rng() % rows.size()];
      } else {
        sample = rows;
      }
      try {
        e.folds[k].trees[j] = fit_tree(X, ys, params, sample);
      } catch (const std::exception& ex) {
        errors[task] = ex.what();
      }
    }
  };
  std::vector<std::thread> pool;
  for (int t = 1; t < std::max(1, config.threads); ++t) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  for (const auto& err : errors) {
    if (!err.empty()) throw Error("fit_failed", err);
  }
  return e;
}

Eigen::VectorXd predict_scaled(const ForestEnsemble& e, const Eigen::MatrixXd& X) {
  if (X.cols() != e.n_features) {
    throw DimensionError("X", "expected " + std::to_string(e.n_features) + " columns, got " + std::to_string(X.cols()));
  }
  Eigen::VectorXd out(X.rows());
  Eigen::RowVectorXd row(X.cols());
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    row = X.row(i);
    double sum = 0.0;
    for (const auto& f : e.folds) sum += f.predict(row.data());
    out[i] = sum / static_cast<double>(e.folds.size());
  }
  return out;
}

Eigen::VectorXd predict(const ForestEnsemble& e, const Eigen::MatrixXd& X) {
  return (predict_scaled(e, X).array() * e.y_range() + e.y_min).matrix();
}

RegressionMetrics evaluate(const Eigen::VectorXd& y_true, const Eigen::VectorXd& y_pred) {
  if (y_true.size() != y_pred.size()) throw DimensionError("y_pred", "length differs from y_true");
  if (y_true.size() < 2) throw InvalidArgument("evaluate: need at least two samples");
  const double m = static_cast<double>(y_true.size());
  const double sse = (y_true - y_pred).squaredNorm();
  const double sst = (y_true.array() - y_true.mean()).matrix().squaredNorm();
  RegressionMetrics out;
  out.rmse = std::sqrt(sse / m);
  out.r2 = sst > 0.0 ? 1.0 - sse / sst : (sse == 0.0 ? 1.0 : 0.0);
  return out;
}

json to_json(const ForestEnsemble& e) {
  const auto& c = e.config;
  json folds = json::array();
  for (const auto& f : e.folds) {
    json trees = json::array();
    for (const auto& t : f.trees) trees.push_back(to_json(t));
    folds.push_back({{"rows", f.rows}, {"trees", trees}});
  }
  return {{"schema", 1},
          {"kind", "forest_ensemble"},
          {"config",
           {{"n_folds", c.n_folds},
            {"trees_per_forest", c.trees_per_forest},
            {"max_depth", c.tree.max_depth},
            {"min_leaf", c.tree.min_leaf},
            {"max_features", c.tree.max_features},
            {"bootstrap", c.bootstrap},
            {"seed", c.seed}}},
          {"y_min", e.y_min},
          {"y_max", e.y_max},
          {"n_features", e.n_features},
          {"feature_names", e.feature_names},
          {"seeds", e.seeds},
          {"folds", folds}};
}

ForestEnsemble ensemble_from_json(const json& doc) {
  if (doc.value("schema", 0) != 1 || doc.value("kind", "") != "forest_ensemble") {
    throw IoError("not a schema-1 forest ensemble document");
  }
  ForestEnsemble e;
  const auto& c = doc.at("config");
  e.config.n_folds = c.at("n_folds").get<int>();
  e.config.trees_per_forest = c.at("trees_per_forest").get<int>();
  e.config.tree.max_depth = c.at("max_depth").get<int>();
  e.config.tree.min_leaf = c.at("min_leaf").get<int>();
  e.config.tree.max_features = c.at("max_features").get<int>();
  e.config.bootstrap = c.at("bootstrap").get<bool>();
  e.config.seed = c.at("seed").get<std::uint64_t>();
  e.y_min = doc.at("y_min").get<double>();
  e.y_max = doc.at("y_max").get<double>();
  e.n_features = doc.at("n_features").get<int>();
  e.feature_names = doc.at("feature_names").get<std::vector<std::string>>();
  e.seeds = doc.at("seeds").get<std::vector<std::uint64_t>>();
  for (const auto& f : doc.at("folds")) {
    Forest forest;
    forest.rows = f.at("rows").get<std::vector<int>>();
    for (const auto& t : f.at("trees")) {
      forest.trees.push_back(tree_from_json(t));
      if (forest.trees.back().n_features != e.n_features) throw DimensionError("tree", "feature count mismatch");
    }
    if (forest.trees.empty()) throw DimensionError("forest", "fold without trees");
    e.folds.push_back(std::move(forest));
  }
  if (e.folds.empty()) throw DimensionError("ensemble", "no folds");
  return e;
}

void save_ensemble(const ForestEnsemble& e, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << to_json(e).dump() << '\n';
}

ForestEnsemble load_ensemble(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return ensemble_from_json(json::parse(in));
  } catch (const json::exception& ex) {
    throw IoError(path.string() + ": " + ex.what());
  }
}

}  // namespace forge
