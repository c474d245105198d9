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

#ifndef FORGE_SIMILARITY_HPP_
#define FORGE_SIMILARITY_HPP_

#include <Eigen/Dense>

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace forge {

// Column-wise standardization with the sample standard deviation (n - 1).
// Constant columns become 0.
Eigen::MatrixXd zscore(const Eigen::MatrixXd& m);

// Pearson coefficient; std::nullopt when either vector is constant.
std::optional<double> pearson(std::span<const double> u, std::span<const double> v);

struct CorrelationMatrix {
  std::vector<std::string> ids;
  Eigen::MatrixXd rho;
};

struct NamedMatrix {
  std::string id;
  Eigen::MatrixXd values;  // rows = observations, cols = features
};

// z-scores each matrix per column, vectorizes row-major and correlates
// every pair. Scenarios whose standardized vector is constant have no
// defined correlation; they are dropped from `ids` and reported through
// `warnings`. Differing shapes throw DimensionError naming both ids.
CorrelationMatrix scenario_correlation(std::span<const NamedMatrix> matrices,
                                       std::vector<std::string>* warnings = nullptr);

// Condensed 1 - rho, upper triangle row by row: (0,1), (0,2), ..., (1,2), ...
Eigen::VectorXd to_dissimilarity(const CorrelationMatrix& c);
// Position of pair (i, j), i < j, in the condensed vector.
Eigen::Index condensed_index(Eigen::Index n, Eigen::Index i, Eigen::Index j);
// Number of points behind a condensed vector; throws on a bad length.
Eigen::Index condensed_size(Eigen::Index length);

struct Merge {
  int a = 0;  // cluster ids, a < b; points are 0..n-1, merge k creates n+k
  int b = 0;
  double height = 0.0;
  int size = 0;

  bool operator==(const Merge&) const = default;
};

struct LinkageMatrix {
  int n = 0;
  std::vector<Merge> merges;
};

// UPGMA. Cluster distance is the plain mean of member pairwise distances,
// summed in ascending point order. Equal distances merge the pair with the
// smallest (min id, max id).
LinkageMatrix average_linkage(const Eigen::VectorXd& condensed);

// Labels per point (1-based, dense, numbered by first appearance) after
// cutting every merge with height <= t.
std::vector<int> flat_clusters(const LinkageMatrix& z, double t);

struct ExtremalPairs {
  std::pair<std::string, std::string> most;  // (later id, earlier id)
  double most_rho = 0.0;
  std::pair<std::string, std::string> least;
  double least_rho = 0.0;
};

// Max / min over unordered pairs; ties go to the lexicographically first pair.
ExtremalPairs extremal_pairs(const CorrelationMatrix& c);
// "Most similar scenarios: ('S06', 'S04') with correlation 1.0000" and the
// matching "Least similar" line.
std::string format_extremal(const ExtremalPairs& p);

// 1/|C|^2 * sum over ordered member pairs, diagonal included.
double intra_cluster_mean(const CorrelationMatrix& c, std::span<const int> labels, int k);

void write_correlation(const CorrelationMatrix& c, const std::filesystem::path& path);
CorrelationMatrix read_correlation(const std::filesystem::path& path);
void write_linkage(const LinkageMatrix& z, const std::filesystem::path& path);
void write_labels(std::span<const std::string> ids, std::span<const int> labels,
                  const std::filesystem::path& path);

}  // namespace forge

#endif  // FORGE_SIMILARITY_HPP_
