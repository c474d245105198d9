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

#include <gtest/gtest.h>

#include <random>
#include <set>

#include "fixtures.hpp"
#include "forge/error.hpp"
#include "forge/similarity.hpp"
#include "oracles.hpp"

namespace forge {
namespace {

using fixture::condense;
using fixture::random_distances;

TEST(Upgma, MatchesBruteForceOnRandomInstances) {
  std::mt19937_64 rng(8128);
  std::uniform_int_distribution<int> size(2, 10);
  for (int trial = 0; trial < 200; ++trial) {
    // Every fourth instance uses small integers so ties are frequent.
    const auto D = random_distances(rng, size(rng), trial % 4 == 0);
    const auto got = average_linkage(condense(D));
    const auto want = oracle::upgma(D);
    ASSERT_EQ(got.merges.size(), want.merges.size());
    for (std::size_t k = 0; k < got.merges.size(); ++k) {
      EXPECT_EQ(got.merges[k], want.merges[k]) << "trial " << trial << " merge " << k;
    }
  }
}

TEST(Upgma, HandExample) {
  // Points 0,1 close; 2 far from both.
  Eigen::MatrixXd D(3, 3);
  D << 0, 0.2, 1.0, 0.2, 0, 0.6, 1.0, 0.6, 0;
  const auto z = average_linkage(condense(D));
  ASSERT_EQ(z.merges.size(), 2u);
  EXPECT_EQ(z.merges[0], (Merge{0, 1, 0.2, 2}));
  EXPECT_EQ(z.merges[1].a, 2);
  EXPECT_EQ(z.merges[1].b, 3);
  EXPECT_DOUBLE_EQ(z.merges[1].height, 0.8);
  EXPECT_EQ(z.merges[1].size, 3);
}

TEST(Upgma, RejectsBadInput) {
  EXPECT_THROW(average_linkage(Eigen::VectorXd(0)), InvalidArgument);
  EXPECT_THROW(condensed_size(4), DimensionError);
  EXPECT_EQ(condensed_size(325), 26);
}

TEST(FlatClusters, CutsAtThreshold) {
  Eigen::MatrixXd D(4, 4);
  D << 0, 0.1, 0.9, 0.9, 0.1, 0, 0.9, 0.9, 0.9, 0.9, 0, 0.2, 0.9, 0.9, 0.2, 0;
  const auto z = average_linkage(condense(D));
  EXPECT_EQ(flat_clusters(z, 0.05), (std::vector<int>{1, 2, 3, 4}));
  EXPECT_EQ(flat_clusters(z, 0.15), (std::vector<int>{1, 1, 2, 3}));
  EXPECT_EQ(flat_clusters(z, 0.5), (std::vector<int>{1, 1, 2, 2}));
  EXPECT_EQ(flat_clusters(z, 0.9), (std::vector<int>{1, 1, 1, 1}));
  EXPECT_THROW(flat_clusters(z, 0.0), InvalidArgument);
}

TEST(FlatClusters, AboveMaxHeightGivesOneClusterOf26) {
  std::mt19937_64 rng(26);
  const auto D = random_distances(rng, 26, false);
  const auto z = average_linkage(condense(D));
  double top = 0.0;
  for (const auto& m : z.merges) top = std::max(top, m.height);
  const auto labels = flat_clusters(z, top + 1e-9);
  EXPECT_EQ(std::set<int>(labels.begin(), labels.end()).size(), 1u);
  EXPECT_EQ(labels.size(), 26u);
  EXPECT_EQ(z.merges.back().size, 26);
}

TEST(FlatClusters, LabelsAreDenseByFirstAppearance) {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 50; ++trial) {
    const auto D = random_distances(rng, 9, trial % 2 == 0);
    const auto labels = flat_clusters(average_linkage(condense(D)), 0.7);
    int next = 1;
    for (int l : labels) {
      ASSERT_LE(l, next);
      if (l == next) ++next;
    }
  }
}

TEST(Pearson, HandCasesAndConstantVectors) {
  const std::vector<double> a = {1, 2, 3, 4}, b = {2, 4, 6, 8}, c = {4, 3, 2, 1}, k = {5, 5, 5, 5};
  EXPECT_DOUBLE_EQ(*pearson(a, b), 1.0);
  EXPECT_DOUBLE_EQ(*pearson(a, c), -1.0);
  EXPECT_FALSE(pearson(a, k).has_value());
  const std::vector<double> short_v = {1, 2};
  EXPECT_THROW(pearson(a, short_v), DimensionError);
}

TEST(Zscore, SampleStandardDeviation) {
  Eigen::MatrixXd m(3, 2);
  m << 1, 4, 2, 4, 3, 4;
  const auto z = zscore(m);
  EXPECT_DOUBLE_EQ(z(0, 0), -1.0);
  EXPECT_DOUBLE_EQ(z(1, 0), 0.0);
  EXPECT_DOUBLE_EQ(z(2, 0), 1.0);
  EXPECT_EQ(z.col(1).cwiseAbs().sum(), 0.0);
}

TEST(Correlation, PipelineMatchesDirectComputation) {
  std::mt19937_64 rng(4);
  std::vector<NamedMatrix> ms;
  for (int s = 0; s < 5; ++s) ms.push_back({"S0" + std::to_string(s + 1), fixture::uniform_matrix(rng, 6, 3)});
  const auto c = scenario_correlation(ms);
  ASSERT_EQ(c.ids.size(), 5u);
  for (int i = 0; i < 5; ++i) {
    EXPECT_EQ(c.rho(i, i), 1.0);
    for (int j = 0; j < 5; ++j) {
      const Eigen::MatrixXd zi = zscore(ms[i].values), zj = zscore(ms[j].values);
      // Row-major vectorization: transpose then flatten column-major.
      const Eigen::MatrixXd ti = zi.transpose(), tj = zj.transpose();
      const std::vector<double> u(ti.data(), ti.data() + ti.size()), v(tj.data(), tj.data() + tj.size());
      EXPECT_NEAR(c.rho(i, j), *pearson(u, v), 1e-14);
      EXPECT_EQ(c.rho(i, j), c.rho(j, i));
    }
  }
}

TEST(Correlation, ConstantScenarioIsExcludedWithWarning) {
  std::mt19937_64 rng(4);
  std::vector<NamedMatrix> ms = {{"S01", fixture::uniform_matrix(rng, 4, 3)},
                                 {"S02", Eigen::MatrixXd::Constant(4, 3, 2.0)},
                                 {"S03", fixture::uniform_matrix(rng, 4, 3)}};
  std::vector<std::string> warnings;
  const auto c = scenario_correlation(ms, &warnings);
  EXPECT_EQ(c.ids, (std::vector<std::string>{"S01", "S03"}));
  ASSERT_EQ(warnings.size(), 1u);
  EXPECT_NE(warnings[0].find("S02"), std::string::npos);
  ms[1].values = Eigen::MatrixXd::Zero(5, 3);
  EXPECT_THROW(scenario_correlation(ms), DimensionError);
}

TEST(Extremal, FormatsPairsLaterIdFirst) {
  CorrelationMatrix c{{"S04", "S05", "S06"}, Eigen::MatrixXd::Identity(3, 3)};
  c.rho(0, 1) = c.rho(1, 0) = 0.5;
  c.rho(0, 2) = c.rho(2, 0) = 1.0;
  c.rho(1, 2) = c.rho(2, 1) = -0.25;
  const auto p = extremal_pairs(c);
  EXPECT_EQ(format_extremal(p),
            "Most similar scenarios: ('S06', 'S04') with correlation 1.0000\n"
            "Least similar scenarios: ('S06', 'S05') with correlation -0.2500\n");
}

TEST(IntraCluster, MatchesDoubleLoopWithDiagonal) {
  std::mt19937_64 rng(12);
  std::vector<NamedMatrix> ms;
  for (int s = 0; s < 6; ++s) ms.push_back({"S" + std::to_string(s), fixture::uniform_matrix(rng, 5, 2)});
  const auto c = scenario_correlation(ms);
  const std::vector<int> labels = {1, 2, 1, 1, 2, 3};
  for (int k = 1; k <= 3; ++k) {
    double sum = 0;
    int n = 0;
    for (int i = 0; i < 6; ++i) {
      if (labels[i] != k) continue;
      ++n;
      for (int j = 0; j < 6; ++j) {
        if (labels[j] == k) sum += c.rho(i, j);
      }
    }
    EXPECT_NEAR(intra_cluster_mean(c, labels, k), sum / (n * n), 1e-15);
  }
  EXPECT_EQ(intra_cluster_mean(c, labels, 3), 1.0);
  EXPECT_THROW(intra_cluster_mean(c, labels, 4), InvalidArgument);
}

TEST(Dissimilarity, ClampedOneMinusRho) {
  CorrelationMatrix c{{"a", "b", "c"}, Eigen::MatrixXd::Identity(3, 3)};
  c.rho(0, 1) = c.rho(1, 0) = 0.25;
  c.rho(0, 2) = c.rho(2, 0) = -1.0;
  c.rho(1, 2) = c.rho(2, 1) = 1.0;
  const auto d = to_dissimilarity(c);
  EXPECT_EQ(d, Eigen::Vector3d(0.75, 2.0, 0.0));
}

}  // namespace
}  // namespace forge
