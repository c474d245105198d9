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

#include <cmath>
#include <filesystem>
#include <numeric>
#include <random>

#include <unistd.h>

#include "forge/bank.hpp"
#include "forge/error.hpp"
#include "forge/features.hpp"

namespace forge {
namespace {

namespace fs = std::filesystem;

// Closed-form OLS slope of a geometric series a * q^k, k = 0..n-1, over unit
// spaced years: sum_k (k - kbar) a q^k / sum_k (k - kbar)^2.
double geometric_ols_slope(double a, double q, int n) {
  const double kbar = (n - 1) / 2.0;
  const double sxx = n * (static_cast<double>(n) * n - 1) / 12.0;
  // sum k q^k and sum q^k in closed form.
  const double s0 = (std::pow(q, n) - 1) / (q - 1);
  const double s1 = (q - n * std::pow(q, n) + (n - 1) * std::pow(q, n + 1)) / ((1 - q) * (1 - q));
  return a * (s1 - kbar * s0) / sxx;
}

std::vector<int> span_years(int a, int b) {
  std::vector<int> y(b - a + 1);
  std::iota(y.begin(), y.end(), a);
  return y;
}

Eigen::Index col(const FeatureMatrix& m, const std::string& name) {
  for (std::size_t j = 2; j < m.columns.size(); ++j) {
    if (m.columns[j] == name) return static_cast<Eigen::Index>(j - 2);
  }
  ADD_FAILURE() << "missing column " << name;
  return 0;
}

Eigen::Index row(const FeatureMatrix& m, const std::string& region, const std::string& tech) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    if (m.regions[i] == region && m.techs[i] == tech) return i;
  }
  ADD_FAILURE() << "missing row " << region << "/" << tech;
  return 0;
}

TEST(Trend, ConstantSeries) {
  const auto y = span_years(2020, 2050);
  const std::vector<double> v(y.size(), 5.0);
  EXPECT_EQ(trend(y, v), (TrendTriple{5.0, 5.0, 0.0}));
}

TEST(Trend, AffineSeriesRecoversSlope) {
  const auto y = span_years(2020, 2050);
  std::vector<double> v;
  for (int t : y) v.push_back(2.0 * t);
  const auto tr = trend(y, v);
  EXPECT_NEAR(tr.slope, 2.0, 1e-10);
  EXPECT_EQ(tr.initial, 4040.0);
  EXPECT_EQ(tr.final, 4100.0);
}

TEST(Trend, GeometricPriceSlopeMatchesClosedForm) {
  const auto y = span_years(2020, 2050);
  std::vector<double> v;
  for (int t : y) v.push_back(co2_price_path(t));
  const double q = std::pow(kCo2Price2050 / kCo2Price2020, 1.0 / 30.0);
  const double expected = geometric_ols_slope(kCo2Price2020, q, 31);
  EXPECT_NEAR(trend(y, v).slope, expected, 1e-9);
  EXPECT_NEAR(expected, 7.004642849, 1e-9);
}

TEST(Trend, ShiftInvariant) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n(0, 1);
  const auto y = span_years(2020, 2030);
  std::vector<double> v(y.size());
  for (auto& x : v) x = n(rng);
  auto shifted = y;
  for (auto& t : shifted) t -= 2020;
  const auto a = trend(y, v);
  const auto b = trend(shifted, v);
  EXPECT_NEAR(a.slope, b.slope, 1e-12);
  EXPECT_EQ(a.initial, b.initial);
  EXPECT_EQ(a.final, b.final);
}

TEST(Trend, RejectsDegenerateInput) {
  const std::vector<int> one = {2020};
  const std::vector<double> v1 = {1.0};
  EXPECT_THROW(trend(one, v1), InvalidArgument);
  const std::vector<int> rep = {2020, 2020};
  const std::vector<double> v2 = {1.0, 2.0};
  EXPECT_THROW(trend(rep, v2), InvalidArgument);
}

TEST(Broadcast, IdenticalCopies) {
  const TrendTriple t{20.0, 249.197564, 6.7};
  const auto many = broadcast_global(t, 16);
  ASSERT_EQ(many.size(), 16u);
  for (const auto& c : many) EXPECT_EQ(c, t);
  EXPECT_EQ(broadcast_global(t, 1).size(), 1u);
}

class FullFeatures : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    base_ = new ScenarioData(synthesize_baseline(SetsSpec::full(), 7));
  }
  static void TearDownTestSuite() { delete base_; }
  static ScenarioData* base_;
};
ScenarioData* FullFeatures::base_ = nullptr;

TEST_F(FullFeatures, ReferenceShapes) {
  const auto fm = assemble(*base_, BankKind::kFm);
  EXPECT_EQ(fm.rows(), 112);
  EXPECT_EQ(fm.cols(), 25);
  const auto agri = assemble(*base_, BankKind::kAgri);
  EXPECT_EQ(agri.rows(), 96);
  EXPECT_EQ(agri.cols(), 21);
  const std::vector<std::string> fm_head = {"Region", "Technology", "CostMarg_2020", "CostMarg_2050", "CostMarg_Slope"};
  EXPECT_TRUE(std::equal(fm_head.begin(), fm_head.end(), fm.columns.begin()));
  EXPECT_EQ(fm.columns.back(), "InitialGrassArea");
  EXPECT_EQ(agri.columns.back(), "Agriarea0");
  EXPECT_EQ(agri.columns[2], "CostMargAgri_2020");
  // Region-major, then technology.
  EXPECT_EQ(fm.regions[0], "DE1");
  EXPECT_EQ(fm.techs[1], "FM02_TSA");
  EXPECT_EQ(fm.regions[7], "DE2");
}

TEST_F(FullFeatures, AnchoredCellsReproduceReferenceVector) {
  const auto fm = assemble(*base_, BankKind::kFm);
  const auto i = row(fm, "DE2", "FM04_DouglasFir");
  EXPECT_EQ(fm.values(i, col(fm, "GHG_2020")), 11.52);
  EXPECT_EQ(fm.values(i, col(fm, "GHG_2050")), 13.08);
  EXPECT_EQ(fm.values(i, col(fm, "CO2_2020")), 20.0);
  EXPECT_EQ(fm.values(i, col(fm, "CO2_2050")), 249.197564);
  EXPECT_EQ(fm.values(i, col(fm, "ForestGrowth_Slope")), 0.0);
  EXPECT_EQ(fm.values(i, col(fm, "ForestGrowth_2020")), 10.461851);
  EXPECT_EQ(fm.values(i, col(fm, "GHGTarget_2020")), 1.92);
  EXPECT_EQ(fm.values(i, col(fm, "GHGTarget_2050")), 51.0);
  EXPECT_EQ(fm.values(i, col(fm, "InitialBeechArea")), 423046.85);
  EXPECT_EQ(fm.values(i, col(fm, "InitialGrassArea")), 1199109.02);
  // Reference slopes of the linear series (rounded to 6 places).
  EXPECT_NEAR(fm.values(i, col(fm, "CostMarg_Slope")), 0.021397, 5e-7);
  EXPECT_NEAR(fm.values(i, col(fm, "CostInvLevel_Slope")), 100.981566, 5e-7);
  EXPECT_NEAR(fm.values(i, col(fm, "GHG_Slope")), 0.052, 5e-7);

  const auto agri = assemble(*base_, BankKind::kAgri);
  const auto k = row(agri, "DE3", "Agri01_AGC");
  EXPECT_EQ(agri.values(k, col(agri, "CostInvAgri_2020")), 2476.190476);
  EXPECT_EQ(agri.values(k, col(agri, "GHGAgri_Slope")), 0.0);
  EXPECT_NEAR(agri.values(k, col(agri, "Peat_Extraction_Slope")), 0.009, 5e-7);
  EXPECT_NEAR(agri.values(k, col(agri, "AgriGrowth_Slope")), 700.885242, 5e-7);
  EXPECT_EQ(agri.values(k, col(agri, "Agriarea0")), 4836.495);
}

TEST_F(FullFeatures, GlobalSeriesIdenticalAcrossRows) {
  const auto fm = assemble(*base_, BankKind::kFm);
  for (const auto* name : {"CO2_2020", "CO2_2050", "CO2_Slope", "GHGTarget_Slope"}) {
    const auto c = fm.values.col(col(fm, name));
    EXPECT_TRUE((c.array() == c[0]).all()) << name;
  }
}

TEST_F(FullFeatures, TrendsCompressYearlySeries) {
  const auto fm = assemble(*base_, BankKind::kFm);
  // Seven time series per row: 7 * 31 raw values become 7 * 3 features.
  const double reduction = 1.0 - (7.0 * 3) / (7.0 * 31);
  EXPECT_GT(reduction, 0.9);
  EXPECT_EQ(fm.values.cols(), 7 * 3 + 2);
}

TEST_F(FullFeatures, IdentityRecipeChangesNothing) {
  const auto same = materialize(*base_, {"S00", BankKind::kFm, {{"CO2price", 1.0}}});
  EXPECT_TRUE(assemble(same, BankKind::kFm) == assemble(*base_, BankKind::kFm));
}

TEST(Normalize, HandCases) {
  FeatureMatrix m;
  m.columns = {"Region", "Technology", "a", "b"};
  m.regions = {"R1", "R2", "R3"};
  m.techs = {"T1", "T1", "T1"};
  m.values.resize(3, 2);
  m.values << 2, 7, 4, 7, 6, 7;
  const auto n = minmax_normalize(m);
  EXPECT_EQ(n.values(0, 0), 0.0);
  EXPECT_EQ(n.values(1, 0), 0.5);
  EXPECT_EQ(n.values(2, 0), 1.0);
  EXPECT_EQ(n.values.col(1).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(n.regions, m.regions);
  ASSERT_EQ(n.scaling.size(), 2u);
  EXPECT_EQ(n.scaling[0], std::make_pair(2.0, 6.0));
}

TEST(Normalize, RoundTripAndIdempotence) {
  const auto base = synthesize_baseline(SetsSpec::full(), 9);
  const auto m = assemble(base, BankKind::kAgri);
  const auto n = minmax_normalize(m);
  EXPECT_GE(n.values.minCoeff(), 0.0);
  EXPECT_LE(n.values.maxCoeff(), 1.0);
  const auto back = minmax_inverse(n);
  for (Eigen::Index i = 0; i < m.values.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.values.cols(); ++j) {
      EXPECT_NEAR(back.values(i, j), m.values(i, j), 1e-12 * std::max(1.0, std::abs(m.values(i, j))));
    }
  }
  auto raw = n;
  raw.scaling.clear();
  const auto twice = minmax_normalize(raw);
  for (Eigen::Index j = 0; j < n.values.cols(); ++j) {
    if (n.values.col(j).maxCoeff() == n.values.col(j).minCoeff()) continue;
    EXPECT_TRUE(twice.values.col(j) == n.values.col(j)) << n.columns[j + 2];
  }
  FeatureMatrix plain = m;
  EXPECT_THROW(minmax_inverse(plain), InvalidArgument);
}

TEST(Encode, ToyOneHotLayout) {
  FeatureMatrix m;
  m.columns = {"Region", "Technology", "x"};
  m.regions = {"R1", "R1", "R2", "R2"};
  m.techs = {"T1", "T2", "T1", "T2"};
  m.values.resize(4, 1);
  m.values << 0.0, 0.25, 0.5, 1.0;
  m = minmax_normalize(m);
  const std::vector<int> years = {2020, 2021, 2022};
  const std::vector<std::string> regions = {"R1", "R2"}, techs = {"T1", "T2"};
  const auto d = encode_for_learning(m, years, regions, techs);
  EXPECT_EQ(d.columns, (std::vector<std::string>{"x", "Region_R1", "Region_R2", "Technology_T1", "Technology_T2", "year"}));
  ASSERT_EQ(d.X.rows(), 12);
  for (Eigen::Index i = 0; i < 4; ++i) {
    for (Eigen::Index t = 0; t < 3; ++t) {
      const auto r = i * 3 + t;
      EXPECT_EQ(d.X(r, 0), m.values(i, 0));
      EXPECT_EQ(d.X.row(r).segment(1, 2).sum(), 1.0);
      EXPECT_EQ(d.X.row(r).segment(3, 2).sum(), 1.0);
      EXPECT_EQ(d.X(r, 1 + (m.regions[i] == "R2")), 1.0);
      EXPECT_EQ(d.X(r, 3 + (m.techs[i] == "T2")), 1.0);
      EXPECT_EQ(d.X(r, 5), t / 2.0);
      EXPECT_EQ(d.years[r], years[t]);
      EXPECT_EQ(d.regions[r], m.regions[i]);
    }
  }
  const std::vector<std::string> partial = {"R1"};
  EXPECT_THROW(encode_for_learning(m, years, partial, techs), DimensionError);
}

TEST(Encode, FullSizeRowCount) {
  const auto base = synthesize_baseline(SetsSpec::full(), 7);
  const auto n = minmax_normalize(assemble(base, BankKind::kFm));
  const auto d = encode_for_learning(n, base.sets.years, base.sets.regions, base.sets.fm_techs);
  EXPECT_EQ(d.X.rows(), 3472);
  EXPECT_EQ(d.X.cols(), 23 + 16 + 7 + 1);
}

TEST(FeatureIo, CsvRoundTripKeepsScaling) {
  const auto base = synthesize_baseline(SetsSpec::desk(), 7);
  const auto n = minmax_normalize(assemble(base, BankKind::kFm));
  const auto dir = fs::temp_directory_path() / ("forge_test_features_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  write_features(n, dir / "S01.csv");
  EXPECT_TRUE(fs::exists(dir / "S01.scaling.json"));
  EXPECT_TRUE(read_features(dir / "S01.csv") == n);
  fs::remove_all(dir);
}

TEST(FeatureIo, VstackRequiresMatchingColumns) {
  const auto base = synthesize_baseline(SetsSpec::desk(), 7);
  const std::vector<FeatureMatrix> parts = {assemble(base, BankKind::kFm), assemble(base, BankKind::kAgri)};
  EXPECT_THROW(vstack(parts), DimensionError);
  const std::vector<FeatureMatrix> same = {parts[0], parts[0]};
  EXPECT_EQ(vstack(same).rows(), 2 * parts[0].rows());
}

}  // namespace
}  // namespace forge
