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

#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <string>

#include <unistd.h>

#include "forge/csv.hpp"
#include "forge/error.hpp"
#include "forge/scenario.hpp"

namespace forge {
namespace {

namespace fs = std::filesystem;

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("forge_test_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

TEST(Scenario, DirectoryRoundTripIsExact) {
  const auto d = synthesize_baseline(SetsSpec::desk(), 42);
  const auto dir = scratch("roundtrip");
  save_scenario(d, dir);
  EXPECT_TRUE(fs::exists(dir / "scenario.json"));
  for (const auto& name : parameter_names()) EXPECT_TRUE(fs::exists(dir / (name + ".csv"))) << name;
  const auto back = load_scenario(dir);
  EXPECT_TRUE(back == d);
  EXPECT_EQ(checksum(back), checksum(d));
  fs::remove_all(dir);
}

TEST(Scenario, TensorCsvHasNormativeHeader) {
  const auto d = synthesize_baseline(SetsSpec::desk(), 1);
  const auto dir = scratch("header");
  write_tensor_csv(dir / "x.csv", d.sets, d.tensor(param::kGhgFm));
  const auto t = csv::read(dir / "x.csv");
  EXPECT_EQ(t.header, (std::vector<std::string>{"year", "region", "technology", "value"}));
  EXPECT_EQ(t.rows.size(), static_cast<std::size_t>(d.tensor(param::kGhgFm).values.size()));
  fs::remove_all(dir);
}

TEST(Scenario, StrictReaderRejectsMissingAndDuplicateCells) {
  const auto d = synthesize_baseline(SetsSpec::desk(), 1);
  const auto dir = scratch("strict");
  write_tensor_csv(dir / "x.csv", d.sets, d.tensor(param::kCo2Price));
  auto t = csv::read(dir / "x.csv");
  auto dropped = t;
  dropped.rows.pop_back();
  csv::write(dir / "missing.csv", dropped);
  EXPECT_THROW(read_tensor_csv(dir / "missing.csv", d.sets, Layout::kYear, "CO2price"), DimensionError);
  auto dup = t;
  dup.rows.push_back(t.rows.front());
  csv::write(dir / "dup.csv", dup);
  EXPECT_THROW(read_tensor_csv(dir / "dup.csv", d.sets, Layout::kYear, "CO2price"), DimensionError);
  auto unknown = t;
  unknown.rows.front()[0] = "1999";
  csv::write(dir / "unknown.csv", unknown);
  try {
    read_tensor_csv(dir / "unknown.csv", d.sets, Layout::kYear, "CO2price");
    FAIL();
  } catch (const DimensionError& e) {
    EXPECT_EQ(e.tensor(), "CO2price");
  }
  fs::remove_all(dir);
}

TEST(Scenario, ChecksumTracksEveryCell) {
  const auto d = synthesize_baseline(SetsSpec::desk(), 5);
  const auto base = checksum(d);
  for (const auto& name : parameter_names()) {
    auto e = d;
    e.tensor(name).values[0] += 1.0;
    EXPECT_NE(checksum(e), base) << name;
  }
  auto g = d;
  g.gamma = 1.2;
  EXPECT_NE(checksum(g), base);
}

TEST(Scenario, ValidateNamesOffendingTensor) {
  auto d = synthesize_baseline(SetsSpec::desk(), 5);
  d.validate();
  auto short_growth = d;
  short_growth.tensor(param::kAgriGrowth).values.conservativeResize(3);
  try {
    short_growth.validate();
    FAIL();
  } catch (const DimensionError& e) {
    EXPECT_EQ(e.tensor(), "Agrigrowth");
  }
  auto negative = d;
  negative.tensor(param::kBeechArea0).values[1] = -1.0;
  EXPECT_THROW(negative.validate(), InvalidArgument);
  auto bad_alpha = d;
  bad_alpha.alpha = 0.0;
  EXPECT_THROW(bad_alpha.validate(), InvalidArgument);
  auto nan = d;
  nan.tensor(param::kGhgFm).values[2] = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(nan.validate(), DimensionError);
}

TEST(Scenario, LayoutSizesFollowSets) {
  const auto s = SetsSpec::full();
  EXPECT_EQ(expected_size(Layout::kYearFmRegion, s), 31 * 7 * 16);
  EXPECT_EQ(expected_size(Layout::kYearAgriRegion, s), 31 * 6 * 16);
  EXPECT_EQ(expected_size(Layout::kYearRegion, s), 31 * 16);
  EXPECT_EQ(expected_size(Layout::kRegion, s), 16);
  EXPECT_EQ(expected_size(Layout::kYear, s), 31);
  EXPECT_THROW(layout_of("nonsense"), InvalidArgument);
}

TEST(Scenario, CategoryMapping) {
  EXPECT_EQ(fm_category("FM01_SetAside"), FmCategory::kSetAside);
  EXPECT_EQ(fm_category("FM02_TSA"), FmCategory::kSetAside);
  for (auto t : {"FM03_Spruce", "FM04_DouglasFir", "FM05_Beech", "FM06_Oak"}) {
    EXPECT_EQ(fm_category(t), FmCategory::kPlantation) << t;
  }
  EXPECT_EQ(fm_category("PC_Rewetting"), FmCategory::kRewetting);
}

}  // namespace
}  // namespace forge
