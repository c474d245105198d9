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

#ifndef FORGE_SCENARIO_HPP_
#define FORGE_SCENARIO_HPP_

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace forge {

// Index sets of the land-use model.
struct SetsSpec {
  std::vector<int> years;
  std::vector<std::string> regions;
  std::vector<std::string> fm_techs;
  std::vector<std::string> agri_techs;

  // 2020..2050, DE1..DEG, 7 forest-management and 6 agricultural options.
  static SetsSpec full();
  // 2025..2030, 4 regions, 3 FM options (incl. rewetting), 2 Agri options.
  static SetsSpec desk();

  int first_year() const { return years.front(); }
  int last_year() const { return years.back(); }
  // Position of `year` in `years`, or -1.
  int year_index(int year) const;
  int region_index(std::string_view id) const;
  int fm_index(std::string_view id) const;
  int agri_index(std::string_view id) const;

  // Throws InvalidArgument on non-contiguous years or duplicate ids.
  void validate() const;

  bool operator==(const SetsSpec&) const = default;
};

// Canonical parameter tensor names. These double as recipe keys and CSV
// file stems.
namespace param {
inline constexpr std::string_view kCo2Price = "CO2price";
inline constexpr std::string_view kGhgTarget = "ghgTargetLULUCF";
inline constexpr std::string_view kFmGrowth = "FMsgrowth";
inline constexpr std::string_view kBeechArea0 = "BeechArea0";
inline constexpr std::string_view kGrassArea0 = "GrassArea0";
inline constexpr std::string_view kAgriArea0 = "Agriarea0";
inline constexpr std::string_view kCostMargFm = "costMargFMs";
inline constexpr std::string_view kCostInvFm = "costInvFMs";
inline constexpr std::string_view kCostInvLevelFm = "costInvLevelFMs";
inline constexpr std::string_view kGhgFm = "ghgFMs";
inline constexpr std::string_view kCap0Fm = "cap0FMs";
inline constexpr std::string_view kCostMargAgri = "costMargAgri";
inline constexpr std::string_view kCostInvAgri = "costInvAgri";
inline constexpr std::string_view kCostInvLevelAgri = "costInvLevelAgri";
inline constexpr std::string_view kGhgAgri = "ghgAgri";
inline constexpr std::string_view kAgriGrowth = "Agrigrowth";
inline constexpr std::string_view kPeatExtract = "PeatExtract";
}  // namespace param

// Index layout of a parameter tensor.
enum class Layout {
  kYearFmRegion,    // (t, f, r)
  kYearAgriRegion,  // (t, a, r)
  kYearRegion,      // (t, r)
  kFmRegion,        // (f, r)
  kRegion,          // (r)
  kYear,            // (t)
};

struct ParamTensor {
  Layout layout = Layout::kYear;
  Eigen::VectorXd values;

  // Exact cell equality.
  bool operator==(const ParamTensor& o) const {
    return layout == o.layout && values.size() == o.values.size() && (values.array() == o.values.array()).all();
  }
};

// Expected flat length of a tensor with `layout` over `sets`.
Eigen::Index expected_size(Layout layout, const SetsSpec& sets);
// Layout of each canonical parameter.
Layout layout_of(std::string_view name);
const std::vector<std::string>& parameter_names();

enum class FmCategory { kSetAside, kPlantation, kRewetting, kOther };
FmCategory fm_category(std::string_view tech);

inline constexpr std::string_view kRewettingTech = "PC_Rewetting";
inline constexpr std::string_view kAgcTech = "Agri01_AGC";
inline constexpr std::string_view kAgroforestryTech = "Agri05_Agroforestry";

// Complete parameter set of one scenario. Plain value type: copies are deep
// and nothing mutates after construction except through materialization.
struct ScenarioData {
  SetsSpec sets;
  std::string scenario_id = "BASE";
  std::uint64_t seed = 0;
  double alpha = 0.05;
  double gamma = 1.1;
  double peat_target_2030 = 5e6;
  std::map<std::string, ParamTensor, std::less<>> params;

  const ParamTensor& tensor(std::string_view name) const;
  ParamTensor& tensor(std::string_view name);

  // Element access by set positions.
  double fm(std::string_view name, int t, int f, int r) const;
  double agri(std::string_view name, int t, int a, int r) const;
  double year_region(std::string_view name, int t, int r) const;
  double region(std::string_view name, int r) const;
  double year(std::string_view name, int t) const;
  double fm_region(std::string_view name, int f, int r) const;

  // Throws DimensionError naming the tensor and offending index, or
  // InvalidArgument for range violations (negative areas, alpha outside (0,1]).
  void validate() const;

  bool operator==(const ScenarioData&) const = default;
};

// Flat offsets.
inline Eigen::Index offset3(const SetsSpec& s, int t, int k, int r, int ntech) {
  return (static_cast<Eigen::Index>(t) * ntech + k) * static_cast<Eigen::Index>(s.regions.size()) + r;
}

// SHA-256 over every tensor (name, layout, raw bytes) plus scalars.
std::string checksum(const ScenarioData& data);
std::string checksum(const ParamTensor& tensor);

// Directory round trip: one long-format CSV per tensor with header
// `year,region,technology,value` (unused index columns left empty) and a
// `scenario.json` manifest holding sets and scalars.
// One tensor in the long CSV format above. Reading is strict: unknown,
// duplicate or missing cells throw DimensionError naming `name`.
void write_tensor_csv(const std::filesystem::path& path, const SetsSpec& sets, const ParamTensor& tensor);
ParamTensor read_tensor_csv(const std::filesystem::path& path, const SetsSpec& sets, Layout layout,
                            const std::string& name);

void save_scenario(const ScenarioData& data, const std::filesystem::path& dir);
ScenarioData load_scenario(const std::filesystem::path& dir);

// Deterministic synthetic baseline calibrated to the reference feature
// vectors (DE2 / FM04_DouglasFir and DE3 / Agri01_AGC rows are reproduced
// exactly when those ids are present).
ScenarioData synthesize_baseline(const SetsSpec& sets, std::uint64_t seed);

// Calendar-year policy paths shared by the baseline and the tests.
inline constexpr double kCo2Price2020 = 20.0;
inline constexpr double kCo2Price2050 = 249.197564;
inline constexpr double kGhgTarget2020 = 1.92;
inline constexpr double kGhgTarget2050 = 51.0;
double co2_price_path(int year);
double ghg_target_path(int year);

}  // namespace forge

#endif  // FORGE_SCENARIO_HPP_
