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

#include "forge/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "forge/checksum.hpp"
#include "forge/csv.hpp"
#include "forge/error.hpp"
#include "json.hpp"

namespace forge {
namespace {

using json = nlohmann::json;

int index_of(const std::vector<std::string>& ids, std::string_view id) {
  const auto it = std::find(ids.begin(), ids.end(), id);
  return it == ids.end() ? -1 : static_cast<int>(it - ids.begin());
}

void require_unique(const std::vector<std::string>& ids, const char* what) {
  std::set<std::string_view> seen;
  for (const auto& id : ids) {
    if (id.empty()) throw InvalidArgument(std::string("empty identifier in ") + what);
    if (!seen.insert(id).second) {
      throw InvalidArgument(std::string("duplicate identifier '") + id + "' in " + what);
    }
  }
}

struct Indices {
  int t = -1, k = -1, r = -1;
};

std::string describe(const SetsSpec& s, Layout layout, Eigen::Index flat) {
  const auto nr = static_cast<Eigen::Index>(s.regions.size());
  auto tech_name = [&](Layout l, Eigen::Index k) {
    return l == Layout::kYearAgriRegion ? s.agri_techs[k] : s.fm_techs[k];
  };
  switch (layout) {
    case Layout::kYearFmRegion:
    case Layout::kYearAgriRegion: {
      const auto nk = static_cast<Eigen::Index>(
          layout == Layout::kYearAgriRegion ? s.agri_techs.size() : s.fm_techs.size());
      const auto r = flat % nr, k = (flat / nr) % nk, t = flat / (nr * nk);
      return "(" + std::to_string(s.years[t]) + "," + tech_name(layout, k) + "," +
             s.regions[r] + ")";
    }
    case Layout::kYearRegion:
      return "(" + std::to_string(s.years[flat / nr]) + "," + s.regions[flat % nr] + ")";
    case Layout::kFmRegion:
      return "(" + s.fm_techs[flat / nr] + "," + s.regions[flat % nr] + ")";
    case Layout::kRegion:
      return "(" + s.regions[flat] + ")";
    case Layout::kYear:
      return "(" + std::to_string(s.years[flat]) + ")";
  }
  return "?";
}

}  // namespace

SetsSpec SetsSpec::full() {
  SetsSpec s;
  for (int y = 2020; y <= 2050; ++y) s.years.push_back(y);
  s.regions = {"DE1", "DE2", "DE3", "DE4", "DE5", "DE6", "DE7", "DE8",
               "DE9", "DEA", "DEB", "DEC", "DED", "DEE", "DEF", "DEG"};
  s.fm_techs = {"FM01_SetAside", "FM02_TSA", "FM03_Spruce",  "FM04_DouglasFir",
                "FM05_Beech",    "FM06_Oak", "PC_Rewetting"};
  s.agri_techs = {"Agri01_AGC",       "Agri02_CoverCrops",   "Agri03_Biochar",
                  "Agri04_SoilCarbon", "Agri05_Agroforestry", "Agri06_Hedgerows"};
  return s;
}

SetsSpec SetsSpec::desk() {
  SetsSpec s;
  for (int y = 2025; y <= 2030; ++y) s.years.push_back(y);
  s.regions = {"DE1", "DE2", "DE3", "DE9"};
  s.fm_techs = {"FM02_TSA", "FM04_DouglasFir", "PC_Rewetting"};
  s.agri_techs = {"Agri01_AGC", "Agri05_Agroforestry"};
  return s;
}

int SetsSpec::year_index(int year) const {
  if (years.empty() || year < years.front() || year > years.back()) return -1;
  return year - years.front();
}
int SetsSpec::region_index(std::string_view id) const { return index_of(regions, id); }
int SetsSpec::fm_index(std::string_view id) const { return index_of(fm_techs, id); }
int SetsSpec::agri_index(std::string_view id) const { return index_of(agri_techs, id); }

void SetsSpec::validate() const {
  if (years.empty()) throw InvalidArgument("empty year set");
  for (std::size_t i = 1; i < years.size(); ++i) {
    if (years[i] != years[i - 1] + 1) {
      throw InvalidArgument("years must be strictly increasing and contiguous");
    }
  }
  if (regions.empty()) throw InvalidArgument("empty region set");
  require_unique(regions, "regions");
  require_unique(fm_techs, "fm_techs");
  require_unique(agri_techs, "agri_techs");
}

Eigen::Index expected_size(Layout layout, const SetsSpec& s) {
  const auto nt = static_cast<Eigen::Index>(s.years.size());
  const auto nr = static_cast<Eigen::Index>(s.regions.size());
  const auto nf = static_cast<Eigen::Index>(s.fm_techs.size());
  const auto na = static_cast<Eigen::Index>(s.agri_techs.size());
  switch (layout) {
    case Layout::kYearFmRegion: return nt * nf * nr;
    case Layout::kYearAgriRegion: return nt * na * nr;
    case Layout::kYearRegion: return nt * nr;
    case Layout::kFmRegion: return nf * nr;
    case Layout::kRegion: return nr;
    case Layout::kYear: return nt;
  }
  return 0;
}

const std::vector<std::string>& parameter_names() {
  static const std::vector<std::string> names = {
      std::string(param::kCo2Price),        std::string(param::kGhgTarget),
      std::string(param::kFmGrowth),        std::string(param::kBeechArea0),
      std::string(param::kGrassArea0),      std::string(param::kAgriArea0),
      std::string(param::kCostMargFm),      std::string(param::kCostInvFm),
      std::string(param::kCostInvLevelFm),  std::string(param::kGhgFm),
      std::string(param::kCap0Fm),          std::string(param::kCostMargAgri),
      std::string(param::kCostInvAgri),     std::string(param::kCostInvLevelAgri),
      std::string(param::kGhgAgri),         std::string(param::kAgriGrowth),
      std::string(param::kPeatExtract)};
  return names;
}

Layout layout_of(std::string_view name) {
  using namespace param;
  if (name == kCo2Price || name == kGhgTarget) return Layout::kYear;
  if (name == kBeechArea0 || name == kGrassArea0 || name == kAgriArea0) return Layout::kRegion;
  if (name == kCap0Fm) return Layout::kFmRegion;
  if (name == kPeatExtract) return Layout::kYearRegion;
  if (name == kFmGrowth || name == kCostMargFm || name == kCostInvFm ||
      name == kCostInvLevelFm || name == kGhgFm) {
    return Layout::kYearFmRegion;
  }
  if (name == kAgriGrowth || name == kCostMargAgri || name == kCostInvAgri ||
      name == kCostInvLevelAgri || name == kGhgAgri) {
    return Layout::kYearAgriRegion;
  }
  throw InvalidArgument("unknown parameter '" + std::string(name) + "'");
}

FmCategory fm_category(std::string_view tech) {
  if (tech == "FM01_SetAside" || tech == "FM02_TSA") return FmCategory::kSetAside;
  if (tech == "FM03_Spruce" || tech == "FM04_DouglasFir" || tech == "FM05_Beech" ||
      tech == "FM06_Oak") {
    return FmCategory::kPlantation;
  }
  if (tech == kRewettingTech) return FmCategory::kRewetting;
  return FmCategory::kOther;
}

const ParamTensor& ScenarioData::tensor(std::string_view name) const {
  const auto it = params.find(name);
  if (it == params.end()) {
    throw InvalidArgument("scenario has no parameter '" + std::string(name) + "'");
  }
  return it->second;
}

ParamTensor& ScenarioData::tensor(std::string_view name) {
  const auto it = params.find(name);
  if (it == params.end()) {
    throw InvalidArgument("scenario has no parameter '" + std::string(name) + "'");
  }
  return it->second;
}

double ScenarioData::fm(std::string_view name, int t, int f, int r) const {
  return tensor(name).values[offset3(sets, t, f, r, static_cast<int>(sets.fm_techs.size()))];
}
double ScenarioData::agri(std::string_view name, int t, int a, int r) const {
  return tensor(name).values[offset3(sets, t, a, r, static_cast<int>(sets.agri_techs.size()))];
}
double ScenarioData::year_region(std::string_view name, int t, int r) const {
  return tensor(name).values[static_cast<Eigen::Index>(t) * sets.regions.size() + r];
}
double ScenarioData::region(std::string_view name, int r) const {
  return tensor(name).values[r];
}
double ScenarioData::year(std::string_view name, int t) const {
  return tensor(name).values[t];
}
double ScenarioData::fm_region(std::string_view name, int f, int r) const {
  return tensor(name).values[static_cast<Eigen::Index>(f) * sets.regions.size() + r];
}

void ScenarioData::validate() const {
  sets.validate();
  for (const auto& name : parameter_names()) {
    const auto it = params.find(name);
    if (it == params.end()) throw DimensionError(name, "tensor missing");
    const auto& tensor = it->second;
    if (tensor.layout != layout_of(name)) throw DimensionError(name, "wrong index layout");
    const auto want = expected_size(tensor.layout, sets);
    if (tensor.values.size() != want) {
      throw DimensionError(name, "has " + std::to_string(tensor.values.size()) +
                                     " cells, index set needs " + std::to_string(want));
    }
    for (Eigen::Index i = 0; i < tensor.values.size(); ++i) {
      const double v = tensor.values[i];
      if (!std::isfinite(v)) {
        throw DimensionError(name, "non-finite cell at " + describe(sets, tensor.layout, i));
      }
      if (v < 0.0) {
        throw InvalidArgument(name + " negative at " + describe(sets, tensor.layout, i));
      }
    }
  }
  if (!(alpha > 0.0 && alpha <= 1.0)) throw InvalidArgument("alpha must lie in (0,1]");
  if (!(gamma >= 0.0)) throw InvalidArgument("gamma must be non-negative");
  if (!(peat_target_2030 >= 0.0)) throw InvalidArgument("peat target must be non-negative");
}

std::string checksum(const ParamTensor& tensor) {
  return sha256_hex(std::span<const double>(tensor.values.data(), tensor.values.size()));
}

std::string checksum(const ScenarioData& data) {
  std::string bytes;
  auto append_double = [&bytes](double v) {
    bytes.append(reinterpret_cast<const char*>(&v), sizeof v);
  };
  for (int y : data.sets.years) bytes += std::to_string(y) + ",";
  for (const auto* ids : {&data.sets.regions, &data.sets.fm_techs, &data.sets.agri_techs}) {
    for (const auto& id : *ids) bytes += id + ",";
    bytes += ';';
  }
  bytes += data.scenario_id + '\0' + std::to_string(data.seed) + '\0';
  append_double(data.alpha);
  append_double(data.gamma);
  append_double(data.peat_target_2030);
  for (const auto& [name, tensor] : data.params) {
    bytes += name + '\0' + std::to_string(static_cast<int>(tensor.layout)) + '\0';
    for (Eigen::Index i = 0; i < tensor.values.size(); ++i) append_double(tensor.values[i]);
  }
  return sha256_hex(bytes);
}

void write_tensor_csv(const std::filesystem::path& path, const SetsSpec& s, const ParamTensor& tensor) {
  const auto nr = s.regions.size();
  csv::Table table;
  table.header = {"year", "region", "technology", "value"};
  const auto n = tensor.values.size();
  table.rows.reserve(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    std::string year, region, tech;
    switch (tensor.layout) {
      case Layout::kYearFmRegion:
      case Layout::kYearAgriRegion: {
        const auto& techs = tensor.layout == Layout::kYearFmRegion ? s.fm_techs : s.agri_techs;
        const auto nk = techs.size();
        year = std::to_string(s.years[i / (nr * nk)]);
        tech = techs[(i / nr) % nk];
        region = s.regions[i % nr];
        break;
      }
      case Layout::kYearRegion:
        year = std::to_string(s.years[i / nr]);
        region = s.regions[i % nr];
        break;
      case Layout::kFmRegion:
        tech = s.fm_techs[i / nr];
        region = s.regions[i % nr];
        break;
      case Layout::kRegion:
        region = s.regions[i];
        break;
      case Layout::kYear:
        year = std::to_string(s.years[i]);
        break;
    }
    table.rows.push_back({year, region, tech, csv::format(tensor.values[i])});
  }
  csv::write(path, table);
}

ParamTensor read_tensor_csv(const std::filesystem::path& path, const SetsSpec& s, Layout layout,
                            const std::string& name) {
  if (!std::filesystem::exists(path)) throw DimensionError(name, "file missing");
  const auto nr = static_cast<Eigen::Index>(s.regions.size());
  const auto table = csv::read(path);
  if (table.header != std::vector<std::string>{"year", "region", "technology", "value"}) {
    throw IoError(path.string() + ": header must be year,region,technology,value");
  }
  ParamTensor tensor;
  tensor.layout = layout;
  const auto n = expected_size(tensor.layout, s);
  tensor.values = Eigen::VectorXd::Constant(n, std::nan(""));
  std::vector<char> seen(static_cast<std::size_t>(n), 0);
  for (const auto& row : table.rows) {
    const int t = row[0].empty() ? -1 : s.year_index(csv::parse_int(row[0]));
    const int r = row[1].empty() ? -1 : s.region_index(row[1]);
    int k = -1;
    Eigen::Index flat = -1;
    auto bad = [&](const char* what) {
      return DimensionError(name, std::string(what) + " in row " + row[0] + "," + row[1] + "," + row[2]);
    };
    switch (tensor.layout) {
      case Layout::kYearFmRegion:
        k = s.fm_index(row[2]);
        if (t < 0 || r < 0 || k < 0) throw bad("unknown index");
        flat = offset3(s, t, k, r, static_cast<int>(s.fm_techs.size()));
        break;
      case Layout::kYearAgriRegion:
        k = s.agri_index(row[2]);
        if (t < 0 || r < 0 || k < 0) throw bad("unknown index");
        flat = offset3(s, t, k, r, static_cast<int>(s.agri_techs.size()));
        break;
      case Layout::kYearRegion:
        if (t < 0 || r < 0) throw bad("unknown index");
        flat = t * nr + r;
        break;
      case Layout::kFmRegion:
        k = s.fm_index(row[2]);
        if (k < 0 || r < 0) throw bad("unknown index");
        flat = k * nr + r;
        break;
      case Layout::kRegion:
        if (r < 0) throw bad("unknown index");
        flat = r;
        break;
      case Layout::kYear:
        if (t < 0) throw bad("unknown index");
        flat = t;
        break;
    }
    if (seen[flat]) throw bad("duplicate cell");
    seen[flat] = 1;
    tensor.values[flat] = csv::parse_double(row[3]);
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!seen[i]) throw DimensionError(name, "missing cell " + describe(s, tensor.layout, i));
  }
  return tensor;
}

void save_scenario(const ScenarioData& data, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const auto& s = data.sets;
  for (const auto& [name, tensor] : data.params) write_tensor_csv(dir / (name + ".csv"), s, tensor);
  json manifest = {
      {"schema", 1},
      {"scenario_id", data.scenario_id},
      {"seed", data.seed},
      {"alpha", data.alpha},
      {"gamma", data.gamma},
      {"peat_target_2030", data.peat_target_2030},
      {"sets",
       {{"years", s.years},
        {"regions", s.regions},
        {"fm_techs", s.fm_techs},
        {"agri_techs", s.agri_techs}}},
  };
  std::ofstream out(dir / "scenario.json", std::ios::trunc);
  if (!out) throw IoError("cannot write " + (dir / "scenario.json").string());
  out << manifest.dump(2) << '\n';
}

ScenarioData load_scenario(const std::filesystem::path& dir) {
  std::ifstream in(dir / "scenario.json");
  if (!in) throw IoError("cannot open " + (dir / "scenario.json").string());
  const json manifest = json::parse(in);
  if (manifest.value("schema", 0) != 1) throw IoError("unsupported scenario schema");
  ScenarioData data;
  data.scenario_id = manifest.at("scenario_id").get<std::string>();
  data.seed = manifest.at("seed").get<std::uint64_t>();
  data.alpha = manifest.at("alpha").get<double>();
  data.gamma = manifest.at("gamma").get<double>();
  data.peat_target_2030 = manifest.at("peat_target_2030").get<double>();
  const auto& sets = manifest.at("sets");
  data.sets.years = sets.at("years").get<std::vector<int>>();
  data.sets.regions = sets.at("regions").get<std::vector<std::string>>();
  data.sets.fm_techs = sets.at("fm_techs").get<std::vector<std::string>>();
  data.sets.agri_techs = sets.at("agri_techs").get<std::vector<std::string>>();
  data.sets.validate();
  const auto& s = data.sets;
  for (const auto& name : parameter_names()) {
    data.params.emplace(name, read_tensor_csv(dir / (name + ".csv"), s, layout_of(name), name));
  }
  data.validate();
  return data;
}

}  // namespace forge
