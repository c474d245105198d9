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

#include <cmath>
#include <random>
#include <string_view>

#include "forge/scenario.hpp"

namespace forge {
namespace {

constexpr int kPathStart = 2020;
constexpr int kPathEnd = 2050;

// Position of a calendar year on the 2020..2050 policy horizon, in [0,1].
double horizon_fraction(int year) {
  return static_cast<double>(year - kPathStart) / (kPathEnd - kPathStart);
}

// Endpoint-exact linear path: returns v0 at s=0 and v1 at s=1 bit-exactly.
// Equal endpoints give an exactly constant series.
double lerp(double v0, double v1, double s) { return v0 == v1 ? v0 : v0 * (1.0 - s) + v1 * s; }

std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

// Independent stream per (seed, key) so a cell's draw does not depend on
// which other regions or technologies are configured.
class Stream {
 public:
  Stream(std::uint64_t seed, std::string_view key) : rng_(seed ^ fnv1a(key)) {}

  // mt19937_64 output mapped to [lo, hi) with a fixed 53-bit construction;
  // std::uniform_real_distribution is implementation-defined.
  double uniform(double lo, double hi) {
    const double u = static_cast<double>(rng_() >> 11) * 0x1.0p-53;
    return lo + (hi - lo) * u;
  }

 private:
  std::mt19937_64 rng_;
};

struct Range {
  double lo, hi;
};

struct FmProfile {
  Range ghg, ghg_trend, inv_level, inv_level_trend, marg, marg_trend, inv_share, growth;
};

struct AgriProfile {
  Range ghg, inv_level, inv_trend, marg, inv_total, growth0, growth1;
};

FmProfile fm_profile(std::string_view tech) {
  if (tech == "FM01_SetAside")
    return {{3.5, 6}, {1.0, 1.15}, {40, 120}, {1.0, 1.3}, {5, 15}, {1.0, 1.3}, {0.2, 0.5}, {800, 2500}};
  if (tech == "FM02_TSA")
    return {{5, 8}, {1.0, 1.15}, {60, 180}, {1.0, 1.3}, {3, 10}, {1.0, 1.3}, {0.2, 0.5}, {600, 2200}};
  if (tech == "FM03_Spruce")
    return {{9, 12}, {1.05, 1.2}, {350, 700}, {1.1, 1.6}, {2, 6}, {1.1, 1.4}, {0.2, 0.5}, {300, 1500}};
  if (tech == "FM04_DouglasFir")
    return {{10, 13}, {1.05, 1.2}, {400, 800}, {1.1, 1.6}, {2, 4}, {1.1, 1.4}, {0.2, 0.5}, {300, 1500}};
  if (tech == "FM05_Beech")
    return {{7, 10}, {1.05, 1.2}, {450, 900}, {1.1, 1.6}, {2, 6}, {1.1, 1.4}, {0.2, 0.5}, {300, 1200}};
  if (tech == "FM06_Oak")
    return {{6, 9}, {1.05, 1.2}, {500, 1000}, {1.1, 1.6}, {2, 6}, {1.1, 1.4}, {0.2, 0.5}, {200, 1000}};
  if (tech == kRewettingTech)
    return {{15, 25}, {1.0, 1.1}, {250, 600}, {1.0, 1.2}, {40, 90}, {3, 6}, {0.2, 0.5}, {800, 2500}};
  return {{4, 10}, {1.0, 1.2}, {200, 800}, {1.0, 1.5}, {2, 10}, {1.0, 1.5}, {0.2, 0.5}, {300, 1500}};
}

AgriProfile agri_profile(std::string_view tech) {
  if (tech == kAgcTech)
    return {{1.2, 2.4}, {100, 220}, {0.01, 0.03}, {10, 25}, {1500, 3000}, {10, 60}, {8000, 30000}};
  if (tech == "Agri02_CoverCrops")
    return {{0.6, 1.2}, {40, 120}, {0.1, 0.4}, {5, 15}, {400, 1200}, {50, 300}, {5000, 20000}};
  if (tech == "Agri03_Biochar")
    return {{2, 4}, {200, 400}, {0.05, 0.2}, {10, 30}, {2000, 4000}, {10, 80}, {3000, 15000}};
  if (tech == "Agri04_SoilCarbon")
    return {{0.8, 1.6}, {60, 150}, {0.2, 0.5}, {5, 15}, {600, 1500}, {30, 200}, {5000, 20000}};
  if (tech == kAgroforestryTech)
    return {{3, 6}, {250, 500}, {0.05, 0.3}, {15, 40}, {2500, 5000}, {5, 40}, {2000, 10000}};
  if (tech == "Agri06_Hedgerows")
    return {{2, 4}, {150, 350}, {0.1, 0.4}, {10, 25}, {1500, 3500}, {10, 60}, {2000, 10000}};
  return {{1, 3}, {100, 300}, {0.05, 0.4}, {5, 25}, {1000, 3000}, {10, 100}, {3000, 15000}};
}

// Endpoint values of one (tech, region) series; the anchored cells carry the
// reference feature-vector values.
struct Endpoints {
  double v2020, v2050;
};

struct FmCell {
  Endpoints marg, inv, inv_level, ghg;
  double growth;
};

struct AgriCell {
  Endpoints marg, inv, inv_level, ghg, growth;
};

FmCell draw_fm(std::uint64_t seed, std::string_view tech, std::string_view region) {
  if (tech == "FM04_DouglasFir" && region == "DE2") {
    return {{2.272816, 2.914732},
            {1654.288462, 2121.512452},
            {5023.172313, 8052.6193},
            {11.52, 13.08},
            10.461851};
  }
  const auto p = fm_profile(tech);
  Stream s(seed, std::string("fm:") + std::string(tech) + ":" + std::string(region));
  FmCell c;
  const double ghg = s.uniform(p.ghg.lo, p.ghg.hi);
  c.ghg = {ghg, ghg * s.uniform(p.ghg_trend.lo, p.ghg_trend.hi)};
  const double level = s.uniform(p.inv_level.lo, p.inv_level.hi);
  const double level_trend = s.uniform(p.inv_level_trend.lo, p.inv_level_trend.hi);
  c.inv_level = {level, level * level_trend};
  const double marg = s.uniform(p.marg.lo, p.marg.hi);
  c.marg = {marg, marg * s.uniform(p.marg_trend.lo, p.marg_trend.hi)};
  const double share = s.uniform(p.inv_share.lo, p.inv_share.hi);
  c.inv = {level * share, level * level_trend * share};
  c.growth = s.uniform(p.growth.lo, p.growth.hi);
  return c;
}

AgriCell draw_agri(std::uint64_t seed, std::string_view tech, std::string_view region) {
  if (tech == kAgcTech && region == "DE3") {
    return {{17.25154, 0.24988},
            {2476.190476, 35.866426},
            {158.803346, 2.30019},
            {1.8, 1.8},
            {20.62545, 21047.182701}};
  }
  const auto p = agri_profile(tech);
  Stream s(seed, std::string("agri:") + std::string(tech) + ":" + std::string(region));
  AgriCell c;
  const double ghg = s.uniform(p.ghg.lo, p.ghg.hi);
  c.ghg = {ghg, ghg};
  const double trend = s.uniform(p.inv_trend.lo, p.inv_trend.hi);
  const double level = s.uniform(p.inv_level.lo, p.inv_level.hi);
  c.inv_level = {level, level * trend};
  const double marg = s.uniform(p.marg.lo, p.marg.hi);
  c.marg = {marg, marg * trend};
  const double inv = s.uniform(p.inv_total.lo, p.inv_total.hi);
  c.inv = {inv, inv * trend};
  c.growth = {s.uniform(p.growth0.lo, p.growth0.hi), s.uniform(p.growth1.lo, p.growth1.hi)};
  return c;
}

struct RegionCell {
  double beech, grass, agri;
  Endpoints peat;
};

RegionCell draw_region(std::uint64_t seed, std::string_view region) {
  Stream s(seed, std::string("region:") + std::string(region));
  RegionCell c;
  c.beech = s.uniform(150e3, 600e3);
  c.grass = s.uniform(200e3, 1.3e6);
  c.agri = s.uniform(3e3, 900e3);
  const double peat = s.uniform(0.01, 0.05);
  c.peat = {peat, peat * s.uniform(5, 12)};
  if (region == "DE2") {
    c.beech = 423046.85;
    c.grass = 1199109.02;
  }
  if (region == "DE3") {
    c.agri = 4836.495;
    c.peat = {0.03, 0.3};
  }
  return c;
}

}  // namespace

double co2_price_path(int year) {
  if (year == kPathStart) return kCo2Price2020;
  if (year == kPathEnd) return kCo2Price2050;
  return kCo2Price2020 * std::pow(kCo2Price2050 / kCo2Price2020, horizon_fraction(year));
}

double ghg_target_path(int year) {
  return lerp(kGhgTarget2020, kGhgTarget2050, horizon_fraction(year));
}

ScenarioData synthesize_baseline(const SetsSpec& sets, std::uint64_t seed) {
  sets.validate();
  ScenarioData data;
  data.sets = sets;
  data.scenario_id = "BASE";
  data.seed = seed;

  const int nt = static_cast<int>(sets.years.size());
  const int nr = static_cast<int>(sets.regions.size());
  const int nf = static_cast<int>(sets.fm_techs.size());
  const int na = static_cast<int>(sets.agri_techs.size());

  auto make = [&](std::string_view name) -> Eigen::VectorXd& {
    auto& t = data.params[std::string(name)];
    t.layout = layout_of(name);
    t.values = Eigen::VectorXd::Zero(expected_size(t.layout, sets));
    return t.values;
  };

  auto& co2 = make(param::kCo2Price);
  auto& target = make(param::kGhgTarget);
  for (int t = 0; t < nt; ++t) {
    co2[t] = co2_price_path(sets.years[t]);
    target[t] = ghg_target_path(sets.years[t]);
  }

  auto& beech = make(param::kBeechArea0);
  auto& grass = make(param::kGrassArea0);
  auto& agri_area = make(param::kAgriArea0);
  auto& peat = make(param::kPeatExtract);
  for (int r = 0; r < nr; ++r) {
    const auto cell = draw_region(seed, sets.regions[r]);
    beech[r] = cell.beech;
    grass[r] = cell.grass;
    agri_area[r] = cell.agri;
    for (int t = 0; t < nt; ++t) {
      peat[t * nr + r] = lerp(cell.peat.v2020, cell.peat.v2050, horizon_fraction(sets.years[t]));
    }
  }

  auto& marg = make(param::kCostMargFm);
  auto& inv = make(param::kCostInvFm);
  auto& level = make(param::kCostInvLevelFm);
  auto& ghg = make(param::kGhgFm);
  auto& growth = make(param::kFmGrowth);
  auto& cap0 = make(param::kCap0Fm);
  for (int f = 0; f < nf; ++f) {
    for (int r = 0; r < nr; ++r) {
      const auto cell = draw_fm(seed, sets.fm_techs[f], sets.regions[r]);
      Stream s(seed, "cap0:" + sets.fm_techs[f] + ":" + sets.regions[r]);
      cap0[f * nr + r] = s.uniform(0.0, 5000.0);
      for (int t = 0; t < nt; ++t) {
        const double h = horizon_fraction(sets.years[t]);
        const auto i = offset3(sets, t, f, r, nf);
        marg[i] = lerp(cell.marg.v2020, cell.marg.v2050, h);
        inv[i] = lerp(cell.inv.v2020, cell.inv.v2050, h);
        level[i] = lerp(cell.inv_level.v2020, cell.inv_level.v2050, h);
        ghg[i] = lerp(cell.ghg.v2020, cell.ghg.v2050, h);
        growth[i] = cell.growth;
      }
    }
  }

  auto& amarg = make(param::kCostMargAgri);
  auto& ainv = make(param::kCostInvAgri);
  auto& alevel = make(param::kCostInvLevelAgri);
  auto& aghg = make(param::kGhgAgri);
  auto& agrowth = make(param::kAgriGrowth);
  for (int a = 0; a < na; ++a) {
    for (int r = 0; r < nr; ++r) {
      const auto cell = draw_agri(seed, sets.agri_techs[a], sets.regions[r]);
      for (int t = 0; t < nt; ++t) {
        const double h = horizon_fraction(sets.years[t]);
        const auto i = offset3(sets, t, a, r, na);
        amarg[i] = lerp(cell.marg.v2020, cell.marg.v2050, h);
        ainv[i] = lerp(cell.inv.v2020, cell.inv.v2050, h);
        alevel[i] = lerp(cell.inv_level.v2020, cell.inv_level.v2050, h);
        aghg[i] = lerp(cell.ghg.v2020, cell.ghg.v2050, h);
        agrowth[i] = lerp(cell.growth.v2020, cell.growth.v2050, h);
      }
    }
  }
  data.validate();
  return data;
}

}  // namespace forge
