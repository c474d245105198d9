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

#include "forge/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "forge/error.hpp"

namespace forge {
namespace {

constexpr int kPeatYear = 2030;
constexpr double kPlantationGrassShare = 0.1;
constexpr double kAgcAgriShare = 0.1;
constexpr double kAgroforestryGrassShare = 0.1;

struct Dims {
  int nt, nr, nf, na;
  explicit Dims(const SetsSpec& s)
      : nt(static_cast<int>(s.years.size())),
        nr(static_cast<int>(s.regions.size())),
        nf(static_cast<int>(s.fm_techs.size())),
        na(static_cast<int>(s.agri_techs.size())) {}
};

void check_tensor(const ScenarioData& data, std::string_view name) {
  const auto& t = data.tensor(name);
  const auto want = expected_size(layout_of(name), data.sets);
  if (t.layout != layout_of(name) || t.values.size() != want) {
    throw DimensionError(std::string(name), "expected " + std::to_string(want) + " cells, got " +
                                                std::to_string(t.values.size()));
  }
}

const Eigen::VectorXd& values(const ScenarioData& data, std::string_view name) {
  return data.tensor(name).values;
}

// Techs of each land-use category, as set positions.
std::vector<int> fm_techs_in(const SetsSpec& s, FmCategory cat) {
  std::vector<int> out;
  for (int f = 0; f < static_cast<int>(s.fm_techs.size()); ++f) {
    if (fm_category(s.fm_techs[f]) == cat) out.push_back(f);
  }
  return out;
}

class LpBuilder {
 public:
  int add_column(ColumnKey key, double cost) {
    const int j = static_cast<int>(lp_.columns.size());
    lp_.columns.push_back(key);
    lp_.col_index.emplace(key, j);
    costs_.push_back(cost);
    return j;
  }

  // Starts a row `sum coef * x >= rhs`; entries are added with `entry`.
  int add_row(RowKey key, double rhs) {
    const int i = static_cast<int>(lp_.rows.size());
    lp_.rows.push_back(key);
    lp_.row_index.emplace(key, i);
    rhs_.push_back(rhs);
    return i;
  }

  void entry(int row, int col, double coef) {
    if (coef != 0.0) triplets_.emplace_back(row, col, coef);
  }

  StandardFormLP finish() {
    lp_.c = Eigen::Map<const Eigen::VectorXd>(costs_.data(), static_cast<Eigen::Index>(costs_.size()));
    lp_.b = Eigen::Map<const Eigen::VectorXd>(rhs_.data(), static_cast<Eigen::Index>(rhs_.size()));
    lp_.A.resize(lp_.n_rows(), lp_.n_vars());
    lp_.A.setFromTriplets(triplets_.begin(), triplets_.end());
    lp_.A.makeCompressed();
    lp_.check();
    return std::move(lp_);
  }

 private:
  StandardFormLP lp_;
  std::vector<double> costs_;
  std::vector<double> rhs_;
  std::vector<Eigen::Triplet<double>> triplets_;
};

}  // namespace

Solution Solution::zeros(const SetsSpec& sets) {
  const Dims d(sets);
  Solution sol;
  sol.cap_fms = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d.nt) * d.nf * d.nr);
  sol.cap_agri = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d.nt) * d.na * d.nr);
  sol.pur_co2 = Eigen::VectorXd::Zero(d.nt);
  return sol;
}

StandardFormLP build_lp(const ScenarioData& data) {
  data.sets.validate();
  for (const auto& name : parameter_names()) check_tensor(data, name);
  if (!(data.alpha > 0.0 && data.alpha <= 1.0)) throw InvalidArgument("alpha must lie in (0, 1]");

  const auto& s = data.sets;
  const Dims d(s);
  const auto& marg = values(data, param::kCostMargFm);
  const auto& level = values(data, param::kCostInvLevelFm);
  const auto& ghg = values(data, param::kGhgFm);
  const auto& growth = values(data, param::kFmGrowth);
  const auto& amarg = values(data, param::kCostMargAgri);
  const auto& alevel = values(data, param::kCostInvLevelAgri);
  const auto& aghg = values(data, param::kGhgAgri);
  const auto& agrowth = values(data, param::kAgriGrowth);
  const auto& price = values(data, param::kCo2Price);
  const auto& target = values(data, param::kGhgTarget);
  const auto& beech = values(data, param::kBeechArea0);
  const auto& grass = values(data, param::kGrassArea0);
  const auto& agri_area = values(data, param::kAgriArea0);

  const int peat_t = s.year_index(kPeatYear);
  const int rewet = s.fm_index(kRewettingTech);

  LpBuilder lb;
  // Columns: cap_fms (t, f, r), cap_agri (t, a, r), pur_co2 (t), gap.
  for (int t = 0; t < d.nt; ++t) {
    for (int f = 0; f < d.nf; ++f) {
      for (int r = 0; r < d.nr; ++r) {
        const auto i = offset3(s, t, f, r, d.nf);
        lb.add_column({VarKind::kCapFm, t, f, r}, (level[i] + marg[i]) / 1e6);
      }
    }
  }
  for (int t = 0; t < d.nt; ++t) {
    for (int a = 0; a < d.na; ++a) {
      for (int r = 0; r < d.nr; ++r) {
        const auto i = offset3(s, t, a, r, d.na);
        lb.add_column({VarKind::kCapAgri, t, a, r}, (alevel[i] + amarg[i]) / 1e6);
      }
    }
  }
  const int pur0 = d.nt * (d.nf + d.na) * d.nr;
  for (int t = 0; t < d.nt; ++t) lb.add_column({VarKind::kPurCo2, t, -1, -1}, data.gamma * price[t]);
  // The gap is priced at the 2030 credit price; without a 2030 year the
  // last year's price stands in.
  const int price_t = peat_t >= 0 ? peat_t : d.nt - 1;
  const int gap = lb.add_column({VarKind::kCo2GapRewetting}, data.gamma * price[price_t] / 1e6);

  auto fm_col = [&](int t, int f, int r) { return static_cast<int>(offset3(s, t, f, r, d.nf)); };
  auto agri_col = [&](int t, int a, int r) {
    return d.nt * d.nf * d.nr + static_cast<int>(offset3(s, t, a, r, d.na));
  };

  for (int t = 0; t < d.nt; ++t) {
    const int row = lb.add_row({RowFamily::kGhgTarget, t}, target[t]);
    for (int f = 0; f < d.nf; ++f) {
      for (int r = 0; r < d.nr; ++r) lb.entry(row, fm_col(t, f, r), ghg[offset3(s, t, f, r, d.nf)] / 1e6);
    }
    for (int a = 0; a < d.na; ++a) {
      for (int r = 0; r < d.nr; ++r) lb.entry(row, agri_col(t, a, r), aghg[offset3(s, t, a, r, d.na)] / 1e6);
    }
    lb.entry(row, pur0 + t, 1.0);
  }

  if (peat_t >= 0) {
    const int row = lb.add_row({RowFamily::kPeatland, peat_t}, data.peat_target_2030);
    if (rewet >= 0) {
      for (int r = 0; r < d.nr; ++r) {
        lb.entry(row, fm_col(peat_t, rewet, r), ghg[offset3(s, peat_t, rewet, r, d.nf)]);
      }
    }
    lb.entry(row, gap, 1.0);
  }

  // Land-use rows at the last year, negated into ">=" form.
  const int T = d.nt - 1;
  const auto set_aside = fm_techs_in(s, FmCategory::kSetAside);
  const auto plantation = fm_techs_in(s, FmCategory::kPlantation);
  const int agc = s.agri_index(kAgcTech);
  const int agroforestry = s.agri_index(kAgroforestryTech);
  for (int r = 0; r < d.nr; ++r) {
    if (!set_aside.empty()) {
      const int row = lb.add_row({RowFamily::kLandSetAside, T, -1, r}, -beech[r]);
      for (int f : set_aside) lb.entry(row, fm_col(T, f, r), -1.0);
    }
    if (!plantation.empty()) {
      const int row = lb.add_row({RowFamily::kLandPlantation, T, -1, r}, -kPlantationGrassShare * grass[r]);
      for (int f : plantation) lb.entry(row, fm_col(T, f, r), -1.0);
    }
    if (rewet >= 0) {
      const int row = lb.add_row({RowFamily::kLandRewetting, T, rewet, r},
                                 -data.alpha * (agri_area[r] + grass[r]));
      lb.entry(row, fm_col(T, rewet, r), -1.0);
    }
    if (agc >= 0) {
      const int row = lb.add_row({RowFamily::kLandAgc, T, agc, r}, -kAgcAgriShare * agri_area[r]);
      lb.entry(row, agri_col(T, agc, r), -1.0);
    }
    if (agroforestry >= 0) {
      const int row = lb.add_row({RowFamily::kLandAgroforestry, T, agroforestry, r},
                                 -kAgroforestryGrassShare * grass[r]);
      lb.entry(row, agri_col(T, agroforestry, r), -1.0);
    }
  }

  // Growth: cap(t) - cap(t-1) <= growth(t-1)  ->  cap(t-1) - cap(t) >= -growth(t-1).
  for (int t = 1; t < d.nt; ++t) {
    for (int f = 0; f < d.nf; ++f) {
      for (int r = 0; r < d.nr; ++r) {
        const int row = lb.add_row({RowFamily::kGrowthFm, t, f, r}, -growth[offset3(s, t - 1, f, r, d.nf)]);
        lb.entry(row, fm_col(t, f, r), -1.0);
        lb.entry(row, fm_col(t - 1, f, r), 1.0);
      }
    }
    for (int a = 0; a < d.na; ++a) {
      for (int r = 0; r < d.nr; ++r) {
        const int row = lb.add_row({RowFamily::kGrowthAgri, t, a, r}, -agrowth[offset3(s, t - 1, a, r, d.na)]);
        lb.entry(row, agri_col(t, a, r), -1.0);
        lb.entry(row, agri_col(t - 1, a, r), 1.0);
      }
    }
  }

  // cap(first year) = 0 as a pair of rows.
  for (int f = 0; f < d.nf; ++f) {
    for (int r = 0; r < d.nr; ++r) {
      lb.entry(lb.add_row({RowFamily::kAnchorFmLower, 0, f, r}, 0.0), fm_col(0, f, r), 1.0);
      lb.entry(lb.add_row({RowFamily::kAnchorFmUpper, 0, f, r}, 0.0), fm_col(0, f, r), -1.0);
    }
  }
  for (int a = 0; a < d.na; ++a) {
    for (int r = 0; r < d.nr; ++r) {
      lb.entry(lb.add_row({RowFamily::kAnchorAgriLower, 0, a, r}, 0.0), agri_col(0, a, r), 1.0);
      lb.entry(lb.add_row({RowFamily::kAnchorAgriUpper, 0, a, r}, 0.0), agri_col(0, a, r), -1.0);
    }
  }
  return lb.finish();
}

Eigen::VectorXd to_columns(const StandardFormLP& lp, const Solution& sol) {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(lp.n_vars());
  const Eigen::Index nfm = sol.cap_fms.size();
  for (int j = 0; j < lp.n_vars(); ++j) {
    const auto& key = lp.columns[j];
    switch (key.kind) {
      case VarKind::kCapFm:
      case VarKind::kCapAgri:
      case VarKind::kGeneric:
        break;
      case VarKind::kPurCo2:
        x[j] = sol.pur_co2[key.year];
        break;
      case VarKind::kCo2GapRewetting:
        x[j] = sol.co2_gap_rewt;
        break;
    }
  }
  // Cap columns are laid out exactly like the flat tensors.
  x.head(nfm) = sol.cap_fms;
  x.segment(nfm, sol.cap_agri.size()) = sol.cap_agri;
  return x;
}

Solution from_columns(const ScenarioData& data, const StandardFormLP& lp, const Eigen::VectorXd& x) {
  if (x.size() != lp.n_vars()) throw DimensionError("x", "length differs from the LP column count");
  Solution sol = Solution::zeros(data.sets);
  const Eigen::Index nfm = sol.cap_fms.size();
  const Eigen::Index nag = sol.cap_agri.size();
  sol.cap_fms = x.head(nfm).cwiseMax(0.0);
  sol.cap_agri = x.segment(nfm, nag).cwiseMax(0.0);
  for (int j = static_cast<int>(nfm + nag); j < lp.n_vars(); ++j) {
    const auto& key = lp.columns[j];
    if (key.kind == VarKind::kPurCo2) sol.pur_co2[key.year] = std::max(0.0, x[j]);
    if (key.kind == VarKind::kCo2GapRewetting) sol.co2_gap_rewt = std::max(0.0, x[j]);
  }
  sol.objective = lp.c.dot(x);
  return sol;
}

Abatement abatement(const ScenarioData& data, const Solution& sol) {
  const Dims d(data.sets);
  const auto& ghg = values(data, param::kGhgFm);
  const auto& aghg = values(data, param::kGhgAgri);
  if (sol.cap_fms.size() != ghg.size()) throw DimensionError("cap_fms", "does not match ghgFMs");
  if (sol.cap_agri.size() != aghg.size()) throw DimensionError("cap_agri", "does not match ghgAgri");
  Abatement out;
  out.fm = ghg.cwiseProduct(sol.cap_fms);
  out.agri = aghg.cwiseProduct(sol.cap_agri);
  out.fm_annual = Eigen::VectorXd::Zero(d.nt);
  out.agri_annual = Eigen::VectorXd::Zero(d.nt);
  const Eigen::Index fm_block = static_cast<Eigen::Index>(d.nf) * d.nr;
  const Eigen::Index agri_block = static_cast<Eigen::Index>(d.na) * d.nr;
  for (int t = 0; t < d.nt; ++t) {
    out.fm_annual[t] = out.fm.segment(t * fm_block, fm_block).sum();
    out.agri_annual[t] = out.agri.segment(t * agri_block, agri_block).sum();
  }
  out.fm_total = out.fm_annual.sum();
  out.agri_total = out.agri_annual.sum();
  return out;
}

Eigen::VectorXd tech_cost_fm(const ScenarioData& data, const Solution& sol) {
  const Eigen::VectorXd unit = values(data, param::kCostInvLevelFm) + values(data, param::kCostMargFm);
  if (sol.cap_fms.size() != unit.size()) throw DimensionError("cap_fms", "does not match cost tensors");
  return unit.cwiseProduct(sol.cap_fms);
}

Eigen::VectorXd tech_cost_agri(const ScenarioData& data, const Solution& sol) {
  const Eigen::VectorXd unit = values(data, param::kCostInvLevelAgri) + values(data, param::kCostMargAgri);
  if (sol.cap_agri.size() != unit.size()) throw DimensionError("cap_agri", "does not match cost tensors");
  return unit.cwiseProduct(sol.cap_agri);
}

double total_cost(const ScenarioData& data, const Solution& sol) {
  const Dims d(data.sets);
  const Eigen::VectorXd fm = tech_cost_fm(data, sol);
  const Eigen::VectorXd agri = tech_cost_agri(data, sol);
  const auto& price = values(data, param::kCo2Price);
  const Eigen::Index fm_block = static_cast<Eigen::Index>(d.nf) * d.nr;
  const Eigen::Index agri_block = static_cast<Eigen::Index>(d.na) * d.nr;
  double total = 0.0;
  for (int t = 0; t < d.nt; ++t) {
    const double annual = fm.segment(t * fm_block, fm_block).sum() + agri.segment(t * agri_block, agri_block).sum();
    total += annual / 1e6 + data.gamma * price[t] * sol.pur_co2[t];
  }
  const int peat_t = data.sets.year_index(kPeatYear);
  const int price_t = peat_t >= 0 ? peat_t : d.nt - 1;
  total += data.gamma * price[price_t] / 1e6 * sol.co2_gap_rewt;
  return total;
}

ConstraintReport validate(const ScenarioData& data, const Solution& sol, double tol) {
  if (!(tol > 0.0)) throw InvalidArgument("validate: tol must be positive");
  const auto& s = data.sets;
  const Dims d(s);
  const Solution zero = Solution::zeros(s);
  if (sol.cap_fms.size() != zero.cap_fms.size() || sol.cap_agri.size() != zero.cap_agri.size() ||
      sol.pur_co2.size() != zero.pur_co2.size()) {
    throw DimensionError("solution", "does not match the scenario sets");
  }
  const auto ab = abatement(data, sol);

  ConstraintReport report;
  auto le = [&](const char* family, std::vector<int> index, double lhs, double rhs) {
    report.entries.push_back({family, std::move(index), lhs, rhs, rhs - lhs, true});
  };
  auto ge = [&](const char* family, std::vector<int> index, double lhs, double rhs) {
    report.entries.push_back({family, std::move(index), lhs, rhs, lhs - rhs, true});
  };

  const auto& target = values(data, param::kGhgTarget);
  for (int t = 0; t < d.nt; ++t) {
    ge("ghg_target", {t}, ab.fm_annual[t] / 1e6 + ab.agri_annual[t] / 1e6 + sol.pur_co2[t], target[t]);
  }

  const int peat_t = s.year_index(kPeatYear);
  const int rewet = s.fm_index(kRewettingTech);
  if (peat_t >= 0) {
    double rewetted = 0.0;
    if (rewet >= 0) {
      for (int r = 0; r < d.nr; ++r) rewetted += ab.fm[offset3(s, peat_t, rewet, r, d.nf)];
    }
    ge("peatland_2030", {peat_t}, rewetted + sol.co2_gap_rewt, data.peat_target_2030);
  }

  const int T = d.nt - 1;
  auto cap = [&](int t, int f, int r) { return sol.cap_fms[offset3(s, t, f, r, d.nf)]; };
  auto cap_a = [&](int t, int a, int r) { return sol.cap_agri[offset3(s, t, a, r, d.na)]; };
  const int agc = s.agri_index(kAgcTech);
  const int agroforestry = s.agri_index(kAgroforestryTech);
  for (int r = 0; r < d.nr; ++r) {
    double set_aside = 0.0, plantation = 0.0;
    bool any_set_aside = false, any_plantation = false;
    for (int f = 0; f < d.nf; ++f) {
      switch (fm_category(s.fm_techs[f])) {
        case FmCategory::kSetAside: set_aside += cap(T, f, r); any_set_aside = true; break;
        case FmCategory::kPlantation: plantation += cap(T, f, r); any_plantation = true; break;
        default: break;
      }
    }
    if (any_set_aside) le("land_set_aside", {T, r}, set_aside, data.region(param::kBeechArea0, r));
    if (any_plantation) {
      le("land_plantation", {T, r}, plantation, kPlantationGrassShare * data.region(param::kGrassArea0, r));
    }
    if (rewet >= 0) {
      le("land_rewetting", {T, rewet, r}, cap(T, rewet, r),
         data.alpha * (data.region(param::kAgriArea0, r) + data.region(param::kGrassArea0, r)));
    }
    if (agc >= 0) {
      le("land_agc", {T, agc, r}, cap_a(T, agc, r), kAgcAgriShare * data.region(param::kAgriArea0, r));
    }
    if (agroforestry >= 0) {
      le("land_agroforestry", {T, agroforestry, r}, cap_a(T, agroforestry, r),
         kAgroforestryGrassShare * data.region(param::kGrassArea0, r));
    }
  }

  const auto& growth = values(data, param::kFmGrowth);
  const auto& agrowth = values(data, param::kAgriGrowth);
  for (int t = 1; t < d.nt; ++t) {
    for (int f = 0; f < d.nf; ++f) {
      for (int r = 0; r < d.nr; ++r) {
        le("growth_fm", {t, f, r}, cap(t, f, r) - cap(t - 1, f, r), growth[offset3(s, t - 1, f, r, d.nf)]);
      }
    }
    for (int a = 0; a < d.na; ++a) {
      for (int r = 0; r < d.nr; ++r) {
        le("growth_agri", {t, a, r}, cap_a(t, a, r) - cap_a(t - 1, a, r), agrowth[offset3(s, t - 1, a, r, d.na)]);
      }
    }
  }

  // Equality anchors report -|cap| as slack.
  for (int f = 0; f < d.nf; ++f) {
    for (int r = 0; r < d.nr; ++r) {
      const double v = cap(0, f, r);
      report.entries.push_back({"anchor_fm", {0, f, r}, v, 0.0, -std::abs(v), true});
    }
  }
  for (int a = 0; a < d.na; ++a) {
    for (int r = 0; r < d.nr; ++r) {
      const double v = cap_a(0, a, r);
      report.entries.push_back({"anchor_agri", {0, a, r}, v, 0.0, -std::abs(v), true});
    }
  }

  for (Eigen::Index i = 0; i < sol.cap_fms.size(); ++i) {
    ge("nonnegative_cap_fm", {static_cast<int>(i)}, sol.cap_fms[i], 0.0);
  }
  for (Eigen::Index i = 0; i < sol.cap_agri.size(); ++i) {
    ge("nonnegative_cap_agri", {static_cast<int>(i)}, sol.cap_agri[i], 0.0);
  }
  for (int t = 0; t < d.nt; ++t) ge("nonnegative_pur_co2", {t}, sol.pur_co2[t], 0.0);
  ge("nonnegative_gap", {}, sol.co2_gap_rewt, 0.0);

  for (auto& e : report.entries) {
    e.satisfied = e.slack >= -tol;
    report.max_violation = std::max(report.max_violation, -e.slack);
  }
  return report;
}

ModelRun solve_model(const ScenarioData& data, const SolverOptions& options) {
  ModelRun run;
  run.lp = build_lp(data);
  run.outcome = solve(run.lp, options);
  switch (run.outcome.status) {
    case SolveStatus::kOptimal: break;
    case SolveStatus::kInfeasible:
      throw Error("infeasible", "scenario " + data.scenario_id + " is infeasible");
    case SolveStatus::kUnbounded:
      throw Error("unbounded", "scenario " + data.scenario_id + " is unbounded");
  }
  run.solution = from_columns(data, run.lp, run.outcome.x);
  run.solution.objective = run.outcome.objective;
  return run;
}

}  // namespace forge
