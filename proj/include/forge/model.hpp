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

#ifndef FORGE_MODEL_HPP_
#define FORGE_MODEL_HPP_

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "forge/lp.hpp"
#include "forge/scenario.hpp"
#include "forge/simplex.hpp"

namespace forge {

// Optimal land-use plan. Tensors use the ScenarioData flat layouts:
// cap_fms / cap_agri are (t, tech, r) via offset3, pur_co2 is per year.
struct Solution {
  Eigen::VectorXd cap_fms;   // ha
  Eigen::VectorXd cap_agri;  // ha
  Eigen::VectorXd pur_co2;   // MtCO2eq
  double co2_gap_rewt = 0.0; // tCO2eq
  double objective = 0.0;    // million EUR

  static Solution zeros(const SetsSpec& sets);
};

// Assembles min c'x s.t. Ax >= b, x >= 0. Throws DimensionError when a
// tensor does not match data.sets.
StandardFormLP build_lp(const ScenarioData& data);

// Column vector of `sol` under the column map of `lp`, and the inverse.
Eigen::VectorXd to_columns(const StandardFormLP& lp, const Solution& sol);
Solution from_columns(const ScenarioData& data, const StandardFormLP& lp, const Eigen::VectorXd& x);

struct Abatement {
  Eigen::VectorXd fm;    // tCO2eq per (t, f, r)
  Eigen::VectorXd agri;  // tCO2eq per (t, a, r)
  Eigen::VectorXd fm_annual;
  Eigen::VectorXd agri_annual;
  double fm_total = 0.0;
  double agri_total = 0.0;
};

Abatement abatement(const ScenarioData& data, const Solution& sol);

// Per (t, tech, r) cost in EUR: (costInvLevel + costMarg) * cap.
Eigen::VectorXd tech_cost_fm(const ScenarioData& data, const Solution& sol);
Eigen::VectorXd tech_cost_agri(const ScenarioData& data, const Solution& sol);

// Objective in million EUR, evaluated directly from the formulas.
double total_cost(const ScenarioData& data, const Solution& sol);

struct ConstraintEntry {
  std::string family;
  std::vector<int> index;  // set positions (year, tech, region as applicable)
  double lhs = 0.0;
  double rhs = 0.0;
  double slack = 0.0;      // lhs - rhs in ">=" orientation
  bool satisfied = true;
};

struct ConstraintReport {
  std::vector<ConstraintEntry> entries;
  double max_violation = 0.0;
};

// Re-evaluates every constraint family from the data, without the LP.
ConstraintReport validate(const ScenarioData& data, const Solution& sol, double tol = 1e-6);

struct ModelRun {
  StandardFormLP lp;
  SolveOutcome outcome;
  Solution solution;
};

// build_lp + solve + from_columns. A non-optimal status throws Error with
// code "infeasible" or "unbounded".
ModelRun solve_model(const ScenarioData& data, const SolverOptions& options = {});

}  // namespace forge

#endif  // FORGE_MODEL_HPP_
