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

#ifndef FORGE_SIMPLEX_HPP_
#define FORGE_SIMPLEX_HPP_

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

#include "forge/lp.hpp"

namespace forge {

enum class SolveStatus { kOptimal, kInfeasible, kUnbounded };

const char* status_name(SolveStatus status);

struct SolverOptions {
  double feasibility_tol = 1e-7;
  double optimality_tol = 1e-8;
  double pivot_tol = 1e-9;
  int refactor_every = 100;
  std::int64_t iteration_limit = 1'000'000;
  // Keeps the phase-2 objective after every pivot in SolveOutcome::trace.
  bool record_trace = false;
};

struct SolveOutcome {
  SolveStatus status = SolveStatus::kInfeasible;
  Eigen::VectorXd x;  // structural values, Optimal only
  double objective = 0.0;
  std::int64_t iterations = 0;
  // Final basis over the augmented columns [x | surplus | artificial] and
  // the row prices of that basis (Optimal only).
  std::vector<int> basis;
  Eigen::VectorXd duals;
  std::vector<double> trace;
};

// Two-phase revised primal simplex on A x - s = b, x, s >= 0.
//
// Pricing is Dantzig (most negative reduced cost, lowest column on ties);
// after 2(n+m) consecutive pivots without objective improvement it falls
// back to Bland's rule until the objective moves again. The ratio test
// breaks ties by lowest column index. The basis is refactorized with
// Eigen::SparseLU every `refactor_every` pivots and updated in product form
// in between.
//
// Exceeding the iteration limit throws Error("iteration_limit").
SolveOutcome solve(const StandardFormLP& lp, const SolverOptions& options = {});

// Shadow prices of the rows at the optimum (d objective / d b_i).
// Throws InvalidArgument for a non-optimal outcome.
Eigen::VectorXd dual_values(const SolveOutcome& outcome, const StandardFormLP& lp);

}  // namespace forge

#endif  // FORGE_SIMPLEX_HPP_
