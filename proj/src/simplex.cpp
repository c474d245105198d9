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

#include "forge/simplex.hpp"

#include <Eigen/OrderingMethods>
#include <Eigen/SparseLU>

#include <cmath>
#include <limits>
#include <utility>

#include "forge/error.hpp"

namespace forge {

const char* status_name(SolveStatus status) {
  switch (status) {
    case SolveStatus::kOptimal: return "Optimal";
    case SolveStatus::kInfeasible: return "Infeasible";
    case SolveStatus::kUnbounded: return "Unbounded";
  }
  return "?";
}

namespace {

using SparseColMatrix = Eigen::SparseMatrix<double>;

// Elementary column transformation of the product-form update.
struct Eta {
  int row = 0;
  double pivot = 1.0;
  std::vector<std::pair<int, double>> off;  // (i, alpha_i), i != row
};

class RevisedSimplex {
 public:
  RevisedSimplex(const StandardFormLP& lp, const SolverOptions& options)
      : lp_(lp), opt_(options), n_(lp.n_vars()), m_(lp.n_rows()), cols_(lp.A) {
    cols_.makeCompressed();
  }

  SolveOutcome run() {
    SolveOutcome out;
    if (m_ == 0) {
      // Only the bounds x >= 0 remain.
      out.status = (lp_.c.array() < 0.0).any() ? SolveStatus::kUnbounded : SolveStatus::kOptimal;
      if (out.status == SolveStatus::kOptimal) out.x = Eigen::VectorXd::Zero(n_), out.duals.resize(0);
      return out;
    }
    const double b_scale = 1.0 + (m_ > 0 ? lp_.b.cwiseAbs().maxCoeff() : 0.0);

    // Slack basis; rows whose surplus would be negative start on an artificial.
    basis_.assign(m_, -1);
    where_.assign(n_ + 2 * m_, -1);
    for (int i = 0; i < m_; ++i) {
      const int col = lp_.b[i] > 0.0 ? artificial(i) : surplus(i);
      basis_[i] = col;
      where_[col] = i;
    }

    // Phase 1: minimise the sum of artificials.
    cost_ = Eigen::VectorXd::Zero(n_ + 2 * m_);
    cost_.tail(m_).setOnes();
    refactor();
    if (iterate(/*phase=*/1, out) != SolveStatus::kOptimal) {
      throw Error("internal", "phase 1 reported unbounded");
    }
    double infeasibility = 0.0;
    for (int i = 0; i < m_; ++i) {
      if (is_artificial(basis_[i])) infeasibility += std::max(0.0, xb_[i]);
    }
    if (infeasibility > opt_.feasibility_tol * b_scale) {
      out.status = SolveStatus::kInfeasible;
      return out;
    }
    drive_out_artificials();

    // Phase 2 on the true costs; artificials left in the basis sit on
    // redundant rows and are held at zero by the ratio test.
    cost_.setZero();
    cost_.head(n_) = lp_.c;
    refactor();
    const SolveStatus status = iterate(/*phase=*/2, out);
    out.status = status;
    if (status != SolveStatus::kOptimal) return out;

    refactor();
    out.x = Eigen::VectorXd::Zero(n_);
    for (int i = 0; i < m_; ++i) {
      if (basis_[i] < n_) out.x[basis_[i]] = xb_[i];
    }
    for (int j = 0; j < n_; ++j) {
      if (out.x[j] < 0.0 && out.x[j] > -opt_.feasibility_tol) out.x[j] = 0.0;
    }
    out.objective = lp_.c.dot(out.x);
    out.basis = basis_;
    out.duals = btran(basic_costs());
    return out;
  }

 private:
  int surplus(int i) const { return n_ + i; }
  int artificial(int i) const { return n_ + m_ + i; }
  bool is_artificial(int col) const { return col >= n_ + m_; }

  // Dense copy of augmented column `col`.
  void load_column(int col, Eigen::VectorXd& a) const {
    a.setZero(m_);
    if (col < n_) {
      for (SparseColMatrix::InnerIterator it(cols_, col); it; ++it) a[it.row()] = it.value();
    } else if (col < n_ + m_) {
      a[col - n_] = -1.0;
    } else {
      a[col - n_ - m_] = 1.0;
    }
  }

  void refactor() {
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(static_cast<std::size_t>(m_) * 3);
    for (int pos = 0; pos < m_; ++pos) {
      const int col = basis_[pos];
      if (col < n_) {
        for (SparseColMatrix::InnerIterator it(cols_, col); it; ++it) {
          triplets.emplace_back(static_cast<int>(it.row()), pos, it.value());
        }
      } else if (col < n_ + m_) {
        triplets.emplace_back(col - n_, pos, -1.0);
      } else {
        triplets.emplace_back(col - n_ - m_, pos, 1.0);
      }
    }
    SparseColMatrix basis_matrix(m_, m_);
    basis_matrix.setFromTriplets(triplets.begin(), triplets.end());
    basis_matrix.makeCompressed();
    lu_.analyzePattern(basis_matrix);
    lu_.factorize(basis_matrix);
    if (lu_.info() != Eigen::Success) throw Error("singular_basis", "basis factorization failed");
    etas_.clear();
    xb_ = ftran(lp_.b);
  }

  Eigen::VectorXd ftran(const Eigen::VectorXd& a) const {
    Eigen::VectorXd x = m_ > 0 ? Eigen::VectorXd(lu_.solve(a)) : Eigen::VectorXd();
    for (const auto& eta : etas_) {
      const double xr = x[eta.row] / eta.pivot;
      if (xr != 0.0) {
        for (const auto& [i, v] : eta.off) x[i] -= v * xr;
      }
      x[eta.row] = xr;
    }
    return x;
  }

  Eigen::VectorXd btran(Eigen::VectorXd w) const {
    for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
      double acc = w[it->row];
      for (const auto& [i, v] : it->off) acc -= v * w[i];
      w[it->row] = acc / it->pivot;
    }
    if (m_ == 0) return w;
    return lu_.transpose().solve(w);
  }

  Eigen::VectorXd basic_costs() const {
    Eigen::VectorXd cb(m_);
    for (int i = 0; i < m_; ++i) cb[i] = cost_[basis_[i]];
    return cb;
  }

  double phase_objective() const { return basic_costs().dot(xb_); }

  // Replaces the basic variable in position `r` by column `q` with FTRAN'd
  // column `alpha` and step `theta`.
  void pivot(int r, int q, const Eigen::VectorXd& alpha, double theta) {
    xb_ -= theta * alpha;
    xb_[r] = theta;
    where_[basis_[r]] = -1;
    basis_[r] = q;
    where_[q] = r;
    Eta eta;
    eta.row = r;
    eta.pivot = alpha[r];
    for (int i = 0; i < m_; ++i) {
      if (i != r && alpha[i] != 0.0) eta.off.emplace_back(i, alpha[i]);
    }
    etas_.push_back(std::move(eta));
    if (static_cast<int>(etas_.size()) >= opt_.refactor_every) refactor();
  }

  void count_iteration(SolveOutcome& out) {
    if (++out.iterations > opt_.iteration_limit) {
      throw Error("iteration_limit", "simplex exceeded " +
                                         std::to_string(opt_.iteration_limit) + " iterations");
    }
  }

  SolveStatus iterate(int phase, SolveOutcome& out) {
    const std::int64_t stall_limit = 2LL * (n_ + m_);
    std::int64_t stalled = 0;
    bool bland = false;
    double best = phase_objective();
    Eigen::VectorXd a(m_);

    while (true) {
      const Eigen::VectorXd y = btran(basic_costs());
      const Eigen::VectorXd aty = lp_.A.transpose() * y;

      // Pricing over eligible nonbasic columns in ascending index order.
      int entering = -1;
      double best_d = 0.0;
      auto consider = [&](int col, double d, double scale) {
        if (d >= -opt_.optimality_tol * scale) return false;
        if (bland) {
          entering = col;
          return true;
        }
        if (entering < 0 || d < best_d) {
          entering = col;
          best_d = d;
        }
        return false;
      };
      bool done = false;
      for (int j = 0; j < n_ && !done; ++j) {
        if (where_[j] >= 0) continue;
        done = consider(j, cost_[j] - aty[j], 1.0 + std::abs(cost_[j]));
      }
      for (int i = 0; i < m_ && !done; ++i) {
        if (where_[surplus(i)] >= 0) continue;
        done = consider(surplus(i), y[i], 1.0);
      }
      if (entering < 0) return SolveStatus::kOptimal;

      load_column(entering, a);
      const Eigen::VectorXd alpha = ftran(a);

      // Ratio test with lowest-column tie-break.
      int leave = -1;
      double theta = std::numeric_limits<double>::infinity();
      for (int i = 0; i < m_; ++i) {
        double ratio;
        if (phase == 2 && is_artificial(basis_[i])) {
          if (std::abs(alpha[i]) <= opt_.pivot_tol) continue;
          ratio = 0.0;
        } else {
          if (alpha[i] <= opt_.pivot_tol) continue;
          ratio = std::max(xb_[i], 0.0) / alpha[i];
        }
        const double slack = 1e-12 * (1.0 + std::abs(theta));
        if (leave < 0 || ratio < theta - slack) {
          theta = ratio;
          leave = i;
        } else if (ratio <= theta + slack && basis_[i] < basis_[leave]) {
          theta = std::min(theta, ratio);
          leave = i;
        }
      }
      if (leave < 0) return SolveStatus::kUnbounded;

      count_iteration(out);
      pivot(leave, entering, alpha, theta);

      const double obj = phase_objective();
      if (phase == 2 && opt_.record_trace) out.trace.push_back(obj);
      if (obj < best - 1e-12 * (1.0 + std::abs(best))) {
        best = obj;
        stalled = 0;
        bland = false;
      } else if (++stalled > stall_limit) {
        bland = true;
      }
    }
  }

  void drive_out_artificials() {
    Eigen::VectorXd a(m_);
    for (int r = 0; r < m_; ++r) {
      if (!is_artificial(basis_[r])) continue;
      Eigen::VectorXd e = Eigen::VectorXd::Zero(m_);
      e[r] = 1.0;
      const Eigen::VectorXd rho = btran(e);
      const Eigen::VectorXd row = lp_.A.transpose() * rho;
      int q = -1;
      double best = opt_.pivot_tol;
      for (int j = 0; j < n_; ++j) {
        if (where_[j] < 0 && std::abs(row[j]) > best) {
          best = std::abs(row[j]);
          q = j;
        }
      }
      for (int i = 0; i < m_; ++i) {
        if (where_[surplus(i)] < 0 && std::abs(rho[i]) > best) {
          best = std::abs(rho[i]);
          q = surplus(i);
        }
      }
      if (q < 0) continue;  // redundant row
      load_column(q, a);
      const Eigen::VectorXd alpha = ftran(a);
      pivot(r, q, alpha, xb_[r] / alpha[r]);
    }
  }

  const StandardFormLP& lp_;
  const SolverOptions& opt_;
  const int n_;
  const int m_;
  SparseColMatrix cols_;
  std::vector<int> basis_;
  std::vector<int> where_;
  Eigen::VectorXd cost_;
  Eigen::VectorXd xb_;
  mutable Eigen::SparseLU<SparseColMatrix, Eigen::COLAMDOrdering<int>> lu_;
  std::vector<Eta> etas_;
};

}  // namespace

SolveOutcome solve(const StandardFormLP& lp, const SolverOptions& options) {
  lp.check();
  return RevisedSimplex(lp, options).run();
}

Eigen::VectorXd dual_values(const SolveOutcome& outcome, const StandardFormLP& lp) {
  if (outcome.status != SolveStatus::kOptimal) {
    throw InvalidArgument(std::string("dual values need an optimal outcome, got ") +
                          status_name(outcome.status));
  }
  if (outcome.duals.size() != lp.n_rows()) {
    throw DimensionError("duals", "outcome does not belong to this LP");
  }
  return outcome.duals;
}

}  // namespace forge
