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

#ifndef FORGE_LP_HPP_
#define FORGE_LP_HPP_

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <compare>
#include <map>
#include <ostream>
#include <string>
#include <vector>

namespace forge {

enum class VarKind { kCapFm, kCapAgri, kPurCo2, kCo2GapRewetting, kGeneric };

// Identifies one LP column. Unused index fields stay -1.
struct ColumnKey {
  VarKind kind = VarKind::kGeneric;
  int year = -1;
  int tech = -1;
  int region = -1;

  auto operator<=>(const ColumnKey&) const = default;
};

enum class RowFamily {
  kGhgTarget,
  kPeatland,
  kLandSetAside,
  kLandPlantation,
  kLandRewetting,
  kLandAgc,
  kLandAgroforestry,
  kGrowthFm,
  kGrowthAgri,
  kAnchorFmLower,
  kAnchorFmUpper,
  kAnchorAgriLower,
  kAnchorAgriUpper,
  kGeneric,
};

const char* family_name(RowFamily family);

struct RowKey {
  RowFamily family = RowFamily::kGeneric;
  int year = -1;
  int tech = -1;
  int region = -1;

  auto operator<=>(const RowKey&) const = default;
};

using SparseRowMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

// min c'x  s.t.  A x >= b,  x >= 0.
struct StandardFormLP {
  Eigen::VectorXd c;
  SparseRowMatrix A;
  Eigen::VectorXd b;
  std::vector<ColumnKey> columns;  // column -> key
  std::vector<RowKey> rows;        // row -> key
  std::map<ColumnKey, int> col_index;
  std::map<RowKey, int> row_index;

  int n_vars() const { return static_cast<int>(c.size()); }
  int n_rows() const { return static_cast<int>(b.size()); }

  // Throws InvalidArgument if the key is not mapped.
  int column(const ColumnKey& key) const;
  int row(const RowKey& key) const;

  // Sizes agree, entries finite, index maps are bijections onto the ranges.
  void check() const;

  // LP with kGeneric keys numbered by position.
  static StandardFormLP generic(Eigen::VectorXd c, const Eigen::MatrixXd& A, Eigen::VectorXd b);
};

// Fixed-column MPS text (ROWS / COLUMNS / RHS sections; all rows are G,
// no BOUNDS section because every variable is nonnegative). Names are
// positional: R0000001..., C0000001...
void write_mps(const StandardFormLP& lp, std::ostream& out, const std::string& name = "FORGE");

}  // namespace forge

#endif  // FORGE_LP_HPP_
