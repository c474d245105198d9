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

#include "forge/lp.hpp"

#include <cmath>
#include <cstdio>
#include <vector>

#include "forge/error.hpp"

namespace forge {

const char* family_name(RowFamily family) {
  switch (family) {
    case RowFamily::kGhgTarget: return "ghg_target";
    case RowFamily::kPeatland: return "peatland_2030";
    case RowFamily::kLandSetAside: return "land_set_aside";
    case RowFamily::kLandPlantation: return "land_plantation";
    case RowFamily::kLandRewetting: return "land_rewetting";
    case RowFamily::kLandAgc: return "land_agc";
    case RowFamily::kLandAgroforestry: return "land_agroforestry";
    case RowFamily::kGrowthFm: return "growth_fm";
    case RowFamily::kGrowthAgri: return "growth_agri";
    case RowFamily::kAnchorFmLower: return "anchor_fm_lower";
    case RowFamily::kAnchorFmUpper: return "anchor_fm_upper";
    case RowFamily::kAnchorAgriLower: return "anchor_agri_lower";
    case RowFamily::kAnchorAgriUpper: return "anchor_agri_upper";
    case RowFamily::kGeneric: return "row";
  }
  return "?";
}

int StandardFormLP::column(const ColumnKey& key) const {
  const auto it = col_index.find(key);
  if (it == col_index.end()) throw InvalidArgument("unmapped column key");
  return it->second;
}

int StandardFormLP::row(const RowKey& key) const {
  const auto it = row_index.find(key);
  if (it == row_index.end()) throw InvalidArgument("unmapped row key");
  return it->second;
}

void StandardFormLP::check() const {
  if (A.rows() != b.size() || A.cols() != c.size()) {
    throw DimensionError("A", "shape does not match c and b");
  }
  if (static_cast<int>(columns.size()) != n_vars() ||
      static_cast<int>(col_index.size()) != n_vars()) {
    throw DimensionError("col_index", "not a bijection onto the columns");
  }
  if (static_cast<int>(rows.size()) != n_rows() ||
      static_cast<int>(row_index.size()) != n_rows()) {
    throw DimensionError("row_index", "not a bijection onto the rows");
  }
  for (int j = 0; j < n_vars(); ++j) {
    if (column(columns[j]) != j) throw DimensionError("col_index", "inverse mismatch");
    if (!std::isfinite(c[j])) throw DimensionError("c", "non-finite entry");
  }
  for (int i = 0; i < n_rows(); ++i) {
    if (row(rows[i]) != i) throw DimensionError("row_index", "inverse mismatch");
    if (!std::isfinite(b[i])) throw DimensionError("b", "non-finite entry");
  }
  for (int k = 0; k < A.outerSize(); ++k) {
    for (SparseRowMatrix::InnerIterator it(A, k); it; ++it) {
      if (!std::isfinite(it.value())) throw DimensionError("A", "non-finite entry");
    }
  }
}

StandardFormLP StandardFormLP::generic(Eigen::VectorXd c, const Eigen::MatrixXd& A,
                                       Eigen::VectorXd b) {
  StandardFormLP lp;
  lp.c = std::move(c);
  lp.b = std::move(b);
  lp.A = A.sparseView();
  lp.A.makeCompressed();
  for (int j = 0; j < lp.n_vars(); ++j) {
    lp.columns.push_back({VarKind::kGeneric, j, -1, -1});
    lp.col_index[lp.columns.back()] = j;
  }
  for (int i = 0; i < lp.n_rows(); ++i) {
    lp.rows.push_back({RowFamily::kGeneric, i, -1, -1});
    lp.row_index[lp.rows.back()] = i;
  }
  lp.check();
  return lp;
}

void write_mps(const StandardFormLP& lp, std::ostream& out, const std::string& name) {
  char line[128];
  auto num = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return std::string(buf);
  };
  out << "NAME          " << name << '\n';
  out << "ROWS\n";
  out << " N  COST\n";
  for (int i = 0; i < lp.n_rows(); ++i) {
    std::snprintf(line, sizeof line, " G  R%07d\n", i + 1);
    out << line;
  }
  out << "COLUMNS\n";
  const Eigen::SparseMatrix<double> cols = lp.A;
  for (int j = 0; j < lp.n_vars(); ++j) {
    if (lp.c[j] != 0.0) {
      std::snprintf(line, sizeof line, "    C%07d  %-8s  %12s\n", j + 1, "COST",
                    num(lp.c[j]).c_str());
      out << line;
    }
    for (Eigen::SparseMatrix<double>::InnerIterator it(cols, j); it; ++it) {
      char row[16];
      std::snprintf(row, sizeof row, "R%07d", static_cast<int>(it.row()) + 1);
      std::snprintf(line, sizeof line, "    C%07d  %-8s  %12s\n", j + 1, row,
                    num(it.value()).c_str());
      out << line;
    }
  }
  out << "RHS\n";
  for (int i = 0; i < lp.n_rows(); ++i) {
    if (lp.b[i] == 0.0) continue;
    char row[16];
    std::snprintf(row, sizeof row, "R%07d", i + 1);
    std::snprintf(line, sizeof line, "    RHS       %-8s  %12s\n", row, num(lp.b[i]).c_str());
    out << line;
  }
  out << "ENDATA\n";
}

}  // namespace forge
