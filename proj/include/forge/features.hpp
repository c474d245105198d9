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

#ifndef FORGE_FEATURES_HPP_
#define FORGE_FEATURES_HPP_

#include <Eigen/Dense>

#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "forge/bank.hpp"
#include "forge/scenario.hpp"

namespace forge {

using RowMatrixXd = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct TrendTriple {
  double initial = 0.0;
  double final = 0.0;
  double slope = 0.0;  // OLS, units per year

  bool operator==(const TrendTriple&) const = default;
};

// Endpoint reads plus the least-squares slope. A constant series has slope
// exactly 0. Fewer than two points or repeated years throw InvalidArgument.
TrendTriple trend(std::span<const int> years, std::span<const double> values);

// One copy of `triple` per region.
std::vector<TrendTriple> broadcast_global(const TrendTriple& triple, std::size_t regions);

// Per-(region, technology) feature table. The categorical Region and
// Technology columns are held in `regions` / `techs`; `values` holds the
// numeric columns named by columns[2..].
struct FeatureMatrix {
  std::vector<std::string> columns;  // "Region", "Technology", numeric names...
  std::vector<std::string> regions;  // per row
  std::vector<std::string> techs;    // per row
  RowMatrixXd values;
  // Per numeric column (min, max); empty until normalized.
  std::vector<std::pair<double, double>> scaling;

  Eigen::Index rows() const { return values.rows(); }
  // Column count including the two categorical columns.
  Eigen::Index cols() const { return values.cols() + 2; }
  std::vector<std::string> numeric_columns() const { return {columns.begin() + 2, columns.end()}; }
  bool normalized() const { return !scaling.empty(); }

  bool operator==(const FeatureMatrix&) const = default;
};

// Rows region-major then technology; columns in the reference feature-vector
// order. Endpoint labels carry the horizon's first and last year.
FeatureMatrix assemble(const ScenarioData& scenario, BankKind bank);

// Per numeric column (v - min) / (max - min); constant columns map to 0.
FeatureMatrix minmax_normalize(const FeatureMatrix& m);
// Undo minmax_normalize using the recorded scaling.
FeatureMatrix minmax_inverse(const FeatureMatrix& m);

// Row-wise concatenation of matrices with identical columns.
FeatureMatrix vstack(std::span<const FeatureMatrix> parts);

// Learning design: each feature row repeated for every year, with one-hot
// Region_<id> / Technology_<id> blocks and a min-max scaled `year` column.
// Row (i, t) sits at i * |years| + t.
struct DesignMatrix {
  std::vector<std::string> columns;
  Eigen::MatrixXd X;
  std::vector<std::string> regions;  // per design row
  std::vector<std::string> techs;
  std::vector<int> years;
};

DesignMatrix encode_for_learning(const FeatureMatrix& m, std::span<const int> years,
                                 std::span<const std::string> region_ids,
                                 std::span<const std::string> tech_ids);

// CSV with the normative header plus `<stem>.scaling.json` when normalized.
void write_features(const FeatureMatrix& m, const std::filesystem::path& csv_path);
FeatureMatrix read_features(const std::filesystem::path& csv_path);

void write_design(const DesignMatrix& d, const std::filesystem::path& csv_path);

}  // namespace forge

#endif  // FORGE_FEATURES_HPP_
