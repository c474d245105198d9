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

#include "forge/features.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "forge/csv.hpp"
#include "forge/error.hpp"
#include "json.hpp"

namespace forge {
namespace {

using json = nlohmann::json;

void add_trend_names(std::vector<std::string>& cols, const std::string& stem, const SetsSpec& s) {
  cols.push_back(stem + "_" + std::to_string(s.first_year()));
  cols.push_back(stem + "_" + std::to_string(s.last_year()));
  cols.push_back(stem + "_Slope");
}

void put(RowMatrixXd& m, Eigen::Index row, Eigen::Index& col, const TrendTriple& tr) {
  m(row, col++) = tr.initial;
  m(row, col++) = tr.final;
  m(row, col++) = tr.slope;
}

// Series of a (t, k, r) tensor for fixed (k, r).
std::vector<double> series3(const ScenarioData& d, std::string_view name, int k, int r, int nk) {
  const auto& v = d.tensor(name).values;
  std::vector<double> out(d.sets.years.size());
  for (std::size_t t = 0; t < out.size(); ++t) out[t] = v[offset3(d.sets, static_cast<int>(t), k, r, nk)];
  return out;
}

std::vector<double> series_tr(const ScenarioData& d, std::string_view name, int r) {
  const auto& v = d.tensor(name).values;
  const auto nr = d.sets.regions.size();
  std::vector<double> out(d.sets.years.size());
  for (std::size_t t = 0; t < out.size(); ++t) out[t] = v[t * nr + r];
  return out;
}

std::vector<double> series_t(const ScenarioData& d, std::string_view name) {
  const auto& v = d.tensor(name).values;
  return {v.data(), v.data() + v.size()};
}

std::filesystem::path sidecar(const std::filesystem::path& csv_path) {
  auto p = csv_path;
  p.replace_extension(".scaling.json");
  return p;
}

}  // namespace

TrendTriple trend(std::span<const int> years, std::span<const double> values) {
  if (years.size() != values.size()) throw InvalidArgument("trend: years and values differ in length");
  if (years.size() < 2) throw InvalidArgument("trend: need at least two points");
  if (std::set<int>(years.begin(), years.end()).size() != years.size()) {
    throw InvalidArgument("trend: years must be distinct");
  }
  const auto n = static_cast<double>(years.size());
  TrendTriple out{values.front(), values.back(), 0.0};
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  if (*lo == *hi) return out;
  double tbar = 0.0, ybar = 0.0;
  for (std::size_t i = 0; i < years.size(); ++i) {
    tbar += years[i];
    ybar += values[i];
  }
  tbar /= n;
  ybar /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < years.size(); ++i) {
    const double dt = years[i] - tbar;
    sxy += dt * (values[i] - ybar);
    sxx += dt * dt;
  }
  out.slope = sxy / sxx;
  return out;
}

std::vector<TrendTriple> broadcast_global(const TrendTriple& triple, std::size_t regions) {
  return std::vector<TrendTriple>(regions, triple);
}

FeatureMatrix assemble(const ScenarioData& d, BankKind bank) {
  const auto& s = d.sets;
  const int nr = static_cast<int>(s.regions.size());
  const std::span<const int> years(s.years);
  auto tr = [&](const std::vector<double>& v) { return trend(years, v); };

  FeatureMatrix m;
  m.columns = {"Region", "Technology"};
  if (bank == BankKind::kFm) {
    const int nf = static_cast<int>(s.fm_techs.size());
    for (const char* stem : {"CostMarg", "CostInv", "CostInvLevel", "GHG", "ForestGrowth", "CO2", "GHGTarget"}) {
      add_trend_names(m.columns, stem, s);
    }
    m.columns.push_back("InitialBeechArea");
    m.columns.push_back("InitialGrassArea");
    m.values.resize(static_cast<Eigen::Index>(nr) * nf, static_cast<Eigen::Index>(m.columns.size()) - 2);
    const auto co2 = broadcast_global(tr(series_t(d, param::kCo2Price)), s.regions.size());
    const auto target = broadcast_global(tr(series_t(d, param::kGhgTarget)), s.regions.size());
    for (int r = 0; r < nr; ++r) {
      for (int f = 0; f < nf; ++f) {
        const Eigen::Index row = static_cast<Eigen::Index>(r) * nf + f;
        m.regions.push_back(s.regions[r]);
        m.techs.push_back(s.fm_techs[f]);
        Eigen::Index c = 0;
        put(m.values, row, c, tr(series3(d, param::kCostMargFm, f, r, nf)));
        put(m.values, row, c, tr(series3(d, param::kCostInvFm, f, r, nf)));
        put(m.values, row, c, tr(series3(d, param::kCostInvLevelFm, f, r, nf)));
        put(m.values, row, c, tr(series3(d, param::kGhgFm, f, r, nf)));
        put(m.values, row, c, tr(series3(d, param::kFmGrowth, f, r, nf)));
        put(m.values, row, c, co2[r]);
        put(m.values, row, c, target[r]);
        m.values(row, c++) = d.region(param::kBeechArea0, r);
        m.values(row, c++) = d.region(param::kGrassArea0, r);
      }
    }
  } else {
    const int na = static_cast<int>(s.agri_techs.size());
    for (const char* stem :
         {"CostMargAgri", "CostInvAgri", "CostInvLevAgri", "GHGAgri", "AgriGrowth", "Peat_Extraction"}) {
      add_trend_names(m.columns, stem, s);
    }
    m.columns.push_back("Agriarea0");
    m.values.resize(static_cast<Eigen::Index>(nr) * na, static_cast<Eigen::Index>(m.columns.size()) - 2);
    for (int r = 0; r < nr; ++r) {
      const auto peat = tr(series_tr(d, param::kPeatExtract, r));
      for (int a = 0; a < na; ++a) {
        const Eigen::Index row = static_cast<Eigen::Index>(r) * na + a;
        m.regions.push_back(s.regions[r]);
        m.techs.push_back(s.agri_techs[a]);
        Eigen::Index c = 0;
        put(m.values, row, c, tr(series3(d, param::kCostMargAgri, a, r, na)));
        put(m.values, row, c, tr(series3(d, param::kCostInvAgri, a, r, na)));
        put(m.values, row, c, tr(series3(d, param::kCostInvLevelAgri, a, r, na)));
        put(m.values, row, c, tr(series3(d, param::kGhgAgri, a, r, na)));
        put(m.values, row, c, tr(series3(d, param::kAgriGrowth, a, r, na)));
        put(m.values, row, c, peat);
        m.values(row, c++) = d.region(param::kAgriArea0, r);
      }
    }
  }
  return m;
}

FeatureMatrix minmax_normalize(const FeatureMatrix& m) {
  FeatureMatrix out = m;
  out.scaling.clear();
  for (Eigen::Index j = 0; j < m.values.cols(); ++j) {
    const double lo = m.values.col(j).minCoeff();
    const double hi = m.values.col(j).maxCoeff();
    out.scaling.emplace_back(lo, hi);
    if (hi > lo) {
      out.values.col(j) = (m.values.col(j).array() - lo) / (hi - lo);
    } else {
      out.values.col(j).setZero();
    }
  }
  return out;
}

FeatureMatrix minmax_inverse(const FeatureMatrix& m) {
  if (!m.normalized()) throw InvalidArgument("minmax_inverse: matrix carries no scaling");
  FeatureMatrix out = m;
  for (Eigen::Index j = 0; j < m.values.cols(); ++j) {
    const auto [lo, hi] = m.scaling[j];
    out.values.col(j) = m.values.col(j).array() * (hi - lo) + lo;
  }
  out.scaling.clear();
  return out;
}

FeatureMatrix vstack(std::span<const FeatureMatrix> parts) {
  if (parts.empty()) throw InvalidArgument("vstack: nothing to stack");
  FeatureMatrix out;
  out.columns = parts.front().columns;
  Eigen::Index rows = 0;
  for (const auto& p : parts) {
    if (p.columns != out.columns) throw DimensionError("features", "vstack over differing columns");
    rows += p.rows();
  }
  out.values.resize(rows, parts.front().values.cols());
  Eigen::Index at = 0;
  for (const auto& p : parts) {
    out.values.middleRows(at, p.rows()) = p.values;
    out.regions.insert(out.regions.end(), p.regions.begin(), p.regions.end());
    out.techs.insert(out.techs.end(), p.techs.begin(), p.techs.end());
    at += p.rows();
  }
  return out;
}

DesignMatrix encode_for_learning(const FeatureMatrix& m, std::span<const int> years,
                                 std::span<const std::string> region_ids,
                                 std::span<const std::string> tech_ids) {
  if (years.empty()) throw InvalidArgument("encode_for_learning: no years");
  DesignMatrix d;
  d.columns = m.numeric_columns();
  const auto p = static_cast<Eigen::Index>(d.columns.size());
  for (const auto& r : region_ids) d.columns.push_back("Region_" + r);
  for (const auto& t : tech_ids) d.columns.push_back("Technology_" + t);
  d.columns.push_back("year");
  const auto nt = static_cast<Eigen::Index>(years.size());
  const auto nreg = static_cast<Eigen::Index>(region_ids.size());
  d.X = Eigen::MatrixXd::Zero(m.rows() * nt, static_cast<Eigen::Index>(d.columns.size()));
  const auto [ylo, yhi] = std::minmax_element(years.begin(), years.end());
  const double span = *yhi - *ylo;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    const auto rit = std::find(region_ids.begin(), region_ids.end(), m.regions[i]);
    const auto tit = std::find(tech_ids.begin(), tech_ids.end(), m.techs[i]);
    if (rit == region_ids.end() || tit == tech_ids.end()) {
      throw DimensionError("features", "row " + m.regions[i] + "/" + m.techs[i] + " outside the one-hot vocabulary");
    }
    for (Eigen::Index t = 0; t < nt; ++t) {
      const Eigen::Index row = i * nt + t;
      d.X.row(row).head(p) = m.values.row(i);
      d.X(row, p + (rit - region_ids.begin())) = 1.0;
      d.X(row, p + nreg + (tit - tech_ids.begin())) = 1.0;
      d.X(row, d.X.cols() - 1) = span > 0 ? (years[t] - *ylo) / span : 0.0;
      d.regions.push_back(m.regions[i]);
      d.techs.push_back(m.techs[i]);
      d.years.push_back(years[t]);
    }
  }
  return d;
}

void write_features(const FeatureMatrix& m, const std::filesystem::path& csv_path) {
  csv::Table table;
  table.header = m.columns;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    std::vector<std::string> row = {m.regions[i], m.techs[i]};
    for (Eigen::Index j = 0; j < m.values.cols(); ++j) row.push_back(csv::format(m.values(i, j)));
    table.rows.push_back(std::move(row));
  }
  csv::write(csv_path, table);
  const auto side = sidecar(csv_path);
  if (m.normalized()) {
    json doc = {{"schema", 1}, {"columns", m.numeric_columns()}, {"min", json::array()}, {"max", json::array()}};
    for (const auto& [lo, hi] : m.scaling) {
      doc["min"].push_back(lo);
      doc["max"].push_back(hi);
    }
    std::ofstream out(side, std::ios::trunc);
    if (!out) throw IoError("cannot write " + side.string());
    out << doc.dump(2) << '\n';
  } else if (std::filesystem::exists(side)) {
    std::filesystem::remove(side);
  }
}

FeatureMatrix read_features(const std::filesystem::path& csv_path) {
  const auto table = csv::read(csv_path);
  if (table.header.size() < 2 || table.header[0] != "Region" || table.header[1] != "Technology") {
    throw IoError(csv_path.string() + ": expected Region,Technology leading columns");
  }
  FeatureMatrix m;
  m.columns = table.header;
  m.values.resize(static_cast<Eigen::Index>(table.rows.size()), static_cast<Eigen::Index>(table.header.size()) - 2);
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& row = table.rows[i];
    m.regions.push_back(row[0]);
    m.techs.push_back(row[1]);
    for (std::size_t j = 2; j < row.size(); ++j) m.values(i, j - 2) = csv::parse_double(row[j]);
  }
  const auto side = sidecar(csv_path);
  if (std::filesystem::exists(side)) {
    std::ifstream in(side);
    const json doc = json::parse(in);
    const auto lo = doc.at("min").get<std::vector<double>>();
    const auto hi = doc.at("max").get<std::vector<double>>();
    if (lo.size() != static_cast<std::size_t>(m.values.cols()) || hi.size() != lo.size()) {
      throw DimensionError("scaling", "sidecar column count differs from the CSV");
    }
    for (std::size_t j = 0; j < lo.size(); ++j) m.scaling.emplace_back(lo[j], hi[j]);
  }
  return m;
}

void write_design(const DesignMatrix& d, const std::filesystem::path& csv_path) {
  csv::Table table;
  table.header = d.columns;
  for (Eigen::Index i = 0; i < d.X.rows(); ++i) {
    std::vector<std::string> row;
    row.reserve(d.X.cols());
    for (Eigen::Index j = 0; j < d.X.cols(); ++j) row.push_back(csv::format(d.X(i, j)));
    table.rows.push_back(std::move(row));
  }
  csv::write(csv_path, table);
}

}  // namespace forge
