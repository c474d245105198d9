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

#include "forge/similarity.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>

#include "forge/csv.hpp"
#include "forge/error.hpp"

namespace forge {

Eigen::MatrixXd zscore(const Eigen::MatrixXd& m) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(m.rows(), m.cols());
  if (m.rows() < 2) return out;
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    const auto col = m.col(j);
    if (col.minCoeff() == col.maxCoeff()) continue;
    const double mean = col.mean();
    const Eigen::VectorXd centered = col.array() - mean;
    const double sd = std::sqrt(centered.squaredNorm() / static_cast<double>(m.rows() - 1));
    out.col(j) = centered / sd;
  }
  return out;
}

std::optional<double> pearson(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) throw DimensionError("pearson", "vectors differ in length");
  if (u.size() < 2) throw InvalidArgument("pearson: need at least two values");
  const Eigen::Map<const Eigen::VectorXd> a(u.data(), static_cast<Eigen::Index>(u.size()));
  const Eigen::Map<const Eigen::VectorXd> b(v.data(), static_cast<Eigen::Index>(v.size()));
  if (a.minCoeff() == a.maxCoeff() || b.minCoeff() == b.maxCoeff()) return std::nullopt;
  const Eigen::VectorXd da = a.array() - a.mean();
  const Eigen::VectorXd db = b.array() - b.mean();
  const double denom = da.norm() * db.norm();
  if (!(denom > 0.0)) return std::nullopt;
  return std::clamp(da.dot(db) / denom, -1.0, 1.0);
}

CorrelationMatrix scenario_correlation(std::span<const NamedMatrix> matrices, std::vector<std::string>* warnings) {
  if (matrices.empty()) throw InvalidArgument("scenario_correlation: no matrices");
  const auto& first = matrices.front();
  std::vector<std::string> ids;
  std::vector<Eigen::VectorXd> vecs;
  for (const auto& m : matrices) {
    if (m.values.rows() != first.values.rows() || m.values.cols() != first.values.cols()) {
      throw DimensionError("scenario_correlation", "shape of " + m.id + " differs from " + first.id);
    }
    const Eigen::MatrixXd z = zscore(m.values);
    // Row-major vectorization.
    Eigen::VectorXd v(z.size());
    for (Eigen::Index i = 0; i < z.rows(); ++i) v.segment(i * z.cols(), z.cols()) = z.row(i).transpose();
    if (v.size() < 2 || v.minCoeff() == v.maxCoeff()) {
      if (warnings) warnings->push_back(m.id + ": constant standardized vector, correlation undefined; excluded");
      continue;
    }
    ids.push_back(m.id);
    vecs.push_back(std::move(v));
  }
  const auto n = static_cast<Eigen::Index>(ids.size());
  CorrelationMatrix c{ids, Eigen::MatrixXd::Identity(n, n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const auto r = pearson(std::span<const double>(vecs[i].data(), vecs[i].size()),
                             std::span<const double>(vecs[j].data(), vecs[j].size()));
      c.rho(i, j) = c.rho(j, i) = *r;
    }
  }
  return c;
}

Eigen::Index condensed_index(Eigen::Index n, Eigen::Index i, Eigen::Index j) {
  if (i > j) std::swap(i, j);
  return n * i - i * (i + 1) / 2 + (j - i - 1);
}

Eigen::Index condensed_size(Eigen::Index length) {
  Eigen::Index n = 1;
  while (n * (n - 1) / 2 < length) ++n;
  if (n * (n - 1) / 2 != length) {
    throw DimensionError("condensed", "length " + std::to_string(length) + " is not n(n-1)/2");
  }
  return n;
}

Eigen::VectorXd to_dissimilarity(const CorrelationMatrix& c) {
  const auto n = c.rho.rows();
  Eigen::VectorXd d(n * (n - 1) / 2);
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) d[k++] = std::clamp(1.0 - c.rho(i, j), 0.0, 2.0);
  }
  return d;
}

LinkageMatrix average_linkage(const Eigen::VectorXd& condensed) {
  const Eigen::Index n = condensed_size(condensed.size());
  if (n < 2) throw InvalidArgument("average_linkage: need at least two points");
  struct Cluster {
    int id;
    std::vector<int> members;  // ascending
  };
  std::vector<Cluster> active;
  for (int i = 0; i < n; ++i) active.push_back({i, {i}});

  auto distance = [&](const Cluster& x, const Cluster& y) {
    double sum = 0.0;
    for (int i : x.members) {
      for (int j : y.members) sum += condensed[condensed_index(n, i, j)];
    }
    return sum / (static_cast<double>(x.members.size()) * static_cast<double>(y.members.size()));
  };

  LinkageMatrix z;
  z.n = static_cast<int>(n);
  for (int step = 0; step + 1 < n; ++step) {
    double best = std::numeric_limits<double>::infinity();
    std::pair<int, int> best_ids{std::numeric_limits<int>::max(), std::numeric_limits<int>::max()};
    std::size_t bx = 0, by = 0;
    for (std::size_t x = 0; x < active.size(); ++x) {
      for (std::size_t y = x + 1; y < active.size(); ++y) {
        const double d = distance(active[x], active[y]);
        const std::pair<int, int> ids = std::minmax(active[x].id, active[y].id);
        if (d < best || (d == best && ids < best_ids)) {
          best = d;
          best_ids = ids;
          bx = x;
          by = y;
        }
      }
    }
    Cluster merged{static_cast<int>(n) + step, {}};
    std::merge(active[bx].members.begin(), active[bx].members.end(), active[by].members.begin(),
               active[by].members.end(), std::back_inserter(merged.members));
    z.merges.push_back({best_ids.first, best_ids.second, best, static_cast<int>(merged.members.size())});
    active.erase(active.begin() + static_cast<std::ptrdiff_t>(by));
    active.erase(active.begin() + static_cast<std::ptrdiff_t>(bx));
    active.push_back(std::move(merged));
  }
  return z;
}

std::vector<int> flat_clusters(const LinkageMatrix& z, double t) {
  if (!(t > 0.0)) throw InvalidArgument("flat_clusters: t must be positive");
  const int n = z.n;
  // Union-find over points; cluster id -> representative point.
  std::vector<int> parent(n);
  for (int i = 0; i < n; ++i) parent[i] = i;
  auto find = [&](int i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  std::vector<int> rep(2 * n - 1);
  for (int i = 0; i < n; ++i) rep[i] = i;
  for (std::size_t k = 0; k < z.merges.size(); ++k) {
    const auto& m = z.merges[k];
    rep[n + k] = rep[m.a];
    if (m.height <= t) parent[find(rep[m.b])] = find(rep[m.a]);
  }
  std::vector<int> labels(n, 0);
  std::map<int, int> dense;
  for (int i = 0; i < n; ++i) {
    const int root = find(i);
    const auto it = dense.try_emplace(root, static_cast<int>(dense.size()) + 1).first;
    labels[i] = it->second;
  }
  return labels;
}

ExtremalPairs extremal_pairs(const CorrelationMatrix& c) {
  const auto n = c.rho.rows();
  if (n < 2) throw InvalidArgument("extremal_pairs: need at least two scenarios");
  Eigen::Index mi = 0, mj = 1, li = 0, lj = 1;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      if (c.rho(i, j) > c.rho(mi, mj)) mi = i, mj = j;
      if (c.rho(i, j) < c.rho(li, lj)) li = i, lj = j;
    }
  }
  return {{c.ids[mj], c.ids[mi]}, c.rho(mi, mj), {c.ids[lj], c.ids[li]}, c.rho(li, lj)};
}

std::string format_extremal(const ExtremalPairs& p) {
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "Most similar scenarios: ('%s', '%s') with correlation %.4f\n"
                "Least similar scenarios: ('%s', '%s') with correlation %.4f\n",
                p.most.first.c_str(), p.most.second.c_str(), p.most_rho, p.least.first.c_str(),
                p.least.second.c_str(), p.least_rho);
  return buf;
}

double intra_cluster_mean(const CorrelationMatrix& c, std::span<const int> labels, int k) {
  if (static_cast<Eigen::Index>(labels.size()) != c.rho.rows()) {
    throw DimensionError("labels", "one label per scenario required");
  }
  std::vector<Eigen::Index> members;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == k) members.push_back(static_cast<Eigen::Index>(i));
  }
  if (members.empty()) throw InvalidArgument("intra_cluster_mean: cluster " + std::to_string(k) + " is empty");
  double sum = 0.0;
  for (auto i : members) {
    for (auto j : members) sum += c.rho(i, j);
  }
  const auto m = static_cast<double>(members.size());
  return sum / (m * m);
}

void write_correlation(const CorrelationMatrix& c, const std::filesystem::path& path) {
  csv::Table t;
  t.header = {"id"};
  t.header.insert(t.header.end(), c.ids.begin(), c.ids.end());
  for (std::size_t i = 0; i < c.ids.size(); ++i) {
    std::vector<std::string> row = {c.ids[i]};
    for (std::size_t j = 0; j < c.ids.size(); ++j) row.push_back(csv::format(c.rho(i, j)));
    t.rows.push_back(std::move(row));
  }
  csv::write(path, t);
}

CorrelationMatrix read_correlation(const std::filesystem::path& path) {
  const auto t = csv::read(path);
  CorrelationMatrix c;
  c.ids.assign(t.header.begin() + 1, t.header.end());
  const auto n = static_cast<Eigen::Index>(c.ids.size());
  if (static_cast<Eigen::Index>(t.rows.size()) != n) throw DimensionError("correlation", "matrix is not square");
  c.rho.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) c.rho(i, j) = csv::parse_double(t.rows[i][j + 1]);
  }
  return c;
}

void write_linkage(const LinkageMatrix& z, const std::filesystem::path& path) {
  csv::Table t;
  t.header = {"a", "b", "height", "size"};
  for (const auto& m : z.merges) {
    t.rows.push_back({std::to_string(m.a), std::to_string(m.b), csv::format(m.height), std::to_string(m.size)});
  }
  csv::write(path, t);
}

void write_labels(std::span<const std::string> ids, std::span<const int> labels, const std::filesystem::path& path) {
  csv::Table t;
  t.header = {"id", "label"};
  for (std::size_t i = 0; i < ids.size(); ++i) t.rows.push_back({ids[i], std::to_string(labels[i])});
  csv::write(path, t);
}

}  // namespace forge
