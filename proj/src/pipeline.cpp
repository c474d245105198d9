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

#include "forge/pipeline.hpp"

#include <fstream>
#include <set>

#include "forge/checksum.hpp"
#include "forge/csv.hpp"
#include "forge/error.hpp"

namespace forge {
namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;

void write_json(const fs::path& path, const json& doc) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << doc.dump(2) << '\n';
}

json read_json(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

void write_text(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
}

void write_step(const fs::path& run, const std::string& step, const json& params,
                const std::vector<fs::path>& outputs) {
  json sums = json::object();
  for (const auto& p : outputs) sums[fs::relative(p, run).generic_string()] = sha256_file(p);
  write_json(run / "steps" / (step + ".json"), {{"schema", 1}, {"step", step}, {"params", params}, {"outputs", sums}});
}

std::vector<fs::path> files_under(const fs::path& dir) {
  std::vector<fs::path> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

const std::vector<std::string>& techs_of(const SetsSpec& s, BankKind kind) {
  return kind == BankKind::kFm ? s.fm_techs : s.agri_techs;
}

json metrics_json(const RegressionMetrics& m) { return {{"rmse", m.rmse}, {"r2", m.r2}}; }

}  // namespace

std::string default_target(BankKind kind) { return kind == BankKind::kFm ? "capFMs" : "capAgri"; }

LearningSet build_learning_set(const ScenarioBank& bank, const OutputsMap& outputs, std::string_view target) {
  const auto& sets = bank.baseline.sets;
  const auto& techs = techs_of(sets, bank.kind);
  const Layout want = bank.kind == BankKind::kFm ? Layout::kYearFmRegion : Layout::kYearAgriRegion;
  const auto ids = bank.ids();
  std::vector<FeatureMatrix> parts;
  for (const auto& id : ids) parts.push_back(assemble(bank.materialized.at(id), bank.kind));

  LearningSet ls;
  ls.target = std::string(target);
  ls.design = encode_for_learning(minmax_normalize(vstack(parts)), sets.years, sets.regions, techs);
  ls.y.resize(ls.design.X.rows());
  const auto nt = static_cast<int>(sets.years.size());
  const auto nk = static_cast<int>(techs.size());
  Eigen::Index row = 0;
  for (std::size_t s = 0; s < ids.size(); ++s) {
    const auto it = outputs.find(ids[s]);
    if (it == outputs.end()) throw InvalidArgument("learning set: no outputs for scenario " + ids[s]);
    const auto tensor = output_tensor(it->second, target);
    if (tensor.layout != want) {
      throw InvalidArgument("learning set: target '" + std::string(target) + "' does not match the " +
                            std::string(bank_name(bank.kind)) + " bank");
    }
    for (Eigen::Index i = 0; i < parts[s].rows(); ++i) {
      const int r = sets.region_index(parts[s].regions[i]);
      const int k = static_cast<int>(std::find(techs.begin(), techs.end(), parts[s].techs[i]) - techs.begin());
      for (int t = 0; t < nt; ++t) {
        ls.y[row++] = tensor.values[offset3(sets, t, k, r, nk)];
        ls.scenario_ids.push_back(ids[s]);
      }
    }
  }
  return ls;
}

std::string_view space_name(Space s) { return s == Space::kInput ? "input" : "output"; }

Space parse_space(std::string_view text) {
  if (text == "input") return Space::kInput;
  if (text == "output") return Space::kOutput;
  throw InvalidArgument("space must be 'input' or 'output', got '" + std::string(text) + "'");
}

std::string default_output(BankKind kind) { return kind == BankKind::kFm ? "ghgAbateFMs" : "costTechAgri"; }

std::vector<NamedMatrix> input_matrices(const ScenarioBank& bank) {
  std::vector<NamedMatrix> out;
  for (const auto& id : bank.ids()) out.push_back({id, assemble(bank.materialized.at(id), bank.kind).values});
  return out;
}

std::vector<NamedMatrix> output_matrices(const ScenarioBank& bank, const OutputsMap& outputs, std::string_view name) {
  const auto& s = bank.baseline.sets;
  const auto nt = static_cast<Eigen::Index>(s.years.size());
  std::vector<NamedMatrix> out;
  for (const auto& id : bank.ids()) {
    const auto it = outputs.find(id);
    if (it == outputs.end()) throw InvalidArgument("output space: no outputs for scenario " + id);
    const auto tensor = output_tensor(it->second, name);
    const auto cols = tensor.values.size() / nt;
    using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    out.push_back({id, Eigen::Map<const RowMajor>(tensor.values.data(), nt, cols)});
  }
  return out;
}

ClusterAnalysis analyze_clusters(std::span<const NamedMatrix> matrices, Space space, std::string source, double t) {
  ClusterAnalysis a;
  a.space = space;
  a.source = std::move(source);
  a.t = t;
  a.correlation = scenario_correlation(matrices, &a.warnings);
  a.linkage = average_linkage(to_dissimilarity(a.correlation));
  a.labels = flat_clusters(a.linkage, t);
  a.extremal = extremal_pairs(a.correlation);
  return a;
}

json to_json(const ClusterAnalysis& a) {
  json rho = json::array();
  for (Eigen::Index i = 0; i < a.correlation.rho.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < a.correlation.rho.cols(); ++j) row.push_back(a.correlation.rho(i, j));
    rho.push_back(std::move(row));
  }
  json merges = json::array();
  for (const auto& m : a.linkage.merges) merges.push_back({m.a, m.b, m.height, m.size});
  return {{"space", space_name(a.space)},
          {"source", a.source},
          {"t", a.t},
          {"ids", a.correlation.ids},
          {"correlation", rho},
          {"linkage", merges},
          {"labels", a.labels},
          {"extremal",
           {{"most", {a.extremal.most.first, a.extremal.most.second}},
            {"most_rho", a.extremal.most_rho},
            {"least", {a.extremal.least.first, a.extremal.least.second}},
            {"least_rho", a.extremal.least_rho}}},
          {"warnings", a.warnings}};
}

Eigen::MatrixXd select_rows(const Eigen::MatrixXd& X, std::span<const int> rows) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), X.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = X.row(rows[i]);
  return out;
}

Eigen::VectorXd select_rows(const Eigen::VectorXd& y, std::span<const int> rows) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) out[static_cast<Eigen::Index>(i)] = y[rows[i]];
  return out;
}

TrainedSurrogate train_surrogate(const LearningSet& ls, const EnsembleConfig& config, double test_share) {
  TrainedSurrogate out;
  out.split = train_test_split(static_cast<int>(ls.y.size()), test_share, config.seed);
  const auto X_train = select_rows(ls.design.X, out.split.train);
  const auto y_train = select_rows(ls.y, out.split.train);
  out.ensemble = fit_ensemble(X_train, y_train, config, ls.design.columns);
  out.train = evaluate(y_train, predict(out.ensemble, X_train));
  out.test = evaluate(select_rows(ls.y, out.split.test), predict(out.ensemble, select_rows(ls.design.X, out.split.test)));
  return out;
}

std::pair<std::string, std::string> leading_region_tech(const LearningSet& ls, std::span<const int> rows,
                                                        const Eigen::VectorXd& values) {
  if (rows.empty() || static_cast<Eigen::Index>(rows.size()) != values.size()) {
    throw DimensionError("values", "one value per selected row required");
  }
  std::map<std::string, std::pair<double, int>> by_region, by_tech;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto& r = by_region[ls.design.regions[rows[i]]];
    r.first += values[static_cast<Eigen::Index>(i)], ++r.second;
    auto& t = by_tech[ls.design.techs[rows[i]]];
    t.first += values[static_cast<Eigen::Index>(i)], ++t.second;
  }
  auto best = [](const auto& groups) {
    std::string id;
    double top = -INFINITY;
    for (const auto& [k, v] : groups) {
      const double mean = v.first / v.second;
      if (mean > top) top = mean, id = k;
    }
    return id;
  };
  return {best(by_region), best(by_tech)};
}

Config Config::load(const fs::path& path) {
  const auto doc = read_json(path);
  Config c;
  c.eps = doc.value("eps", c.eps);
  c.cluster_threshold = doc.value("cluster_threshold", c.cluster_threshold);
  c.cors_origin = doc.value("cors_origin", c.cors_origin);
  if (doc.contains("parameter_map")) c.parameter_map = doc.at("parameter_map");
  if (!(c.eps > 0.0)) throw InvalidArgument("config: eps must be positive");
  if (!(c.cluster_threshold > 0.0)) throw InvalidArgument("config: cluster_threshold must be positive");
  if (doc.contains("api_key") || doc.contains("endpoint")) {
    throw InvalidArgument("config: llm credentials and endpoints are taken from environment variables only");
  }
  if (doc.contains("llm")) {
    const auto& l = doc.at("llm");
    if (l.contains("api_key") || l.contains("endpoint")) {
      throw InvalidArgument("config: llm credentials and endpoints are taken from environment variables only");
    }
    c.llm.model = l.value("model", c.llm.model);
    c.llm.api_key_env = l.value("api_key_env", c.llm.api_key_env);
    c.llm.timeout_s = l.value("timeout_s", c.llm.timeout_s);
    c.llm.max_retries = l.value("max_retries", c.llm.max_retries);
    c.llm.max_in_flight = l.value("max_in_flight", c.llm.max_in_flight);
  }
  c.map();  // reject bad patterns early
  return c;
}

ParameterMap Config::map() const {
  auto m = ParameterMap::builtin();
  if (!parameter_map.empty()) m.extend(parameter_map);
  return m;
}

void step_bank_generate(BankKind kind, const SetsSpec& sets, std::uint64_t seed, const fs::path& run) {
  if (fs::exists(run / "manifest.json")) throw InvalidArgument(run.string() + " already holds a bank");
  const auto bank = ScenarioBank::make(kind, synthesize_baseline(sets, seed));
  save_bank(bank, run);
  write_step(run, "bank_generate", {{"bank", bank_name(kind)}, {"seed", seed}}, {run / "manifest.json"});
}

ScenarioBank load_run_bank(const fs::path& run) { return load_bank(run); }

void step_bank_run(const fs::path& run, int workers) {
  const auto bank = load_run_bank(run);
  const auto outputs = run_bank(bank, workers);
  std::vector<fs::path> written;
  for (const auto& [id, out] : outputs) {
    const auto dir = run / id / "outputs";
    save_outputs(bank.materialized.at(id), out, dir);
    for (const auto& f : files_under(dir)) written.push_back(f);
  }
  write_step(run, "bank_run", json::object(), written);
}

OutputsMap load_run_outputs(const fs::path& run, const ScenarioBank& bank) {
  OutputsMap out;
  for (const auto& id : bank.ids()) {
    const auto dir = run / id / "outputs";
    if (!fs::exists(dir)) throw IoError("no outputs for " + id + "; run 'bank run' first");
    out.emplace(id, load_outputs(bank.materialized.at(id), dir));
  }
  return out;
}

void step_features(const fs::path& run) {
  const auto bank = load_run_bank(run);
  const auto& sets = bank.baseline.sets;
  const auto dir = run / "features";
  std::vector<FeatureMatrix> parts;
  for (const auto& id : bank.ids()) {
    parts.push_back(assemble(bank.materialized.at(id), bank.kind));
    write_features(parts.back(), dir / (id + ".csv"));
  }
  const auto pooled = minmax_normalize(vstack(parts));
  write_features(pooled, dir / "pooled.csv");
  write_design(encode_for_learning(pooled, sets.years, sets.regions, techs_of(sets, bank.kind)), dir / "design.csv");
  write_step(run, "features", json::object(), files_under(dir));
}

ClusterAnalysis step_cluster(const fs::path& run, Space space, double t) {
  const auto bank = load_run_bank(run);
  ClusterAnalysis a;
  if (space == Space::kInput) {
    a = analyze_clusters(input_matrices(bank), space, "features", t);
  } else {
    const auto name = default_output(bank.kind);
    a = analyze_clusters(output_matrices(bank, load_run_outputs(run, bank), name), space, name, t);
  }
  const auto dir = run / "clusters" / std::string(space_name(space));
  write_correlation(a.correlation, dir / "correlation.csv");
  write_linkage(a.linkage, dir / "linkage.csv");
  write_labels(a.correlation.ids, a.labels, dir / "labels.csv");
  write_text(dir / "extremal.txt", format_extremal(a.extremal));
  write_json(dir / "analysis.json", to_json(a));
  write_step(run, "cluster_" + std::string(space_name(space)), {{"t", t}}, files_under(dir));
  return a;
}

ClusterAnalysis load_clusters(const fs::path& run, Space space) {
  const auto path = run / "clusters" / std::string(space_name(space)) / "analysis.json";
  if (!fs::exists(path)) {
    throw IoError("no " + std::string(space_name(space)) + "-space clusters; run 'cluster' first");
  }
  const auto doc = read_json(path);
  ClusterAnalysis a;
  a.space = space;
  a.source = doc.at("source").get<std::string>();
  a.t = doc.at("t").get<double>();
  a.correlation.ids = doc.at("ids").get<std::vector<std::string>>();
  const auto n = static_cast<Eigen::Index>(a.correlation.ids.size());
  a.correlation.rho.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) a.correlation.rho(i, j) = doc.at("correlation").at(i).at(j).get<double>();
  }
  a.linkage.n = static_cast<int>(n);
  for (const auto& m : doc.at("linkage")) {
    a.linkage.merges.push_back({m.at(0).get<int>(), m.at(1).get<int>(), m.at(2).get<double>(), m.at(3).get<int>()});
  }
  a.labels = doc.at("labels").get<std::vector<int>>();
  const auto& e = doc.at("extremal");
  a.extremal.most = {e.at("most").at(0).get<std::string>(), e.at("most").at(1).get<std::string>()};
  a.extremal.least = {e.at("least").at(0).get<std::string>(), e.at("least").at(1).get<std::string>()};
  a.extremal.most_rho = e.at("most_rho").get<double>();
  a.extremal.least_rho = e.at("least_rho").get<double>();
  a.warnings = doc.at("warnings").get<std::vector<std::string>>();
  return a;
}

TrainedSurrogate step_train(const fs::path& run, const std::string& target, const EnsembleConfig& config) {
  const auto bank = load_run_bank(run);
  const auto ls = build_learning_set(bank, load_run_outputs(run, bank), target);
  auto tr = train_surrogate(ls, config);
  const auto dir = run / "model";
  save_ensemble(tr.ensemble, dir / "ensemble.json");
  write_json(dir / "metrics.json", {{"target", target},
                                    {"rmse", tr.test.rmse},
                                    {"r2", tr.test.r2},
                                    {"train", metrics_json(tr.train)},
                                    {"n_train", tr.split.train.size()},
                                    {"n_test", tr.split.test.size()},
                                    {"target_min", tr.ensemble.y_min},
                                    {"target_max", tr.ensemble.y_max}});
  write_json(dir / "split.json", {{"test_share", kTestShare}, {"train", tr.split.train}, {"test", tr.split.test}});
  write_step(run, "train",
             {{"target", target},
              {"n_folds", config.n_folds},
              {"trees_per_forest", config.trees_per_forest},
              {"seed", config.seed}},
             files_under(dir));
  return tr;
}

GlobalImportance step_shap(const fs::path& run, const ShapOptions& options, int top_k) {
  const auto dir = run / "model";
  const auto ensemble = load_ensemble(dir / "ensemble.json");
  const auto metrics = read_json(dir / "metrics.json");
  const auto split = read_json(dir / "split.json");
  const auto train = split.at("train").get<std::vector<int>>();
  const auto test = split.at("test").get<std::vector<int>>();
  const auto bank = load_run_bank(run);
  const auto ls = build_learning_set(bank, load_run_outputs(run, bank), metrics.at("target").get<std::string>());

  const auto A = ensemble_shap(ensemble, select_rows(ls.design.X, test), select_rows(ls.design.X, train), options);
  const auto G = global_importance(A);
  const int k = std::min<int>(top_k, static_cast<int>(G.ranking.size()));
  const auto drivers = shap_prompt_payload(G, A, k);
  std::vector<int> rows;
  for (int i : A.sample_ids) rows.push_back(test[i]);
  const auto [region, tech] = leading_region_tech(ls, rows, A.prediction);

  const auto out = run / "shap";
  write_attributions(A, out / "attributions.csv");
  write_importance(G, out / "importance.csv");
  json d = json::array();
  for (const auto& x : drivers) {
    d.push_back({{"feature", x.feature}, {"magnitude", x.magnitude}, {"sign", x.sign}, {"mean_value", x.mean_value}});
  }
  write_json(out / "drivers.json", {{"target", ls.target},
                                    {"phi0", A.phi0},
                                    {"drivers", d},
                                    {"best_region", region},
                                    {"best_tech", tech}});
  write_step(run, "shap",
             {{"subsamples", options.subsamples}, {"subsample_size", options.subsample_size}, {"seed", options.seed},
              {"top_k", top_k}},
             files_under(out));
  return G;
}

std::optional<PromptExtras> load_extras(const fs::path& run) {
  const auto metrics_path = run / "model" / "metrics.json";
  const auto drivers_path = run / "shap" / "drivers.json";
  if (!fs::exists(metrics_path) || !fs::exists(drivers_path)) return std::nullopt;
  const auto m = read_json(metrics_path);
  const auto d = read_json(drivers_path);
  PromptExtras e;
  e.target = d.at("target").get<std::string>();
  e.metrics = RegressionMetrics{m.at("rmse").get<double>(), m.at("r2").get<double>()};
  for (const auto& x : d.at("drivers")) {
    e.drivers.push_back({x.at("feature").get<std::string>(), x.at("magnitude").get<double>(), x.at("sign").get<int>(),
                         x.at("mean_value").get<double>()});
  }
  e.best_region = d.at("best_region").get<std::string>();
  e.best_tech = d.at("best_tech").get<std::string>();
  return e;
}

AskResult step_ask(const fs::path& run, const std::string& question, Space space, bool with_shap,
                   const Config& config, LlmClient& client) {
  const auto bank = load_run_bank(run);
  const auto clusters = load_clusters(run, space);
  const auto map = config.map();
  std::optional<PromptExtras> extras;
  if (with_shap) {
    extras = load_extras(run);
    if (!extras) throw IoError("no model metrics or SHAP drivers; run 'train' and 'shap' first");
  }
  AskContext ctx;
  ctx.bank = bank.kind;
  ctx.recipes = bank.recipes;
  ctx.correlation = &clusters.correlation;
  ctx.labels = clusters.labels;
  ctx.map = &map;
  ctx.eps = config.eps;
  ctx.extras = extras ? &*extras : nullptr;
  auto r = ask(question, ctx, client);
  const auto dir = run / "ask" / r.narrative.provenance.prompt_hash.substr(0, 16);
  write_text(dir / "prompt.txt", r.prompt);
  write_text(dir / "narrative.txt", r.narrative.text);
  write_json(dir / "answer.json", to_json(r));
  write_step(run, "ask_" + r.narrative.provenance.prompt_hash.substr(0, 16),
             {{"question", question}, {"space", space_name(space)}, {"with_shap", with_shap}, {"eps", config.eps}},
             files_under(dir));
  return r;
}

}  // namespace forge
