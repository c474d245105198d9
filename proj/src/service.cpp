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

#include "forge/service.hpp"

#include <charconv>
#include <fstream>
#include <cmath>
#include <iostream>

#include "forge/checksum.hpp"
#include "forge/error.hpp"
#include "httplib.h"

namespace forge {
namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;

// A malformed request field; becomes a 400 with a field-level message.
struct FieldError {
  std::string field;
  std::string message;
};

ApiResponse ok(json data, json provenance) {
  return {200,
          {{"status", "ok"}, {"data", std::move(data)}, {"provenance", std::move(provenance)},
           {"schema_version", kSchemaVersion}}};
}

ApiResponse fail(int status, const std::string& code, const std::string& message, json fields = json::array()) {
  return {status,
          {{"status", "error"},
           {"error", {{"code", code}, {"message", message}, {"fields", std::move(fields)}}},
           {"provenance", json::object()},
           {"schema_version", kSchemaVersion}}};
}

json provenance(const LoadedRun& run, bool with_model = false) {
  json p = {{"run_id", run.manifest_sha256.substr(0, 16)},
            {"bank", bank_name(run.bank.kind)},
            {"inputs", {{"manifest", run.manifest_sha256}}}};
  if (with_model) p["model"] = run.ensemble_sha256;
  return p;
}

std::optional<std::string> query_value(const QueryParams& q, const std::string& key) {
  const auto it = q.find(key);
  if (it == q.end()) return std::nullopt;
  return it->second;
}

double parse_t(const std::string& text) {
  double v = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v) || v <= 0.0) {
    throw FieldError{"t", "expected a positive number, got '" + text + "'"};
  }
  return v;
}

Eigen::MatrixXd parse_rows(const json& body, int n_features) {
  if (!body.contains("rows")) throw FieldError{"rows", "required"};
  const auto& rows = body.at("rows");
  if (!rows.is_array() || rows.empty()) throw FieldError{"rows", "expected a non-empty array of rows"};
  Eigen::MatrixXd X(static_cast<Eigen::Index>(rows.size()), n_features);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const std::string field = "rows[" + std::to_string(i) + "]";
    const auto& r = rows[i];
    if (!r.is_array() || static_cast<int>(r.size()) != n_features) {
      throw FieldError{field, "expected an array of " + std::to_string(n_features) + " numbers"};
    }
    for (int j = 0; j < n_features; ++j) {
      if (!r[j].is_number() || !std::isfinite(r[j].get<double>())) {
        throw FieldError{field + "[" + std::to_string(j) + "]", "expected a finite number"};
      }
      X(static_cast<Eigen::Index>(i), j) = r[j].get<double>();
    }
  }
  return X;
}

json vec(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

bool flag(const json& body, const std::string& key, bool fallback) {
  if (!body.contains(key)) return fallback;
  if (!body.at(key).is_boolean()) throw FieldError{key, "expected true or false"};
  return body.at(key).get<bool>();
}

int status_for(const std::string& code) {
  if (code == "invalid_argument" || code == "dimension_mismatch") return 400;
  if (code == "not_found") return 404;
  if (code == "io_error") return 409;  // artifact not produced yet
  if (code == "unrecognized_parameter" || code == "no_evidence") return 422;
  if (code == "llm_transport") return 502;
  return 500;
}

}  // namespace

LoadedRun load_run(const fs::path& dir, double t) {
  LoadedRun run;
  run.dir = dir;
  run.manifest_sha256 = sha256_file(dir / "manifest.json");
  run.bank = load_run_bank(dir);
  run.input_clusters = analyze_clusters(input_matrices(run.bank), Space::kInput, "features", t);
  try {
    run.outputs = load_run_outputs(dir, run.bank);
  } catch (const IoError&) {
    return run;  // inputs only
  }
  const auto name = default_output(run.bank.kind);
  run.output_clusters = analyze_clusters(output_matrices(run.bank, *run.outputs, name), Space::kOutput, name, t);
  const auto model = dir / "model" / "ensemble.json";
  if (fs::exists(model)) {
    run.ensemble = load_ensemble(model);
    run.ensemble_sha256 = sha256_file(model);
    std::ifstream in(dir / "model" / "split.json");
    const auto split = json::parse(in);
    std::ifstream min(dir / "model" / "metrics.json");
    const auto metrics = json::parse(min);
    const auto ls = build_learning_set(run.bank, *run.outputs, metrics.at("target").get<std::string>());
    run.background = select_rows(ls.design.X, split.at("train").get<std::vector<int>>());
    run.extras = load_extras(dir);
  }
  return run;
}

Service::Service(const std::vector<fs::path>& runs, Config config) : config_(std::move(config)), map_(config_.map()) {
  if (runs.empty()) throw InvalidArgument("serve: at least one run directory is required");
  for (const auto& r : runs) {
    auto loaded = load_run(r, config_.cluster_threshold);
    for (const auto& other : runs_) {
      if (other.bank.kind == loaded.bank.kind) {
        throw InvalidArgument("serve: two runs hold a " + std::string(bank_name(other.bank.kind)) + " bank");
      }
    }
    runs_.push_back(std::move(loaded));
  }
}

const LoadedRun& Service::run_for(const QueryParams& query, const json* body) const {
  std::optional<std::string> name = query_value(query, "bank");
  if (body && body->contains("bank")) {
    if (!body->at("bank").is_string()) throw FieldError{"bank", "expected \"fm\" or \"agri\""};
    name = body->at("bank").get<std::string>();
  }
  if (!name) return runs_.front();
  if (*name != "fm" && *name != "agri") throw FieldError{"bank", "expected \"fm\" or \"agri\", got '" + *name + "'"};
  for (const auto& r : runs_) {
    if (bank_name(r.bank.kind) == *name) return r;
  }
  throw Error("not_found", "no " + *name + " bank is loaded");
}

ApiResponse Service::handle(const std::string& method, const std::string& path, const QueryParams& query,
                            const std::string& body) const {
  const LoadedRun* ctx = nullptr;
  try {
    auto parse_body = [&] {
      try {
        auto doc = json::parse(body.empty() ? std::string("{}") : body);
        if (!doc.is_object()) throw FieldError{"body", "expected a JSON object"};
        return doc;
      } catch (const json::parse_error&) {
        throw FieldError{"body", "malformed JSON"};
      }
    };
    static const std::string kOutputsPrefix = "/scenarios/";
    const bool get = method == "GET";
    const bool post = method == "POST";
    if (path == "/scenarios") {
      if (!get) return fail(405, "method_not_allowed", "use GET");
      return scenarios(query);
    }
    if (path.starts_with(kOutputsPrefix) && path.ends_with("/outputs")) {
      if (!get) return fail(405, "method_not_allowed", "use GET");
      const auto id = path.substr(kOutputsPrefix.size(), path.size() - kOutputsPrefix.size() - 8);
      return scenario_outputs(id, query);
    }
    if (path == "/clusters") {
      if (!get) return fail(405, "method_not_allowed", "use GET");
      return clusters(query);
    }
    if (path == "/predict" || path == "/shap" || path == "/ask") {
      if (!post) return fail(405, "method_not_allowed", "use POST");
      const auto doc = parse_body();
      ctx = &run_for(query, &doc);
      if (path == "/predict") return predict(doc);
      if (path == "/shap") return shap(doc);
      return ask(doc);
    }
    return fail(404, "not_found", "no route for " + method + " " + path);
  } catch (const FieldError& e) {
    return fail(400, "invalid_request", e.field + ": " + e.message, json::array({{{"field", e.field}, {"message", e.message}}}));
  } catch (const UnrecognizedParameter& e) {
    auto r = fail(422, e.code(), e.what());
    r.body["error"]["vocabulary"] = e.vocabulary();
    return r;
  } catch (const Error& e) {
    const int status = status_for(e.code());
    if (status >= 500) {
      std::cerr << "internal error on " << method << " " << path << ": " << e.what()
                << (ctx ? " run_id=" + ctx->manifest_sha256.substr(0, 16) : std::string()) << '\n';
    }
    return fail(status, e.code(), e.what());
  } catch (const std::exception& e) {
    std::cerr << "internal error on " << method << " " << path << ": " << e.what()
              << (ctx ? " run_id=" + ctx->manifest_sha256.substr(0, 16) : std::string()) << '\n';
    return fail(500, "internal", "internal error");
  }
}

ApiResponse Service::scenarios(const QueryParams& q) const {
  const auto& run = run_for(q, nullptr);
  const auto& s = run.bank.baseline.sets;
  json recipes = json::array();
  for (const auto& r : run.bank.recipes) recipes.push_back({{"id", r.id}, {"multipliers", r.multipliers}});
  return ok({{"bank", bank_name(run.bank.kind)},
             {"seed", run.bank.baseline.seed},
             {"sets", {{"years", s.years}, {"regions", s.regions}, {"fm_techs", s.fm_techs}, {"agri_techs", s.agri_techs}}},
             {"baseline_checksum", checksum(run.bank.baseline)},
             {"has_outputs", run.outputs.has_value()},
             {"recipes", recipes}},
            provenance(run));
}

ApiResponse Service::scenario_outputs(const std::string& id, const QueryParams& q) const {
  const auto& run = run_for(q, nullptr);
  if (!run.bank.materialized.contains(id)) throw Error("not_found", "unknown scenario '" + id + "'");
  if (!run.outputs) throw IoError("the bank has not been run yet");
  const auto& o = run.outputs->at(id);
  return ok({{"id", id},
             {"objective", o.solution.objective},
             {"total_cost", o.total_cost},
             {"co2_gap_rewt", o.solution.co2_gap_rewt},
             {"years", run.bank.baseline.sets.years},
             {"pur_co2", vec(o.solution.pur_co2)},
             {"pur_co2_total", o.solution.pur_co2.sum()},
             {"ghg_abate_fm_annual", vec(o.abatement.fm_annual)},
             {"ghg_abate_agri_annual", vec(o.abatement.agri_annual)},
             {"ghg_abate_fm_total", o.abatement.fm_total},
             {"ghg_abate_agri_total", o.abatement.agri_total},
             {"cap_fms_total", o.solution.cap_fms.sum()},
             {"cap_agri_total", o.solution.cap_agri.sum()},
             {"max_violation", o.max_violation},
             {"iterations", o.iterations}},
            provenance(run));
}

ApiResponse Service::clusters(const QueryParams& q) const {
  const auto& run = run_for(q, nullptr);
  Space space = Space::kInput;
  if (const auto s = query_value(q, "space")) {
    if (*s != "input" && *s != "output") throw FieldError{"space", "expected \"input\" or \"output\", got '" + *s + "'"};
    space = parse_space(*s);
  }
  const double t = query_value(q, "t") ? parse_t(*query_value(q, "t")) : config_.cluster_threshold;
  if (space == Space::kOutput && !run.output_clusters) throw IoError("the bank has not been run yet");
  ClusterAnalysis a = space == Space::kInput ? run.input_clusters : *run.output_clusters;
  a.t = t;
  a.labels = flat_clusters(a.linkage, t);
  json data = to_json(a);
  json groups = json::array();
  const int k = a.labels.empty() ? 0 : *std::max_element(a.labels.begin(), a.labels.end());
  for (int label = 1; label <= k; ++label) {
    groups.push_back({{"label", label},
                      {"size", std::count(a.labels.begin(), a.labels.end(), label)},
                      {"intra_rho", intra_cluster_mean(a.correlation, a.labels, label)}});
  }
  data["bank"] = bank_name(run.bank.kind);
  data["clusters"] = groups;
  data["extremal_text"] = format_extremal(a.extremal);
  return ok(data, provenance(run));
}

ApiResponse Service::predict(const json& body) const {
  const auto& run = run_for({}, &body);
  if (!run.ensemble) throw IoError("no trained surrogate for this bank");
  const auto X = parse_rows(body, run.ensemble->n_features);
  return ok({{"predictions", vec(forge::predict(*run.ensemble, X))}, {"feature_names", run.ensemble->feature_names}},
            provenance(run, true));
}

ApiResponse Service::shap(const json& body) const {
  const auto& run = run_for({}, &body);
  if (!run.ensemble) throw IoError("no trained surrogate for this bank");
  const auto X = parse_rows(body, run.ensemble->n_features);
  int top_k = 3;
  if (body.contains("top_k")) {
    if (!body.at("top_k").is_number_integer() || body.at("top_k").get<int>() < 1) {
      throw FieldError{"top_k", "expected a positive integer"};
    }
    top_k = std::min(body.at("top_k").get<int>(), run.ensemble->n_features);
  }
  const auto A = ensemble_shap(*run.ensemble, X, run.background, ShapOptions{});
  const auto G = global_importance(A);
  json phi = json::array();
  for (Eigen::Index i = 0; i < A.phi.rows(); ++i) phi.push_back(vec(A.phi.row(i).transpose()));
  json ranking = json::array();
  for (int j : G.ranking) ranking.push_back({{"feature", G.feature_names[j]}, {"importance", G.values[j]}});
  json drivers = json::array();
  for (const auto& d : shap_prompt_payload(G, A, top_k)) {
    drivers.push_back({{"feature", d.feature}, {"magnitude", d.magnitude}, {"sign", d.sign}, {"mean_value", d.mean_value}});
  }
  return ok({{"phi0", A.phi0},
             {"phi", phi},
             {"predictions", vec(A.prediction)},
             {"feature_names", A.feature_names},
             {"ranking", ranking},
             {"drivers", drivers}},
            provenance(run, true));
}

ApiResponse Service::ask(const json& body) const {
  const auto& run = run_for({}, &body);
  if (!body.contains("question") || !body.at("question").is_string() ||
      body.at("question").get<std::string>().find_first_not_of(" \t\r\n") == std::string::npos) {
    throw FieldError{"question", "expected a non-empty string"};
  }
  Space space = Space::kInput;
  if (body.contains("space")) {
    const auto s = body.at("space").is_string() ? body.at("space").get<std::string>() : std::string();
    if (s != "input" && s != "output") throw FieldError{"space", "expected \"input\" or \"output\""};
    space = parse_space(s);
  }
  const bool stub = flag(body, "stub", true);
  const bool with_shap = flag(body, "with_shap", false);
  if (space == Space::kOutput && !run.output_clusters) throw IoError("the bank has not been run yet");
  if (with_shap && !run.extras) throw IoError("no model metrics or SHAP drivers for this bank");
  const auto& clusters = space == Space::kInput ? run.input_clusters : *run.output_clusters;

  AskContext ctx;
  ctx.bank = run.bank.kind;
  ctx.recipes = run.bank.recipes;
  ctx.correlation = &clusters.correlation;
  ctx.labels = clusters.labels;
  ctx.map = &map_;
  ctx.eps = config_.eps;
  ctx.extras = with_shap ? &*run.extras : nullptr;

  StubClient stub_client;
  LlmClient* client = &stub_client;
  if (!stub) {
    std::lock_guard lock(client_mu_);
    if (!remote_) {
      auto spec = http_spec_from_env();
      spec.model = config_.llm.model;
      spec.api_key_env = config_.llm.api_key_env;
      spec.timeout_s = config_.llm.timeout_s;
      spec.max_retries = config_.llm.max_retries;
      spec.max_in_flight = config_.llm.max_in_flight;
      remote_ = make_client(spec);
    }
    client = remote_.get();
  }
  const auto r = forge::ask(body.at("question").get<std::string>(), ctx, *client);
  auto prov = provenance(run);
  prov["narrative"] = to_json(r.narrative.provenance);
  return ok(to_json(r), prov);
}

void Service::mount(httplib::Server& server) const {
  server.set_default_headers({{"Access-Control-Allow-Origin", config_.cors_origin},
                              {"Access-Control-Allow-Headers", "Content-Type"},
                              {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"}});
  auto forward = [this](const httplib::Request& req, httplib::Response& res) {
    const auto r = handle(req.method, req.path, req.params, req.body);
    res.status = r.status;
    res.set_content(r.body.dump(), "application/json");
  };
  server.Get(".*", forward);
  server.Post(".*", forward);
  server.Options(".*", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
}

void serve(const Service& service, const std::string& host, int port) {
  httplib::Server server;
  service.mount(server);
  if (!server.listen(host, port)) throw IoError("cannot listen on " + host + ":" + std::to_string(port));
}

}  // namespace forge
