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

#ifndef FORGE_SERVICE_HPP_
#define FORGE_SERVICE_HPP_

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "forge/pipeline.hpp"
#include "json.hpp"

namespace httplib {
class Server;
}

namespace forge {

inline constexpr int kSchemaVersion = 1;

struct ApiResponse {
  int status = 200;
  nlohmann::json body;
};

using QueryParams = std::multimap<std::string, std::string>;

// Artifacts of one run directory, loaded once and never mutated.
struct LoadedRun {
  std::filesystem::path dir;
  std::string manifest_sha256;
  ScenarioBank bank;
  std::optional<OutputsMap> outputs;
  ClusterAnalysis input_clusters;
  std::optional<ClusterAnalysis> output_clusters;
  std::optional<ForestEnsemble> ensemble;
  std::string ensemble_sha256;
  Eigen::MatrixXd background;  // training design rows
  std::optional<PromptExtras> extras;
};

LoadedRun load_run(const std::filesystem::path& dir, double t);

class Service {
 public:
  Service(const std::vector<std::filesystem::path>& runs, Config config);

  // Transport-free entry point; the HTTP server forwards every request here.
  ApiResponse handle(const std::string& method, const std::string& path, const QueryParams& query,
                     const std::string& body) const;

  void mount(httplib::Server& server) const;

  const Config& config() const { return config_; }

 private:
  const LoadedRun& run_for(const QueryParams& query, const nlohmann::json* body) const;

  ApiResponse scenarios(const QueryParams& q) const;
  ApiResponse scenario_outputs(const std::string& id, const QueryParams& q) const;
  ApiResponse clusters(const QueryParams& q) const;
  ApiResponse predict(const nlohmann::json& body) const;
  ApiResponse shap(const nlohmann::json& body) const;
  ApiResponse ask(const nlohmann::json& body) const;

  Config config_;
  ParameterMap map_;
  std::vector<LoadedRun> runs_;
  mutable std::mutex client_mu_;
  mutable std::unique_ptr<LlmClient> remote_;  // created on first non-stub request
};

// Blocks until the server stops.
void serve(const Service& service, const std::string& host, int port);

}  // namespace forge

#endif  // FORGE_SERVICE_HPP_
