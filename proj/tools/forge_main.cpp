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

// forge: command-line entry point for the scenario-analysis pipeline.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "forge/pipeline.hpp"
#include "forge/service.hpp"

namespace {

namespace fs = std::filesystem;
using namespace forge;

std::string one_line(std::string s) {
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

int report(const std::string& code, const std::string& message) {
  std::cerr << "error code=" << code << " message=\"" << one_line(message) << "\"\n";
  return 1;
}

Config load_config(const std::string& path) { return path.empty() ? Config{} : Config::load(path); }

SetsSpec sets_for(const std::string& size) {
  if (size == "full") return SetsSpec::full();
  if (size == "desk") return SetsSpec::desk();
  throw InvalidArgument("size must be 'full' or 'desk'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"LULUCF scenario-analysis pipeline", "forge"};
  app.require_subcommand(1);

  std::string bank = "fm", size = "full", out, in, space = "input", target, config_path, question, host = "127.0.0.1";
  std::uint64_t seed = 7;
  int workers = 1, folds = 10, trees = 50, threads = 1, subsamples = 1, subsample_size = 0, top_k = 3, port = 8080;
  double t = -1.0;
  bool stub = false, with_shap = false;
  std::vector<std::string> runs;

  auto* bank_cmd = app.add_subcommand("bank", "Generate or run a scenario bank");
  bank_cmd->require_subcommand(1);
  auto* gen = bank_cmd->add_subcommand("generate", "Synthesize a baseline and materialize the 26 scenarios");
  gen->add_option("--bank", bank, "fm or agri")->check(CLI::IsMember({"fm", "agri"}));
  gen->add_option("--seed", seed, "Baseline synthesis seed");
  gen->add_option("--size", size, "full (16 regions, 2020-2050) or desk")->check(CLI::IsMember({"full", "desk"}));
  gen->add_option("--out", out, "Run directory")->required();
  auto* run = bank_cmd->add_subcommand("run", "Solve every scenario of a bank");
  run->add_option("--in", in, "Run directory")->required();
  run->add_option("--workers", workers, "Parallel solves")->check(CLI::PositiveNumber);

  auto* feat = app.add_subcommand("features", "Write per-scenario feature matrices and the design matrix");
  feat->add_option("--in", in, "Run directory")->required();

  auto* clu = app.add_subcommand("cluster", "Correlate scenarios and cluster them");
  clu->add_option("--in", in, "Run directory")->required();
  clu->add_option("--space", space, "input or output")->check(CLI::IsMember({"input", "output"}));
  clu->add_option("--t", t, "Cut height on 1 - rho")->check(CLI::PositiveNumber);
  clu->add_option("--config", config_path, "JSON config file");

  auto* tr = app.add_subcommand("train", "Fit the surrogate ensemble");
  tr->add_option("--in", in, "Run directory")->required();
  tr->add_option("--target", target, "Output tensor to learn (default capFMs / capAgri)");
  tr->add_option("--folds", folds, "Number of forests")->check(CLI::PositiveNumber);
  tr->add_option("--trees", trees, "Trees per forest")->check(CLI::PositiveNumber);
  tr->add_option("--seed", seed, "Ensemble seed");
  tr->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);

  auto* sh = app.add_subcommand("shap", "Attribute held-out predictions to features");
  sh->add_option("--in", in, "Run directory")->required();
  sh->add_option("--subsamples", subsamples, "Draws per forest")->check(CLI::PositiveNumber);
  sh->add_option("--subsample-size", subsample_size, "Rows per draw (0 = all)")->check(CLI::NonNegativeNumber);
  sh->add_option("--seed", seed, "Subsampling seed");
  sh->add_option("--top-k", top_k, "Drivers kept for prompts")->check(CLI::PositiveNumber);
  sh->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);

  auto* ak = app.add_subcommand("ask", "Answer a what-if question from the scenario evidence");
  ak->add_option("question", question, "Question text")->required();
  ak->add_option("--bank", bank, "fm or agri")->check(CLI::IsMember({"fm", "agri"}));
  ak->add_option("--in", in, "Run directory (default runs/<bank>)");
  ak->add_option("--space", space, "Cluster space for grounding")->check(CLI::IsMember({"input", "output"}));
  ak->add_flag("--stub", stub, "Use the deterministic stub client");
  ak->add_flag("--with-shap", with_shap, "Add surrogate metrics and SHAP drivers to the prompt");
  ak->add_option("--config", config_path, "JSON config file");

  auto* sv = app.add_subcommand("serve", "Expose the loaded runs over HTTP");
  sv->add_option("--run", runs, "Run directory (repeat for a second bank)")->required();
  sv->add_option("--host", host, "Bind address");
  sv->add_option("--port", port, "Port")->check(CLI::Range(1, 65535));
  sv->add_option("--config", config_path, "JSON config file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    report("usage", e.what());
    return 2;
  }

  try {
    if (gen->parsed()) {
      step_bank_generate(parse_bank(bank), sets_for(size), seed, out);
      std::cout << "bank " << bank << " with 26 scenarios written to " << out << '\n';
    } else if (run->parsed()) {
      step_bank_run(in, workers);
      const auto b = load_run_bank(in);
      std::cout << b.recipes.size() << " scenarios solved; outputs under " << in << "/<id>/outputs\n";
    } else if (feat->parsed()) {
      step_features(in);
      std::cout << "features written to " << (fs::path(in) / "features").string() << '\n';
    } else if (clu->parsed()) {
      const auto cfg = load_config(config_path);
      const auto a = step_cluster(in, parse_space(space), t > 0 ? t : cfg.cluster_threshold);
      for (const auto& w : a.warnings) std::cerr << "warning: " << w << '\n';
      std::cout << format_extremal(a.extremal);
      const int k = *std::max_element(a.labels.begin(), a.labels.end());
      for (int label = 1; label <= k; ++label) {
        std::printf("Cluster #%d -> contains %d scenarios (average intra-cluster \xCF\x81 = %.3f).\n", label,
                    static_cast<int>(std::count(a.labels.begin(), a.labels.end(), label)),
                    intra_cluster_mean(a.correlation, a.labels, label));
      }
    } else if (tr->parsed()) {
      EnsembleConfig cfg;
      cfg.n_folds = folds;
      cfg.trees_per_forest = trees;
      cfg.seed = seed;
      cfg.threads = threads;
      const auto b = load_run_bank(in);
      const auto result = step_train(in, target.empty() ? default_target(b.kind) : target, cfg);
      std::printf("test rmse %.4f r2 %.4f (train rmse %.4f r2 %.4f)\n", result.test.rmse, result.test.r2,
                  result.train.rmse, result.train.r2);
    } else if (sh->parsed()) {
      ShapOptions opt;
      opt.subsamples = subsamples;
      opt.subsample_size = subsample_size;
      opt.seed = seed;
      opt.threads = threads;
      const auto g = step_shap(in, opt, top_k);
      for (int i = 0; i < std::min<int>(top_k, static_cast<int>(g.ranking.size())); ++i) {
        std::printf("%d. %s %.6g\n", i + 1, g.feature_names[g.ranking[i]].c_str(), g.values[g.ranking[i]]);
      }
    } else if (ak->parsed()) {
      const auto cfg = load_config(config_path);
      const fs::path dir = in.empty() ? fs::path("runs") / bank : fs::path(in);
      auto spec = cfg.llm;
      if (!stub) {
        const auto env = http_spec_from_env();
        spec.kind = env.kind;
        spec.endpoint = env.endpoint;
      }
      auto client = make_client(spec);
      const auto b = load_run_bank(dir);
      if (bank_name(b.kind) != bank) throw InvalidArgument(dir.string() + " holds the " + std::string(bank_name(b.kind)) + " bank");
      const auto r = step_ask(dir, question, parse_space(space), with_shap, cfg, *client);
      std::cout << render_answer(r);
    } else if (sv->parsed()) {
      std::vector<fs::path> dirs(runs.begin(), runs.end());
      const Service service(dirs, load_config(config_path));
      std::cerr << "listening on " << host << ":" << port << '\n';
      serve(service, host, port);
    }
  } catch (const UnrecognizedParameter& e) {
    std::string vocab;
    for (const auto& v : e.vocabulary()) vocab += (vocab.empty() ? "" : ",") + v;
    return report(e.code(), std::string(e.what()) + "; known: " + vocab);
  } catch (const Error& e) {
    return report(e.code(), e.what());
  } catch (const std::exception& e) {
    return report("internal", e.what());
  }
  return 0;
}
