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

#ifndef FORGE_NARRATOR_HPP_
#define FORGE_NARRATOR_HPP_

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "forge/bank.hpp"
#include "forge/forest.hpp"
#include "forge/llm_client.hpp"
#include "forge/shap.hpp"
#include "forge/similarity.hpp"
#include "json.hpp"

namespace forge {

enum class Direction { kUnspecified, kIncrease, kDecrease };
std::string_view direction_name(Direction d);

struct ParameterPattern {
  std::string pattern;  // ECMAScript regex, matched case-insensitively
  std::string fm;       // canonical name when querying the FM bank
  std::string agri;     // canonical name when querying the Agri bank
};

struct ParameterMap {
  std::vector<ParameterPattern> patterns;  // first match wins

  // Canonical tensor names first, then the keyword phrases.
  static ParameterMap builtin();
  // Prepends {"pattern", "parameter"} or {"pattern", "fm", "agri"} entries,
  // so configured phrases take precedence over the built-in ones.
  void extend(const nlohmann::json& entries);
  std::optional<std::string> resolve(std::string_view text, BankKind bank) const;
  std::vector<std::string> vocabulary() const;
};

struct ParsedQuery {
  std::string parameter;
  std::optional<double> multiplier;
  Direction direction = Direction::kUnspecified;
  std::string raw;

  bool operator==(const ParsedQuery&) const = default;
};

class UnrecognizedParameter : public Error {
 public:
  UnrecognizedParameter(std::string text, std::vector<std::string> vocabulary)
      : Error("unrecognized_parameter", "no known parameter in query: " + text),
        text_(std::move(text)),
        vocabulary_(std::move(vocabulary)) {}

  const std::string& text() const noexcept { return text_; }
  const std::vector<std::string>& vocabulary() const noexcept { return vocabulary_; }

 private:
  std::string text_;
  std::vector<std::string> vocabulary_;
};

class NoEvidence : public Error {
 public:
  explicit NoEvidence(const std::string& message) : Error("no_evidence", message) {}
};

ParsedQuery parse_query(std::string_view text, const ParameterMap& map, BankKind bank = BankKind::kFm);

struct MatchResult {
  std::vector<std::string> ids;
  bool nearest = false;  // no scenario within eps; closest factors returned instead
};

inline constexpr double kDefaultEps = 0.05;

MatchResult match_scenarios(const ParsedQuery& q, std::span<const ScenarioRecipe> recipes,
                            double eps = kDefaultEps);

struct GroundingBundle {
  std::vector<std::string> matched_ids;
  bool nearest = false;
  int cluster_id = 0;
  int cluster_size = 0;
  double intra_rho = 0.0;
  std::vector<ScenarioRecipe> representative_recipes;
};

// `c.ids` orders `labels`; throws NoEvidence when nothing matched.
GroundingBundle ground(const MatchResult& matched, std::span<const int> labels, const CorrelationMatrix& c,
                       std::span<const ScenarioRecipe> recipes);

struct PromptExtras {
  std::string target = "capFMs";
  std::optional<RegressionMetrics> metrics;
  std::vector<Driver> drivers;
  std::string best_region;
  std::string best_tech;

  bool any() const { return metrics.has_value() || !drivers.empty(); }
};

std::string format_change(double multiplier);  // 1.2 -> "+20%"

std::string build_prompt(const ParsedQuery& q, const GroundingBundle& g, const PromptExtras* extras = nullptr);

struct Provenance {
  std::string prompt_hash;
  std::string client_id;
  std::vector<std::string> matched_ids;
  int cluster_id = 0;
};

struct Narrative {
  std::string text;
  Provenance provenance;
};

Narrative narrate(const std::string& prompt, const GroundingBundle& g, LlmClient& client);

struct AskResult {
  ParsedQuery query;
  MatchResult match;
  GroundingBundle bundle;
  std::string prompt;
  Narrative narrative;
};

struct AskContext {
  BankKind bank = BankKind::kFm;
  std::span<const ScenarioRecipe> recipes;
  const CorrelationMatrix* correlation = nullptr;
  std::span<const int> labels;
  const ParameterMap* map = nullptr;
  double eps = kDefaultEps;
  const PromptExtras* extras = nullptr;
};

AskResult ask(std::string_view question, const AskContext& ctx, LlmClient& client);

// Console rendering: scenario summary followed by the narrative.
std::string render_answer(const AskResult& r);

nlohmann::json to_json(const ParsedQuery& q);
nlohmann::json to_json(const GroundingBundle& g);
nlohmann::json to_json(const Provenance& p);
nlohmann::json to_json(const AskResult& r);

}  // namespace forge

#endif  // FORGE_NARRATOR_HPP_
