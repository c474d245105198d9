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

#include "forge/narrator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <regex>
#include <set>

#include "forge/checksum.hpp"

namespace forge {
namespace {

using json = nlohmann::json;

std::regex icase(const std::string& pattern) {
  return std::regex(pattern, std::regex::ECMAScript | std::regex::icase);
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

// Position of the first direction keyword, or npos.
std::size_t find_word(const std::string& text, const std::regex& re) {
  std::smatch m;
  return std::regex_search(text, m, re) ? static_cast<std::size_t>(m.position(0)) : std::string::npos;
}

const std::regex& increase_words() {
  static const std::regex re = icase(R"(\b(increas(e|es|ed|ing)|ris(e|es|ing)|rose|rais(e|es|ed|ing)|higher|up)\b)");
  return re;
}

const std::regex& decrease_words() {
  static const std::regex re = icase(
      R"(\b(decreas(e|es|ed|ing)|reduc(e|es|ed|ing|tion)|drop(s|ped)?|lower(s|ed)?|cut|fall(s|en)?|fell|down|cheaper)\b)");
  return re;
}

std::string scenario_list(const std::vector<std::string>& ids) {
  return ids.empty() ? "none." : join(ids, ", ") + ".";
}

std::string change_text(const ParsedQuery& q, const GroundingBundle& g) {
  if (q.multiplier) return "**" + format_change(*q.multiplier) + "**";
  std::set<double> factors;
  for (const auto& r : g.representative_recipes) factors.insert(r.factor(q.parameter));
  std::vector<std::string> designed;
  for (double f : factors) designed.push_back(format_change(f));
  std::string out = "**" + std::string(direction_name(q.direction)) + "**";
  if (!designed.empty()) out += " (designed changes: " + join(designed, ", ") + ")";
  return out;
}

std::string summary_block(const ParsedQuery& q, const GroundingBundle& g) {
  std::string s = "Scenario Summary:\n";
  s += "Matched parameter **" + q.parameter + "** altered by " + change_text(q, g) + "\n";
  s += "Matched scenario(s): " + scenario_list(g.matched_ids) + "\n";
  if (g.nearest) s += "No scenario carries the requested change; the closest designed scenarios are listed.\n";
  s += "Cluster #" + std::to_string(g.cluster_id) + " -> contains " + std::to_string(g.cluster_size) +
       " scenarios (average intra-cluster \xCF\x81 = " + fixed(g.intra_rho, 3) + ").\n";
  return s;
}

std::string recipe_block(const GroundingBundle& g) {
  std::string s = "Scenario recipes:\n";
  for (const auto& r : g.representative_recipes) {
    std::vector<std::string> parts;
    for (const auto& [name, f] : r.multipliers) parts.push_back(name + " " + format_change(f));
    s += "- " + r.id + ": " + (parts.empty() ? std::string("baseline") : join(parts, ", ")) + "\n";
  }
  return s;
}

}  // namespace

std::string_view direction_name(Direction d) {
  switch (d) {
    case Direction::kIncrease:
      return "increase";
    case Direction::kDecrease:
      return "decrease";
    case Direction::kUnspecified:
      break;
  }
  return "unspecified";
}

ParameterMap ParameterMap::builtin() {
  ParameterMap map;
  auto names = parameter_names();
  // Longer names first so that no name shadows a longer one sharing its stem.
  std::stable_sort(names.begin(), names.end(), [](const auto& a, const auto& b) { return a.size() > b.size(); });
  for (const auto& n : names) map.patterns.push_back({"\\b" + n + "\\b", n, n});
  const std::string co2(param::kCo2Price), inv_agri(param::kCostInvAgri);
  map.patterns.push_back({R"(\b(co2|carbon)\s*price)", co2, co2});
  map.patterns.push_back({R"(investment\s+cost|cost\s+of\s+investment)", inv_agri, inv_agri});
  map.patterns.push_back(
      {R"(marginal\s+cost)", std::string(param::kCostMargFm), std::string(param::kCostMargAgri)});
  map.patterns.push_back({R"(growth)", std::string(param::kFmGrowth), std::string(param::kAgriGrowth)});
  map.patterns.push_back({R"(beech)", std::string(param::kBeechArea0), std::string(param::kBeechArea0)});
  map.patterns.push_back({R"(grass)", std::string(param::kGrassArea0), std::string(param::kGrassArea0)});
  map.patterns.push_back({R"(target)", std::string(param::kGhgTarget), std::string(param::kGhgTarget)});
  return map;
}

void ParameterMap::extend(const json& entries) {
  if (!entries.is_array()) throw InvalidArgument("parameter_map: expected an array of entries");
  std::vector<ParameterPattern> added;
  const auto& known = parameter_names();
  auto check = [&](const std::string& name) {
    if (std::find(known.begin(), known.end(), name) == known.end()) {
      throw InvalidArgument("parameter_map: '" + name + "' is not a scenario parameter");
    }
    return name;
  };
  for (const auto& e : entries) {
    if (!e.contains("pattern")) throw InvalidArgument("parameter_map: entry without 'pattern'");
    ParameterPattern p;
    p.pattern = e.at("pattern").get<std::string>();
    try {
      icase(p.pattern);
    } catch (const std::regex_error&) {
      throw InvalidArgument("parameter_map: invalid pattern '" + p.pattern + "'");
    }
    if (e.contains("parameter")) {
      p.fm = p.agri = check(e.at("parameter").get<std::string>());
    } else {
      p.fm = check(e.at("fm").get<std::string>());
      p.agri = check(e.at("agri").get<std::string>());
    }
    added.push_back(std::move(p));
  }
  patterns.insert(patterns.begin(), added.begin(), added.end());
}

std::optional<std::string> ParameterMap::resolve(std::string_view text, BankKind bank) const {
  const std::string s(text);
  for (const auto& p : patterns) {
    if (std::regex_search(s, icase(p.pattern))) return bank == BankKind::kFm ? p.fm : p.agri;
  }
  return std::nullopt;
}

std::vector<std::string> ParameterMap::vocabulary() const {
  std::set<std::string> names;
  for (const auto& p : patterns) {
    names.insert(p.fm);
    names.insert(p.agri);
  }
  return {names.begin(), names.end()};
}

ParsedQuery parse_query(std::string_view text, const ParameterMap& map, BankKind bank) {
  const std::string s(text);
  if (s.find_first_not_of(" \t\r\n") == std::string::npos) throw InvalidArgument("parse_query: empty query");
  const auto parameter = map.resolve(s, bank);
  if (!parameter) throw UnrecognizedParameter(s, map.vocabulary());

  ParsedQuery q;
  q.parameter = *parameter;
  q.raw = s;
  const auto inc = find_word(s, increase_words());
  const auto dec = find_word(s, decrease_words());
  if (inc != std::string::npos || dec != std::string::npos) {
    q.direction = dec < inc ? Direction::kDecrease : Direction::kIncrease;
  }
  static const std::regex percent = icase(R"(([+-]?)\s*(\d+(?:\.\d+)?)\s*(%|percent\b))");
  std::smatch m;
  if (std::regex_search(s, m, percent)) {
    const double p = std::stod(m[2].str());
    bool down = q.direction == Direction::kDecrease;
    if (m[1] == "-") down = true;
    if (m[1] == "+") down = false;
    const double lambda = (100.0 + (down ? -p : p)) / 100.0;
    if (!(lambda > 0.0)) throw InvalidArgument("parse_query: a change of -" + m[2].str() + "% leaves nothing");
    q.multiplier = lambda;
    q.direction = lambda > 1.0 ? Direction::kIncrease : lambda < 1.0 ? Direction::kDecrease : Direction::kUnspecified;
  }
  return q;
}

MatchResult match_scenarios(const ParsedQuery& q, std::span<const ScenarioRecipe> recipes, double eps) {
  if (q.parameter.empty()) throw InvalidArgument("match_scenarios: query has no parameter");
  MatchResult out;
  for (const auto& r : recipes) {
    const double f = r.factor(q.parameter);
    bool hit = false;
    if (q.multiplier) {
      hit = std::abs(f - *q.multiplier) < eps;
    } else if (q.direction == Direction::kIncrease) {
      hit = f > 1.0;
    } else if (q.direction == Direction::kDecrease) {
      hit = f < 1.0;
    } else {
      hit = f != 1.0;
    }
    if (hit) out.ids.push_back(r.id);
  }
  if (out.ids.empty() && q.multiplier && !recipes.empty()) {
    double best = INFINITY;
    for (const auto& r : recipes) best = std::min(best, std::abs(r.factor(q.parameter) - *q.multiplier));
    for (const auto& r : recipes) {
      if (std::abs(r.factor(q.parameter) - *q.multiplier) <= best + 1e-12) out.ids.push_back(r.id);
    }
    out.nearest = true;
  }
  return out;
}

GroundingBundle ground(const MatchResult& matched, std::span<const int> labels, const CorrelationMatrix& c,
                       std::span<const ScenarioRecipe> recipes) {
  if (matched.ids.empty()) throw NoEvidence("no scenario matches the query");
  if (labels.size() != c.ids.size()) throw DimensionError("labels", "one label per scenario required");
  std::map<int, int> votes;
  for (const auto& id : matched.ids) {
    const auto it = std::find(c.ids.begin(), c.ids.end(), id);
    if (it == c.ids.end()) throw InvalidArgument("ground: scenario " + id + " has no cluster label");
    ++votes[labels[it - c.ids.begin()]];
  }
  GroundingBundle g;
  g.matched_ids = matched.ids;
  g.nearest = matched.nearest;
  int best = 0;
  for (const auto& [label, n] : votes) {
    if (n > best) best = n, g.cluster_id = label;  // ascending labels: ties keep the lowest
  }
  g.cluster_size = static_cast<int>(std::count(labels.begin(), labels.end(), g.cluster_id));
  g.intra_rho = intra_cluster_mean(c, labels, g.cluster_id);
  for (const auto& id : matched.ids) {
    const auto it = std::find_if(recipes.begin(), recipes.end(), [&](const auto& r) { return r.id == id; });
    if (it != recipes.end()) g.representative_recipes.push_back(*it);
  }
  return g;
}

std::string format_change(double multiplier) {
  double pct = std::round((multiplier - 1.0) * 100.0 * 1e6) / 1e6;
  if (pct == 0.0) pct = 0.0;  // no "-0"
  char buf[64];
  std::snprintf(buf, sizeof buf, "%+.6g%%", pct);
  return buf;
}

std::string build_prompt(const ParsedQuery& q, const GroundingBundle& g, const PromptExtras* extras) {
  std::string s;
  if (extras && extras->any()) {
    const std::string target = "`" + extras->target + "`";
    s += "You are a sustainability analyst preparing a summary report for stakeholders. The evidence below comes "
         "from a bagged random-forest surrogate of the land-use optimization model and its SHAP attributions for " +
         target + ".\n\n";
    s += "**Objective**: Explain what drives " + target + " and what the question below implies for it.\n\n";
    if (extras->metrics) {
      s += "**Model Performance**:\n";
      s += "\xE2\x80\xA2 R\xC2\xB2 Score: " + fixed(extras->metrics->r2, 4) + "\n";
      s += "\xE2\x80\xA2 RMSE: " + fixed(extras->metrics->rmse, 2) + " hectares\n\n";
    }
    if (!extras->drivers.empty()) {
      s += "**Top " + std::to_string(extras->drivers.size()) + " Influential Features** (mean |SHAP| over the ensemble):\n";
      for (std::size_t i = 0; i < extras->drivers.size(); ++i) {
        const auto& d = extras->drivers[i];
        const char* effect = d.sign > 0 ? "raises" : d.sign < 0 ? "lowers" : "leaves unchanged";
        s += std::to_string(i + 1) + ". **" + d.feature + "** \xE2\x80\x93 SHAP = " + fixed(d.magnitude, 3) +
             ", Avg value = " + fixed(d.mean_value, 3) + " (on average " + effect + " " + target + ")\n";
      }
      s += "\n";
    }
    if (!extras->best_region.empty() || !extras->best_tech.empty()) {
      s += "**Regional & Policy Highlights**:\n";
      if (!extras->best_region.empty()) {
        s += "\xE2\x80\xA2 Region with highest " + extras->target + " potential: **" + extras->best_region + "**\n";
      }
      if (!extras->best_tech.empty()) s += "\xE2\x80\xA2 Leading technology: **" + extras->best_tech + "**\n";
      s += "\n";
    }
    s += "**Question**: " + q.raw + "\n\n";
    s += summary_block(q, g) + "\n" + recipe_block(g) + "\n";
    s += "**Task**:\n"
         "Write a short report for regional planners and policymakers. Explain in plain words how far the model "
         "can be trusted, interpret each listed driver, and point out the regions and technologies that stand "
         "out. Tie every recommendation to the matched scenarios and say so when the evidence is thin. Use no "
         "equations.\n";
    return s;
  }
  s += "You support stakeholders who ask what-if questions about a land-use mitigation optimization model. "
       "Answer only from the scenario evidence below.\n\n";
  s += "Question: " + q.raw + "\n\n";
  s += summary_block(q, g) + "\n" + recipe_block(g) + "\n";
  s += "Task:\n"
       "Describe the expected change in abatement, technology costs, purchased allowances and land use for this "
       "parameter change. Refer to the matched scenarios by id and flag any limits of the evidence.\n";
  return s;
}

Narrative narrate(const std::string& prompt, const GroundingBundle& g, LlmClient& client) {
  Narrative n;
  n.provenance.prompt_hash = sha256_hex(prompt);
  n.provenance.client_id = client.id();
  n.provenance.matched_ids = g.matched_ids;
  n.provenance.cluster_id = g.cluster_id;
  n.text = client.complete(prompt);
  return n;
}

AskResult ask(std::string_view question, const AskContext& ctx, LlmClient& client) {
  if (!ctx.correlation || !ctx.map) throw InvalidArgument("ask: missing correlation matrix or parameter map");
  AskResult r;
  r.query = parse_query(question, *ctx.map, ctx.bank);
  r.match = match_scenarios(r.query, ctx.recipes, ctx.eps);
  r.bundle = ground(r.match, ctx.labels, *ctx.correlation, ctx.recipes);
  r.prompt = build_prompt(r.query, r.bundle, ctx.extras);
  r.narrative = narrate(r.prompt, r.bundle, client);
  return r;
}

std::string render_answer(const AskResult& r) {
  return summary_block(r.query, r.bundle) + "\nResponse (" + r.narrative.provenance.client_id + ", prompt sha256 " +
         r.narrative.provenance.prompt_hash.substr(0, 16) + "):\n" + r.narrative.text + "\n";
}

json to_json(const ParsedQuery& q) {
  return {{"parameter", q.parameter},
          {"multiplier", q.multiplier ? json(*q.multiplier) : json(nullptr)},
          {"direction", direction_name(q.direction)},
          {"raw", q.raw}};
}

json to_json(const GroundingBundle& g) {
  json recipes = json::array();
  for (const auto& r : g.representative_recipes) recipes.push_back({{"id", r.id}, {"multipliers", r.multipliers}});
  return {{"matched_ids", g.matched_ids}, {"nearest", g.nearest},         {"cluster_id", g.cluster_id},
          {"cluster_size", g.cluster_size}, {"intra_rho", g.intra_rho}, {"representative_recipes", recipes}};
}

json to_json(const Provenance& p) {
  return {{"prompt_hash", p.prompt_hash},
          {"client_id", p.client_id},
          {"matched_ids", p.matched_ids},
          {"cluster_id", p.cluster_id}};
}

json to_json(const AskResult& r) {
  return {{"query", to_json(r.query)},
          {"matches", {{"ids", r.match.ids}, {"nearest", r.match.nearest}}},
          {"bundle", to_json(r.bundle)},
          {"prompt", r.prompt},
          {"narrative", r.narrative.text},
          {"provenance", to_json(r.narrative.provenance)}};
}

}  // namespace forge
