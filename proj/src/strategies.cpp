// Copyright 2026 The agentprobe Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "agentprobe/strategies.hpp"

#include <fstream>
#include <set>

#include "agentprobe/error.hpp"

namespace agentprobe {

std::string_view to_string(StrategyCategory c) {
  return c == StrategyCategory::kPerturbation ? "perturbation" : "role-playing";
}

StrategyCategory category_from_string(std::string_view s) {
  if (s == "perturbation") return StrategyCategory::kPerturbation;
  if (s == "role-playing") return StrategyCategory::kRolePlaying;
  throw ValidationError("unknown strategy category '" + std::string(s) + "'");
}

void to_json(json& j, const StrategySpec& s) {
  j = json{{"strategy_id", s.strategy_id},
           {"category", to_string(s.category)},
           {"level_or_type", s.level_or_type},
           {"description", s.description}};
}

void from_json(const json& j, StrategySpec& s) {
  s.strategy_id = j.at("strategy_id").get<std::string>();
  s.category = category_from_string(j.at("category").get<std::string>());
  s.level_or_type = j.at("level_or_type").get<std::string>();
  s.description = j.at("description").get<std::string>();
  s.active = true;
}

void validate_strategy(const StrategySpec& s) {
  if (s.strategy_id.empty()) throw ValidationError("strategy id empty");
  if (trim(s.description).empty()) {
    throw ValidationError("strategy " + s.strategy_id + ": description empty");
  }
  static const std::set<std::string, std::less<>> kLevels{"character", "word", "sentence"};
  static const std::set<std::string, std::less<>> kTypes{"persona", "scenario", "tone"};
  const auto& allowed =
      s.category == StrategyCategory::kPerturbation ? kLevels : kTypes;
  if (!allowed.contains(s.level_or_type)) {
    throw ValidationError("strategy " + s.strategy_id + ": '" + s.level_or_type +
                          "' is not a valid " +
                          (s.category == StrategyCategory::kPerturbation
                               ? "perturbation level"
                               : "role-playing type"));
  }
}

void validate_catalog(const std::vector<StrategySpec>& catalog) {
  if (catalog.empty()) throw ValidationError("strategy catalog empty");
  std::set<std::string> ids;
  for (const auto& s : catalog) {
    validate_strategy(s);
    if (!ids.insert(s.strategy_id).second) {
      throw ValidationError("duplicate strategy id " + s.strategy_id);
    }
  }
}

const std::vector<StrategySpec>& default_strategies() {
  using C = StrategyCategory;
  static const std::vector<StrategySpec> kDefaults{
      {"char-extraneous", C::kPerturbation, "character",
       "Add one or two extraneous characters."},
      {"char-change", C::kPerturbation, "character", "Change one or two letters."},
      {"typo", C::kPerturbation, "character",
       "Choose one or two words and modify them so that they have typos."},
      {"synonym-replace", C::kPerturbation, "word",
       "Replace one or two words with synonyms."},
      {"word-delete", C::kPerturbation, "word", "Delete one or two meaningless words."},
      {"word-add", C::kPerturbation, "word",
       "Add one or two semantically neutral words."},
      {"sentence-handle", C::kPerturbation, "sentence",
       "Add a randomly generated short meaningless handle."},
      {"paraphrase", C::kPerturbation, "sentence", "Paraphrase the sentence."},
      {"restructure", C::kPerturbation, "sentence", "Change the syntactic structure."},
      {"persona", C::kRolePlaying, "persona",
       "Budgeting spender: manages a household on a tight budget, compares prices, "
       "looks for discounts and wants to avoid returns."},
      {"scenario", C::kRolePlaying, "scenario", "Moving into new home next month."},
      {"tone", C::kRolePlaying, "tone",
       "Assertive tone: An assertive tone exudes confidence and authority. It can "
       "also be insistent and straightforward. This tone can help you persuade your "
       "audience about a topic."},
  };
  return kDefaults;
}

std::vector<StrategySpec> load_strategy_catalog(std::istream& in) {
  std::vector<StrategySpec> out;
  std::string line;
  long index = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    auto j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      throw ParseError("strategy record is not a JSON object", index);
    }
    try {
      out.push_back(j.get<StrategySpec>());
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("strategy record malformed: ") + e.what(), index);
    }
    ++index;
  }
  validate_catalog(out);
  return out;
}

std::vector<StrategySpec> load_strategy_catalog_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open strategy catalog " + path);
  return load_strategy_catalog(in);
}

}  // namespace agentprobe
