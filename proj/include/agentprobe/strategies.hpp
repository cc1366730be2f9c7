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

#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "agentprobe/json_util.hpp"

namespace agentprobe {

enum class StrategyCategory { kPerturbation, kRolePlaying };

std::string_view to_string(StrategyCategory c);
StrategyCategory category_from_string(std::string_view s);

// A query rewrite instruction. Perturbations carry a level (character, word,
// sentence); role-playing strategies a type (persona, scenario, tone) and a
// concrete instantiation as description.
struct StrategySpec {
  std::string strategy_id;
  StrategyCategory category = StrategyCategory::kPerturbation;
  std::string level_or_type;
  std::string description;
  bool active = true;

  bool operator==(const StrategySpec&) const = default;
};

void to_json(json& j, const StrategySpec& s);
void from_json(const json& j, StrategySpec& s);

// Throws ValidationError on a bad level/type, an empty id or description, or
// a duplicate id.
void validate_strategy(const StrategySpec& s);
void validate_catalog(const std::vector<StrategySpec>& catalog);

// Nine perturbations (three per level) and one persona, scenario and tone.
const std::vector<StrategySpec>& default_strategies();

// JSON Lines: {strategy_id, category, level_or_type, description}.
std::vector<StrategySpec> load_strategy_catalog(std::istream& in);
std::vector<StrategySpec> load_strategy_catalog_file(const std::string& path);

}  // namespace agentprobe
