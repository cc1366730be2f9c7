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

#include <istream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "agentprobe/json_util.hpp"

namespace agentprobe {

// One weighted rubric entry. Judges select the criteria a response satisfies;
// the reward is the mean weight of the criteria a majority selected.
struct Criterion {
  std::string id;
  std::string description;
  double weight = 0.0;  // in [0, 1]

  bool operator==(const Criterion&) const = default;
};

struct ObjectiveSpec {
  std::string name;
  std::vector<Criterion> criteria;
  double violation_threshold = 0.5;  // reward strictly below => failure
  std::string realism_definition;
  std::vector<std::string> judge_roster;
  std::vector<std::string> realism_roster;

  const Criterion* find(std::string_view id) const;

  // Criteria a passing response is expected to meet (weight >= threshold) and
  // failure descriptors (weight < threshold).
  std::vector<const Criterion*> compliance_criteria() const;
  std::vector<const Criterion*> failure_criteria() const;

  bool operator==(const ObjectiveSpec&) const = default;
};

// Returns `spec` unchanged when every invariant holds; otherwise throws
// ValidationError naming the first violated invariant.
ObjectiveSpec validate_objective(ObjectiveSpec spec);

// The 3-point helpfulness rubric (Unhelpful 0.0, Partially helpful 0.5,
// Helpful 1.0) with the given judge rosters.
ObjectiveSpec helpfulness_objective(std::vector<std::string> judges,
                                    std::vector<std::string> realism_judges);

// Shopper-query realism definition shipped with the helpfulness objective.
const std::string& default_realism_definition();

void to_json(json& j, const Criterion& c);
void from_json(const json& j, Criterion& c);
void to_json(json& j, const ObjectiveSpec& s);
void from_json(const json& j, ObjectiveSpec& s);

// A catalog entry: product name plus attribute map, attributes kept in file
// order.
struct DomainKnowledgeItem {
  std::string item_id;
  std::string name;
  std::string category;
  std::vector<std::pair<std::string, std::string>> attributes;

  // {"product_name": ..., "attributes": {...}} as shown to generators.
  std::string describe() const;

  bool operator==(const DomainKnowledgeItem&) const = default;
};

// Reads a JSON Lines catalog ({item_id, product_name, attributes[, category]}
// per line). Throws ParseError carrying the record index, or ValidationError
// on duplicate item ids.
std::vector<DomainKnowledgeItem> load_domain_knowledge(std::istream& in);
std::vector<DomainKnowledgeItem> load_domain_knowledge_file(
    const std::string& path);

}  // namespace agentprobe
