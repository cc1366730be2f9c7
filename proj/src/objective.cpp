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

#include "agentprobe/objective.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "agentprobe/error.hpp"

namespace agentprobe {

const Criterion* ObjectiveSpec::find(std::string_view id) const {
  for (const auto& c : criteria) {
    if (c.id == id) return &c;
  }
  return nullptr;
}

std::vector<const Criterion*> ObjectiveSpec::compliance_criteria() const {
  std::vector<const Criterion*> out;
  for (const auto& c : criteria) {
    if (c.weight >= violation_threshold) out.push_back(&c);
  }
  return out;
}

std::vector<const Criterion*> ObjectiveSpec::failure_criteria() const {
  std::vector<const Criterion*> out;
  for (const auto& c : criteria) {
    if (c.weight < violation_threshold) out.push_back(&c);
  }
  return out;
}

ObjectiveSpec validate_objective(ObjectiveSpec spec) {
  if (spec.criteria.empty()) throw ValidationError("criteria empty");
  std::set<std::string> ids;
  for (const auto& c : spec.criteria) {
    if (c.id.empty()) throw ValidationError("criterion id empty");
    if (!ids.insert(c.id).second) {
      throw ValidationError("duplicate criterion id '" + c.id + "'");
    }
    if (c.description.empty()) {
      throw ValidationError("criterion '" + c.id + "' description empty");
    }
    if (!(c.weight >= 0.0 && c.weight <= 1.0)) {
      throw ValidationError("criterion '" + c.id + "' weight outside [0,1]");
    }
  }
  if (spec.judge_roster.size() % 2 == 0) {
    throw ValidationError("judge roster must be odd");
  }
  if (spec.judge_roster.size() < 3) {
    throw ValidationError("judge roster must have at least 3 judges");
  }
  if (!(spec.violation_threshold > 0.0 && spec.violation_threshold <= 1.0)) {
    throw ValidationError("violation threshold outside (0,1]");
  }
  return spec;
}

const std::string& default_realism_definition() {
  static const std::string kText =
      "How closely a query resembles something a real shopper would naturally "
      "and plausibly ask when interacting with a shopping assistant: short "
      "keywords or a brief natural question, no unnecessary backstory, no "
      "rigid structure, no machine artifacts.";
  return kText;
}

ObjectiveSpec helpfulness_objective(std::vector<std::string> judges,
                                    std::vector<std::string> realism_judges) {
  ObjectiveSpec spec;
  spec.name = "helpfulness";
  spec.criteria = {
      {"unhelpful",
       "0 - Unhelpful: the response answers a related but slightly deviating "
       "aspect; gives general, vague, promotional or boilerplate language "
       "without addressing the specific goal; states that details are missing "
       "without offering alternatives; stays qualitative without quantities, "
       "materials or named entities; fails to explain the process for a 'how' "
       "question; or otherwise fails to give a comprehensive answer to the "
       "user's goal.",
       0.0},
      {"partially_helpful",
       "1 - Obvious/Partially helpful: the response gives basic, expected "
       "answers without new insight; repeats information from the question "
       "without additional context (not applicable to yes/no confirmation "
       "questions); or addresses only part of the question or gives "
       "incomplete details.",
       0.5},
      {"helpful",
       "2 - Helpful: the response directly and completely fulfils the user's "
       "goal (reasonably inferring it when unclear); provides all necessary "
       "specifics without gaps; addresses exactly the asked aspects and "
       "explains the relevance of included facts; gives clear step-by-step "
       "instructions for 'how' questions; offers alternatives, workarounds or "
       "authoritative sources when requested details are missing.",
       1.0},
  };
  spec.violation_threshold = 0.5;
  spec.realism_definition = default_realism_definition();
  spec.judge_roster = std::move(judges);
  spec.realism_roster = std::move(realism_judges);
  return spec;
}

void to_json(json& j, const Criterion& c) {
  j = json{{"id", c.id}, {"description", c.description}, {"weight", c.weight}};
}

void from_json(const json& j, Criterion& c) {
  c.id = j.at("id").get<std::string>();
  c.description = j.at("description").get<std::string>();
  c.weight = j.at("weight").get<double>();
}

void to_json(json& j, const ObjectiveSpec& s) {
  j = json{{"name", s.name},
           {"criteria", s.criteria},
           {"violation_threshold", s.violation_threshold},
           {"realism_definition", s.realism_definition},
           {"judge_roster", s.judge_roster},
           {"realism_roster", s.realism_roster}};
}

void from_json(const json& j, ObjectiveSpec& s) {
  s.name = j.value("name", std::string{});
  s.criteria = j.value("criteria", std::vector<Criterion>{});
  s.violation_threshold = j.value("violation_threshold", 0.5);
  s.realism_definition =
      j.value("realism_definition", default_realism_definition());
  s.judge_roster = j.value("judge_roster", std::vector<std::string>{});
  s.realism_roster = j.value("realism_roster", std::vector<std::string>{});
}

std::string DomainKnowledgeItem::describe() const {
  ordered_json attrs = ordered_json::object();
  for (const auto& [k, v] : attributes) attrs[k] = v;
  ordered_json j;
  j["product_name"] = name;
  j["attributes"] = attrs;
  return j.dump(2);
}

std::vector<DomainKnowledgeItem> load_domain_knowledge(std::istream& in) {
  std::vector<DomainKnowledgeItem> items;
  std::set<std::string> seen;
  std::string line;
  long index = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    auto j = ordered_json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      throw ParseError("catalog record is not a JSON object", index);
    }
    DomainKnowledgeItem item;
    try {
      item.item_id = j.at("item_id").get<std::string>();
      item.name = j.at("product_name").get<std::string>();
      if (j.contains("category")) item.category = j["category"].get<std::string>();
      if (j.contains("attributes")) {
        const auto& attrs = j["attributes"];
        if (!attrs.is_object()) {
          throw ParseError("catalog attributes must be an object", index);
        }
        for (auto it = attrs.begin(); it != attrs.end(); ++it) {
          item.attributes.emplace_back(it.key(), it.value().get<std::string>());
        }
      }
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("catalog record malformed: ") + e.what(),
                       index);
    }
    if (!seen.insert(item.item_id).second) {
      throw ValidationError("duplicate item_id '" + item.item_id +
                            "' at record " + std::to_string(index));
    }
    items.push_back(std::move(item));
    ++index;
  }
  return items;
}

std::vector<DomainKnowledgeItem> load_domain_knowledge_file(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open catalog " + path);
  return load_domain_knowledge(in);
}

}  // namespace agentprobe
