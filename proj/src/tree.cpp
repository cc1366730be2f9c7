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

#include "agentprobe/tree.hpp"

#include <algorithm>

#include "agentprobe/error.hpp"
#include "agentprobe/hash.hpp"

namespace agentprobe {

std::string_view to_string(Direction d) {
  switch (d) {
    case Direction::kRoot: return "root";
    case Direction::kExploitation: return "exploitation";
    case Direction::kExploration: return "exploration";
    case Direction::kExamination: return "examination";
  }
  return "root";
}

std::string_view to_string(NodeStatus s) {
  switch (s) {
    case NodeStatus::kLive: return "live";
    case NodeStatus::kPruned: return "pruned";
    case NodeStatus::kExhausted: return "exhausted";
  }
  return "live";
}

Direction direction_from_string(std::string_view s) {
  for (Direction d : {Direction::kRoot, Direction::kExploitation,
                      Direction::kExploration, Direction::kExamination}) {
    if (to_string(d) == s) return d;
  }
  throw ParseError("unknown direction '" + std::string(s) + "'");
}

NodeStatus status_from_string(std::string_view s) {
  for (NodeStatus st :
       {NodeStatus::kLive, NodeStatus::kPruned, NodeStatus::kExhausted}) {
    if (to_string(st) == s) return st;
  }
  throw ParseError("unknown node status '" + std::string(s) + "'");
}

void validate_budget(const RunBudget& b) {
  if (b.prompt_iterations < 1 || b.prompt_beam < 1 || b.query_iterations < 1 ||
      b.query_beam < 1 || b.queries_per_prompt < 1) {
    throw ValidationError("budget counts must be >= 1");
  }
  if (b.max_total_tokens && *b.max_total_tokens < 0) {
    throw ValidationError("max_total_tokens must be non-negative");
  }
}

std::string make_node_id(char prefix, std::string_view parent,
                         std::uint64_t ordinal, std::string_view text) {
  std::string material;
  material.reserve(parent.size() + text.size() + 24);
  material.append(parent);
  material.push_back('|');
  material.append(std::to_string(ordinal));
  material.push_back('|');
  material.append(text);
  return std::string(1, prefix) + "-" + sha256_hex(material).substr(0, 16);
}

const PromptNode& SearchTree::add_root_prompt(std::string text) {
  PromptNode n;
  n.ordinal = next_ordinal_;
  n.node_id = make_node_id('p', "", n.ordinal, text);
  n.text = std::move(text);
  insert(n);
  return prompts_.at(n.node_id);
}

const PromptNode& SearchTree::add_child_prompt(const std::string& parent_id,
                                               std::string text,
                                               Direction direction,
                                               std::string reasoning) {
  const PromptNode& parent = prompt(parent_id);
  PromptNode n;
  n.ordinal = next_ordinal_;
  n.node_id = make_node_id('p', parent_id, n.ordinal, text);
  n.text = std::move(text);
  n.parent = parent_id;
  n.depth = parent.depth + 1;
  n.direction = direction;
  n.reasoning = std::move(reasoning);
  insert(n);
  return prompts_.at(n.node_id);
}

const QueryNode& SearchTree::add_seed_query(const std::string& origin_prompt,
                                            std::string text,
                                            std::string item_id) {
  if (!has_prompt(origin_prompt)) {
    throw IntegrityError("unknown origin prompt " + origin_prompt);
  }
  QueryNode n;
  n.ordinal = next_ordinal_;
  n.node_id = make_node_id('q', origin_prompt, n.ordinal, text);
  n.text = std::move(text);
  n.origin_prompt = origin_prompt;
  n.item_id = std::move(item_id);
  insert(n);
  return queries_.at(n.node_id);
}

const QueryNode& SearchTree::add_child_query(const std::string& parent_id,
                                             std::string text,
                                             std::string strategy_id,
                                             int iteration) {
  const QueryNode& parent = query(parent_id);
  QueryNode n;
  n.ordinal = next_ordinal_;
  n.node_id = make_node_id('q', parent_id, n.ordinal, text);
  n.text = std::move(text);
  n.origin_prompt = parent.origin_prompt;
  n.parent = parent_id;
  n.strategy_id = std::move(strategy_id);
  n.item_id = parent.item_id;
  n.iteration = iteration;
  insert(n);
  return queries_.at(n.node_id);
}

void SearchTree::insert(PromptNode node) {
  if (prompts_.count(node.node_id)) {
    throw IntegrityError("duplicate prompt id " + node.node_id);
  }
  next_ordinal_ = std::max(next_ordinal_, node.ordinal + 1);
  prompt_order_.push_back(node.node_id);
  auto id = node.node_id;
  prompts_.emplace(std::move(id), std::move(node));
}

void SearchTree::insert(QueryNode node) {
  if (queries_.count(node.node_id)) {
    throw IntegrityError("duplicate query id " + node.node_id);
  }
  next_ordinal_ = std::max(next_ordinal_, node.ordinal + 1);
  query_order_.push_back(node.node_id);
  auto id = node.node_id;
  queries_.emplace(std::move(id), std::move(node));
}

const PromptNode& SearchTree::prompt(const std::string& id) const {
  auto it = prompts_.find(id);
  if (it == prompts_.end()) throw IntegrityError("unknown prompt " + id);
  return it->second;
}

const QueryNode& SearchTree::query(const std::string& id) const {
  auto it = queries_.find(id);
  if (it == queries_.end()) throw IntegrityError("unknown query " + id);
  return it->second;
}

PromptNode& SearchTree::prompt_mut(const std::string& id) {
  return const_cast<PromptNode&>(std::as_const(*this).prompt(id));
}

QueryNode& SearchTree::query_mut(const std::string& id) {
  return const_cast<QueryNode&>(std::as_const(*this).query(id));
}

const QueryNode& SearchTree::seed_of(const std::string& query_id) const {
  const QueryNode* n = &query(query_id);
  std::size_t steps = 0;
  while (n->parent) {
    if (++steps > queries_.size()) {
      throw IntegrityError("query parent cycle at " + query_id);
    }
    n = &query(*n->parent);
  }
  return *n;
}

void SearchTree::check_well_formed() const {
  for (const auto& [id, n] : prompts_) {
    if (n.depth < 0) throw IntegrityError("negative depth at " + id);
    if (!n.parent) {
      if (n.depth != 0) throw IntegrityError("root with depth != 0: " + id);
      continue;
    }
    const PromptNode* cur = &n;
    int steps = 0;
    while (cur->parent) {
      if (++steps > n.depth) {
        throw IntegrityError("prompt chain longer than depth at " + id);
      }
      auto it = prompts_.find(*cur->parent);
      if (it == prompts_.end()) {
        throw IntegrityError("dangling prompt parent at " + id);
      }
      cur = &it->second;
    }
    if (steps != n.depth) {
      throw IntegrityError("depth disagrees with path length at " + id);
    }
  }
  for (const auto& [id, n] : queries_) {
    if (!prompts_.count(n.origin_prompt)) {
      throw IntegrityError("query " + id + " has unknown origin prompt");
    }
    if (n.parent) {
      auto it = queries_.find(*n.parent);
      if (it == queries_.end()) {
        throw IntegrityError("dangling query parent at " + id);
      }
      if (!n.strategy_id) {
        throw IntegrityError("refined query without strategy at " + id);
      }
    }
    if (n.realism_score && (*n.realism_score < 1.0 || *n.realism_score > 5.0)) {
      throw IntegrityError("realism score out of range at " + id);
    }
  }
}

bool SearchTree::operator==(const SearchTree& other) const {
  return prompts_ == other.prompts_ && queries_ == other.queries_ &&
         prompt_order_ == other.prompt_order_ &&
         query_order_ == other.query_order_ &&
         next_ordinal_ == other.next_ordinal_;
}

namespace {

template <typename T>
void put_optional(json& j, const char* key, const std::optional<T>& v) {
  if (v) {
    j[key] = *v;
  } else {
    j[key] = nullptr;
  }
}

template <typename T>
std::optional<T> get_optional(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return it->get<T>();
}

}  // namespace

void to_json(json& j, const PromptNode& n) {
  j = json{{"node_id", n.node_id},
           {"text", n.text},
           {"depth", n.depth},
           {"direction", to_string(n.direction)},
           {"reasoning", n.reasoning},
           {"judged_count", n.judged_count},
           {"status", to_string(n.status)},
           {"ordinal", n.ordinal}};
  put_optional(j, "parent", n.parent);
  put_optional(j, "score", n.score);
  put_optional(j, "violation_rate", n.violation_rate);
}

void from_json(const json& j, PromptNode& n) {
  n.node_id = j.at("node_id").get<std::string>();
  n.text = j.at("text").get<std::string>();
  n.parent = get_optional<std::string>(j, "parent");
  n.depth = j.at("depth").get<int>();
  n.direction = direction_from_string(j.at("direction").get<std::string>());
  n.reasoning = j.value("reasoning", std::string{});
  n.score = get_optional<double>(j, "score");
  n.violation_rate = get_optional<double>(j, "violation_rate");
  n.judged_count = j.value("judged_count", 0);
  n.status = status_from_string(j.value("status", std::string("live")));
  n.ordinal = j.at("ordinal").get<std::uint64_t>();
}

void to_json(json& j, const JudgeVote& v) {
  j = json{{"judge_id", v.judge_id},
           {"selected_criteria", v.selected_criteria},
           {"rationale", v.rationale},
           {"abstained", v.abstained}};
}

void from_json(const json& j, JudgeVote& v) {
  v.judge_id = j.at("judge_id").get<std::string>();
  v.selected_criteria = j.at("selected_criteria").get<std::vector<std::string>>();
  v.rationale = j.value("rationale", std::string{});
  v.abstained = j.value("abstained", false);
}

void to_json(json& j, const QueryNode& n) {
  j = json{{"node_id", n.node_id},
           {"text", n.text},
           {"origin_prompt", n.origin_prompt},
           {"item_id", n.item_id},
           {"iteration", n.iteration},
           {"kept_criteria", n.kept_criteria},
           {"violated_criteria", n.violated_criteria},
           {"is_violation", n.is_violation},
           {"ordinal", n.ordinal}};
  put_optional(j, "parent", n.parent);
  put_optional(j, "strategy_id", n.strategy_id);
  put_optional(j, "answer", n.answer);
  put_optional(j, "reward", n.reward);
  put_optional(j, "realism_score", n.realism_score);
}

void from_json(const json& j, QueryNode& n) {
  n.node_id = j.at("node_id").get<std::string>();
  n.text = j.at("text").get<std::string>();
  n.origin_prompt = j.at("origin_prompt").get<std::string>();
  n.parent = get_optional<std::string>(j, "parent");
  n.strategy_id = get_optional<std::string>(j, "strategy_id");
  n.item_id = j.value("item_id", std::string{});
  n.iteration = j.value("iteration", 0);
  n.answer = get_optional<std::string>(j, "answer");
  n.reward = get_optional<double>(j, "reward");
  n.kept_criteria = j.value("kept_criteria", std::vector<std::string>{});
  n.violated_criteria = j.value("violated_criteria", std::vector<std::string>{});
  n.is_violation = j.value("is_violation", false);
  n.realism_score = get_optional<double>(j, "realism_score");
  n.ordinal = j.at("ordinal").get<std::uint64_t>();
}

void to_json(json& j, const InteractionRecord& r) {
  j = json{{"prompt", r.prompt},
           {"query", r.query},
           {"query_text", r.query_text},
           {"answer", r.answer},
           {"reward", r.reward},
           {"is_violation", r.is_violation},
           {"violated_criteria", r.violated_criteria},
           {"judge_votes", r.judge_votes}};
}

void from_json(const json& j, InteractionRecord& r) {
  r.prompt = j.at("prompt").get<std::string>();
  r.query = j.at("query").get<std::string>();
  r.query_text = j.value("query_text", std::string{});
  r.answer = j.at("answer").get<std::string>();
  r.reward = j.at("reward").get<double>();
  r.is_violation = j.value("is_violation", false);
  r.violated_criteria = j.value("violated_criteria", std::vector<std::string>{});
  r.judge_votes = j.value("judge_votes", std::vector<JudgeVote>{});
}

void to_json(json& j, const RunBudget& b) {
  j = json{{"prompt_iterations", b.prompt_iterations},
           {"prompt_beam", b.prompt_beam},
           {"query_iterations", b.query_iterations},
           {"query_beam", b.query_beam},
           {"queries_per_prompt", b.queries_per_prompt},
           {"rng_seed", b.rng_seed}};
  put_optional(j, "max_total_tokens", b.max_total_tokens);
}

void from_json(const json& j, RunBudget& b) {
  RunBudget d;
  b.prompt_iterations = j.value("prompt_iterations", d.prompt_iterations);
  b.prompt_beam = j.value("prompt_beam", d.prompt_beam);
  b.query_iterations = j.value("query_iterations", d.query_iterations);
  b.query_beam = j.value("query_beam", d.query_beam);
  b.queries_per_prompt = j.value("queries_per_prompt", d.queries_per_prompt);
  b.max_total_tokens = get_optional<std::int64_t>(j, "max_total_tokens");
  b.rng_seed = j.value("rng_seed", d.rng_seed);
}

json tree_to_json(const SearchTree& tree) {
  json prompts = json::array();
  for (const auto& id : tree.prompt_ids()) prompts.push_back(tree.prompt(id));
  json queries = json::array();
  for (const auto& id : tree.query_ids()) queries.push_back(tree.query(id));
  return json{{"prompts", prompts}, {"queries", queries}};
}

SearchTree tree_from_json(const json& j) {
  SearchTree tree;
  for (const auto& p : j.at("prompts")) tree.insert(p.get<PromptNode>());
  for (const auto& q : j.at("queries")) tree.insert(q.get<QueryNode>());
  return tree;
}

}  // namespace agentprobe
