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

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "agentprobe/json_util.hpp"

namespace agentprobe {

enum class Direction { kRoot, kExploitation, kExploration, kExamination };
enum class NodeStatus { kLive, kPruned, kExhausted };

std::string_view to_string(Direction d);
std::string_view to_string(NodeStatus s);
Direction direction_from_string(std::string_view s);
NodeStatus status_from_string(std::string_view s);

// Expansion directions in merge order.
inline constexpr Direction kExpansionDirections[] = {
    Direction::kExploitation, Direction::kExploration, Direction::kExamination};

// A generator prompt in the prompt tree.
struct PromptNode {
  std::string node_id;
  std::string text;
  std::optional<std::string> parent;
  int depth = 0;
  Direction direction = Direction::kRoot;
  std::string reasoning;  // expansion rationale; empty for the root
  std::optional<double> score;           // mean reward of attributed queries
  std::optional<double> violation_rate;  // fraction of attributed failures
  int judged_count = 0;
  NodeStatus status = NodeStatus::kLive;
  std::uint64_t ordinal = 0;

  bool operator==(const PromptNode&) const = default;
};

struct JudgeVote {
  std::string judge_id;
  std::vector<std::string> selected_criteria;
  std::string rationale;
  bool abstained = false;

  bool operator==(const JudgeVote&) const = default;
};

// A user query in one query-refinement tree.
struct QueryNode {
  std::string node_id;
  std::string text;
  std::string origin_prompt;
  std::optional<std::string> parent;
  std::optional<std::string> strategy_id;
  std::string item_id;
  int iteration = 0;  // refinement iteration that produced it; 0 for seeds
  std::optional<std::string> answer;
  std::optional<double> reward;
  std::vector<std::string> kept_criteria;
  std::vector<std::string> violated_criteria;
  bool is_violation = false;
  std::optional<double> realism_score;  // in [1, 5]
  std::uint64_t ordinal = 0;

  bool judged() const { return reward.has_value(); }
  bool operator==(const QueryNode&) const = default;
};

// One (prompt, query, answer, reward) tuple as aggregated by reflection.
struct InteractionRecord {
  std::string prompt;
  std::string query;
  std::string query_text;
  std::string answer;
  double reward = 0.0;
  bool is_violation = false;
  std::vector<std::string> violated_criteria;
  std::vector<JudgeVote> judge_votes;

  bool operator==(const InteractionRecord&) const = default;
};

struct RunBudget {
  int prompt_iterations = 4;
  int prompt_beam = 2;
  int query_iterations = 3;
  int query_beam = 3;
  int queries_per_prompt = 5;
  std::optional<std::int64_t> max_total_tokens;
  std::uint64_t rng_seed = 0;

  bool operator==(const RunBudget&) const = default;
};

// Throws ValidationError when a count is below 1.
void validate_budget(const RunBudget& budget);

// Deterministic node id: prefix + 16 hex digits of
// sha256(parent id | creation ordinal | text).
std::string make_node_id(char prefix, std::string_view parent,
                         std::uint64_t ordinal, std::string_view text);

// Owns both search trees for a run. Single writer; nodes are addressed by id
// and kept in creation order.
class SearchTree {
 public:
  const PromptNode& add_root_prompt(std::string text);
  const PromptNode& add_child_prompt(const std::string& parent_id,
                                     std::string text, Direction direction,
                                     std::string reasoning);
  const QueryNode& add_seed_query(const std::string& origin_prompt,
                                  std::string text, std::string item_id);
  const QueryNode& add_child_query(const std::string& parent_id,
                                   std::string text, std::string strategy_id,
                                   int iteration);

  // Inserts a node that already carries an id and ordinal (deserialization).
  void insert(PromptNode node);
  void insert(QueryNode node);

  const PromptNode& prompt(const std::string& id) const;
  const QueryNode& query(const std::string& id) const;
  PromptNode& prompt_mut(const std::string& id);
  QueryNode& query_mut(const std::string& id);
  bool has_prompt(const std::string& id) const { return prompts_.count(id) > 0; }
  bool has_query(const std::string& id) const { return queries_.count(id) > 0; }

  // Creation-ordered ids.
  const std::vector<std::string>& prompt_ids() const { return prompt_order_; }
  const std::vector<std::string>& query_ids() const { return query_order_; }

  // Root of the query tree containing `query_id`.
  const QueryNode& seed_of(const std::string& query_id) const;

  std::uint64_t next_ordinal() const { return next_ordinal_; }

  // Throws IntegrityError when a parent chain is broken, a depth disagrees
  // with its path length, or a query's origin prompt is unknown.
  void check_well_formed() const;

  bool operator==(const SearchTree& other) const;

 private:
  std::map<std::string, PromptNode> prompts_;
  std::map<std::string, QueryNode> queries_;
  std::vector<std::string> prompt_order_;
  std::vector<std::string> query_order_;
  std::uint64_t next_ordinal_ = 0;
};

void to_json(json& j, const PromptNode& n);
void from_json(const json& j, PromptNode& n);
void to_json(json& j, const JudgeVote& v);
void from_json(const json& j, JudgeVote& v);
void to_json(json& j, const QueryNode& n);
void from_json(const json& j, QueryNode& n);
void to_json(json& j, const InteractionRecord& r);
void from_json(const json& j, InteractionRecord& r);
void to_json(json& j, const RunBudget& b);
void from_json(const json& j, RunBudget& b);

json tree_to_json(const SearchTree& tree);
SearchTree tree_from_json(const json& j);

}  // namespace agentprobe
