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

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "agentprobe/gateway.hpp"
#include "agentprobe/judging.hpp"
#include "agentprobe/strategies.hpp"
#include "agentprobe/templates.hpp"
#include "agentprobe/tree.hpp"

namespace agentprobe {

// Outcome of sending one query to the agent and judging the answer.
struct Evaluation {
  std::string answer;
  JudgeVerdict verdict;
  std::vector<std::string> violated_criteria;
  std::optional<double> realism;
};

void apply_evaluation(QueryNode& node, const Evaluation& evaluation);

using Evaluator = std::function<Evaluation(const QueryNode&)>;

struct StrategyStats {
  std::string strategy_id;
  int applications = 0;  // expansion attempts, degenerate ones included
  int degenerate = 0;
  std::optional<double> mean_reward_delta;  // child minus parent, over kept children

  bool operator==(const StrategyStats&) const = default;
};

void to_json(json& j, const StrategyStats& s);
void from_json(const json& j, StrategyStats& s);

struct RefinementConfig {
  int iterations = 3;
  int beam = 3;
  std::vector<StrategySpec> strategies = default_strategies();
  int min_active_strategies = 2;
  int parallelism = 1;
};

// The k smallest-reward nodes; ties go to the older ordinal, then the smaller
// node id. Result is in selection order. Throws PreconditionError on an
// unjudged node.
std::vector<std::string> select_queries(const std::vector<const QueryNode*>& pool, int k);

// Active strategies for the next iteration, in the order of `stats`:
// negative mean delta or no application keeps a strategy; if fewer than
// `min_active` remain, retirees with the best delta are reactivated
// (undefined delta ranks last, then input order).
std::vector<std::string> select_strategies(const std::vector<StrategyStats>& stats,
                                           int min_active);

// Rewrites queries through the perturbation / role-playing templates.
class QueryExpander {
 public:
  QueryExpander(Gateway& gateway, const TemplateSet& templates, std::string backend,
                double temperature = 1.0)
      : gateway_(gateway),
        templates_(templates),
        backend_(std::move(backend)),
        temperature_(temperature) {}

  // Tag "query:expand". Throws ExpansionDegenerateError when the rewrite is
  // empty or equal to the input after trimming.
  std::string rewrite(const std::string& query, const StrategySpec& strategy) const;

 private:
  Gateway& gateway_;
  const TemplateSet& templates_;
  std::string backend_;
  double temperature_;
};

// Creates the child of `parent_id` produced by `strategy`.
const QueryNode& expand_query(SearchTree& tree, const std::string& parent_id,
                              const StrategySpec& strategy, const QueryExpander& expander,
                              int iteration);

struct IterationReport {
  int iteration = 0;
  std::vector<std::string> applied;  // strategies active during the iteration
  std::vector<StrategyStats> stats;
  std::vector<std::string> beam;          // after selection
  std::vector<std::string> next_active;
};

struct RefineHooks {
  std::function<void(const QueryNode&)> created;
  std::function<void(const std::string& parent, const std::string& strategy,
                     int iteration, const std::string& reason)>
      degenerate;
  std::function<void(const QueryNode&, const Evaluation&)> evaluated;
  std::function<void(const IterationReport&)> selected;
};

struct RefineResult {
  std::vector<std::string> judged;  // every node judged by this call, creation order
  std::vector<std::string> beam;
  std::vector<IterationReport> iterations;
};

// Dual selection plus expansion. Unjudged seeds are evaluated first. Each
// iteration expands every beam query with every active strategy, evaluates
// the children, then selects the next beam (children only after the first
// iteration's expansion, beam plus children afterwards) and the next active
// strategy set. Expansion and evaluation run concurrently; nodes are created
// and hooks fire in (beam order, catalog order).
RefineResult refine(SearchTree& tree, const std::vector<std::string>& seeds,
                    const RefinementConfig& config, const QueryExpander& expander,
                    const Evaluator& evaluate, const RefineHooks& hooks = {});

}  // namespace agentprobe
