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

#include "agentprobe/query_refinement.hpp"

#include <algorithm>
#include <map>

#include "agentprobe/error.hpp"
#include "agentprobe/parallel.hpp"

namespace agentprobe {

void apply_evaluation(QueryNode& node, const Evaluation& e) {
  node.answer = e.answer;
  node.reward = e.verdict.reward;
  node.kept_criteria = e.verdict.kept_criteria;
  node.is_violation = e.verdict.is_violation;
  node.violated_criteria = e.violated_criteria;
  node.realism_score = e.realism;
}

void to_json(json& j, const StrategyStats& s) {
  j = json{{"strategy_id", s.strategy_id},
           {"applications", s.applications},
           {"degenerate", s.degenerate}};
  j["mean_reward_delta"] =
      s.mean_reward_delta ? json(*s.mean_reward_delta) : json(nullptr);
}

void from_json(const json& j, StrategyStats& s) {
  s.strategy_id = j.at("strategy_id").get<std::string>();
  s.applications = j.value("applications", 0);
  s.degenerate = j.value("degenerate", 0);
  if (j.contains("mean_reward_delta") && !j["mean_reward_delta"].is_null()) {
    s.mean_reward_delta = j["mean_reward_delta"].get<double>();
  } else {
    s.mean_reward_delta.reset();
  }
}

std::vector<std::string> select_queries(const std::vector<const QueryNode*>& pool, int k) {
  for (const auto* n : pool) {
    if (!n->judged()) throw PreconditionError("query " + n->node_id + " is not judged");
  }
  std::vector<const QueryNode*> sorted(pool);
  std::sort(sorted.begin(), sorted.end(), [](const QueryNode* a, const QueryNode* b) {
    if (*a->reward != *b->reward) return *a->reward < *b->reward;
    if (a->ordinal != b->ordinal) return a->ordinal < b->ordinal;
    return a->node_id < b->node_id;
  });
  const auto keep = std::min<std::size_t>(sorted.size(), static_cast<std::size_t>(std::max(k, 0)));
  std::vector<std::string> out;
  for (std::size_t i = 0; i < keep; ++i) out.push_back(sorted[i]->node_id);
  return out;
}

std::vector<std::string> select_strategies(const std::vector<StrategyStats>& stats,
                                           int min_active) {
  std::vector<bool> keep(stats.size(), false);
  std::size_t kept = 0;
  for (std::size_t i = 0; i < stats.size(); ++i) {
    const auto& s = stats[i];
    if (s.applications == 0 || (s.mean_reward_delta && *s.mean_reward_delta < 0.0)) {
      keep[i] = true;
      ++kept;
    }
  }
  std::vector<std::size_t> retirees;
  for (std::size_t i = 0; i < stats.size(); ++i) {
    if (!keep[i]) retirees.push_back(i);
  }
  std::stable_sort(retirees.begin(), retirees.end(), [&](std::size_t a, std::size_t b) {
    const auto& da = stats[a].mean_reward_delta;
    const auto& db = stats[b].mean_reward_delta;
    if (da.has_value() != db.has_value()) return da.has_value();
    return da && *da < *db;
  });
  for (std::size_t r : retirees) {
    if (kept >= static_cast<std::size_t>(std::max(min_active, 0))) break;
    keep[r] = true;
    ++kept;
  }
  std::vector<std::string> out;
  for (std::size_t i = 0; i < stats.size(); ++i) {
    if (keep[i]) out.push_back(stats[i].strategy_id);
  }
  return out;
}

std::string QueryExpander::rewrite(const std::string& query,
                                   const StrategySpec& strategy) const {
  ChatRequest req;
  req.backend_id = backend_;
  req.temperature = temperature_;
  req.tag = "query:expand";
  if (strategy.category == StrategyCategory::kPerturbation) {
    req.user = templates_.render("query_perturbation",
                                 {{"current_query", query}, {"strategy", strategy.description}});
  } else {
    req.user = templates_.render(
        "query_roleplay",
        {{"current_query", query}, {"strategy_description", strategy.description}},
        {{"STRATEGY_TYPE", strategy.level_or_type}});
  }
  std::string text = trim(gateway_.complete(req).text);
  if (text.size() >= 2 && text.front() == '"' && text.back() == '"') {
    text = trim(text.substr(1, text.size() - 2));
  }
  if (text.empty()) throw ExpansionDegenerateError("rewrite is empty");
  if (text == trim(query)) throw ExpansionDegenerateError("rewrite equals its input");
  return text;
}

const QueryNode& expand_query(SearchTree& tree, const std::string& parent_id,
                              const StrategySpec& strategy, const QueryExpander& expander,
                              int iteration) {
  if (!strategy.active) {
    throw PreconditionError("strategy " + strategy.strategy_id + " is retired");
  }
  const std::string text = expander.rewrite(tree.query(parent_id).text, strategy);
  return tree.add_child_query(parent_id, text, strategy.strategy_id, iteration);
}

namespace {

void evaluate_nodes(SearchTree& tree, const std::vector<std::string>& ids,
                    const Evaluator& evaluate, int parallelism, const RefineHooks& hooks,
                    std::vector<std::string>& judged) {
  auto results = parallel_map<Evaluation>(ids.size(), parallelism, [&](std::size_t i) {
    return evaluate(tree.query(ids[i]));
  });
  for (std::size_t i = 0; i < ids.size(); ++i) {
    auto& node = tree.query_mut(ids[i]);
    apply_evaluation(node, results[i]);
    judged.push_back(ids[i]);
    if (hooks.evaluated) hooks.evaluated(node, results[i]);
  }
}

}  // namespace

RefineResult refine(SearchTree& tree, const std::vector<std::string>& seeds,
                    const RefinementConfig& config, const QueryExpander& expander,
                    const Evaluator& evaluate, const RefineHooks& hooks) {
  RefineResult result;
  if (seeds.empty()) return result;

  std::vector<std::string> unjudged;
  for (const auto& id : seeds) {
    if (!tree.query(id).judged()) unjudged.push_back(id);
  }
  evaluate_nodes(tree, unjudged, evaluate, config.parallelism, hooks, result.judged);

  std::vector<const StrategySpec*> active;
  for (const auto& s : config.strategies) active.push_back(&s);
  std::vector<std::string> beam = seeds;

  for (int it = 1; it <= config.iterations; ++it) {
    struct Job {
      std::string parent;
      const StrategySpec* strategy;
    };
    std::vector<Job> jobs;
    for (const auto& b : beam) {
      for (const auto* s : active) jobs.push_back({b, s});
    }
    struct Outcome {
      std::optional<std::string> text;
      std::string reason;
    };
    auto outcomes = parallel_map<Outcome>(jobs.size(), config.parallelism, [&](std::size_t i) {
      try {
        return Outcome{expander.rewrite(tree.query(jobs[i].parent).text, *jobs[i].strategy), {}};
      } catch (const ExpansionDegenerateError& e) {
        return Outcome{std::nullopt, e.what()};
      }
    });

    std::map<std::string, StrategyStats> stats;
    for (const auto* s : active) stats[s->strategy_id].strategy_id = s->strategy_id;
    std::vector<std::string> children;
    for (std::size_t i = 0; i < jobs.size(); ++i) {
      auto& st = stats[jobs[i].strategy->strategy_id];
      ++st.applications;
      if (!outcomes[i].text) {
        ++st.degenerate;
        if (hooks.degenerate) {
          hooks.degenerate(jobs[i].parent, jobs[i].strategy->strategy_id, it,
                           outcomes[i].reason);
        }
        continue;
      }
      const auto& child = tree.add_child_query(jobs[i].parent, *outcomes[i].text,
                                               jobs[i].strategy->strategy_id, it);
      children.push_back(child.node_id);
      if (hooks.created) hooks.created(child);
    }
    evaluate_nodes(tree, children, evaluate, config.parallelism, hooks, result.judged);

    std::map<std::string, std::pair<double, int>> deltas;
    for (const auto& id : children) {
      const auto& c = tree.query(id);
      auto& d = deltas[*c.strategy_id];
      d.first += *c.reward - *tree.query(*c.parent).reward;
      d.second += 1;
    }
    IterationReport report;
    report.iteration = it;
    for (const auto* s : active) {
      auto st = stats[s->strategy_id];
      if (auto d = deltas.find(s->strategy_id); d != deltas.end()) {
        st.mean_reward_delta = d->second.first / d->second.second;
      }
      report.applied.push_back(s->strategy_id);
      report.stats.push_back(std::move(st));
    }

    // Seeds are retired after the first expansion; afterwards the current
    // beam competes with its children. An empty pool keeps the beam.
    std::vector<const QueryNode*> pool;
    if (it > 1) {
      for (const auto& id : beam) pool.push_back(&tree.query(id));
    }
    for (const auto& id : children) pool.push_back(&tree.query(id));
    if (!pool.empty()) beam = select_queries(pool, config.beam);

    report.next_active = select_strategies(report.stats, config.min_active_strategies);
    std::vector<const StrategySpec*> next;
    for (const auto* s : active) {
      if (std::find(report.next_active.begin(), report.next_active.end(), s->strategy_id) !=
          report.next_active.end()) {
        next.push_back(s);
      }
    }
    active = std::move(next);
    report.beam = beam;
    if (hooks.selected) hooks.selected(report);
    result.iterations.push_back(std::move(report));
  }
  result.beam = std::move(beam);
  return result;
}

}  // namespace agentprobe
