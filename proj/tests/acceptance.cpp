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

// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// nonzero when any criterion fails.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "agentprobe/error.hpp"
#include "agentprobe/event_log.hpp"
#include "agentprobe/judging.hpp"
#include "agentprobe/metrics.hpp"
#include "agentprobe/orchestrator.hpp"
#include "agentprobe/prompt_refinement.hpp"
#include "agentprobe/query_refinement.hpp"
#include "agentprobe/text.hpp"
#include "test_support.hpp"

using namespace agentprobe;
namespace fs = std::filesystem;

namespace {

// Tolerances.
constexpr double kMtldTol = 1e-9;
constexpr double kDeltaTol = 0.005;
constexpr double kRewardTol = 1e-12;
constexpr double kMetricSeconds = 5.0;

struct Failure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void require(bool ok, const std::string& what) {
  if (!ok) throw Failure(what);
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::vector<RunEvent> events_in(const std::string& dir) {
  return read_event_log((fs::path(dir) / kEventLogFile).string()).events;
}

// ---- 1: metric oracles ----

double distinct_oracle(const std::vector<std::string>& queries, int n) {
  std::multiset<std::vector<std::string>> all;
  for (const auto& q : queries) {
    const auto t = tokenize(q);
    for (std::size_t i = 0; i + n <= t.size(); ++i) {
      all.emplace(t.begin() + static_cast<long>(i), t.begin() + static_cast<long>(i) + n);
    }
  }
  const std::set<std::vector<std::string>> unique(all.begin(), all.end());
  return static_cast<double>(unique.size()) / static_cast<double>(all.size());
}

std::vector<std::string> random_words(std::mt19937_64& rng, std::size_t len, int vocab) {
  std::uniform_int_distribution<int> pick(0, vocab - 1);
  std::vector<std::string> out;
  for (std::size_t i = 0; i < len; ++i) out.push_back("w" + std::to_string(pick(rng)));
  return out;
}

std::string metric_oracles() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(20240601);
  int checked = 0;
  for (int c = 0; c < 200; ++c) {
    std::vector<std::string> corpus;
    const auto nq = 1 + rng() % 50;
    for (std::size_t q = 0; q < nq; ++q) {
      std::string text;
      for (const auto& w : random_words(rng, 3 + rng() % 10, 5 + static_cast<int>(rng() % 30))) {
        text += w + " ";
      }
      corpus.push_back(text);
    }
    for (int n = 1; n <= 3; ++n) {
      require(distinct_n(corpus, n) == distinct_oracle(corpus, n),
              "distinct@" + std::to_string(n) + " differs on corpus " + std::to_string(c));
      ++checked;
    }
  }
  require(std::fabs(mtld_tokens(std::vector<std::string>(10, "a")) - 2.0) <= kMtldTol,
          "MTLD of a x10 is not 2.0");
  require(std::fabs(mtld_tokens({"a", "b", "c", "d", "e", "f", "g", "h"}) - 8.0) <= kMtldTol,
          "MTLD of 8 unique tokens is not 8.0");
  for (int i = 0; i < 100; ++i) {
    auto s = random_words(rng, 10 + rng() % 300, 2 + static_cast<int>(rng() % 60));
    const double fwd = mtld_tokens(s);
    std::reverse(s.begin(), s.end());
    require(std::fabs(mtld_tokens(s) - fwd) <= kMtldTol, "MTLD not reversal symmetric");
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  require(secs < kMetricSeconds, "metric oracles took " + format_fixed(secs, 2) + "s");
  return std::to_string(checked) + " distinct checks, 100 reversal streams, " +
         format_fixed(secs, 2) + "s";
}

// ---- 2: deltas and ratios ----

std::string deltas_and_ratios() {
  struct Case {
    const char* name;
    double value;
    double baseline;
    double printed;
  };
  const Case cases[] = {{"MTLD", 92.40, 88.90, 3.94},
                        {"1-CosSim", 0.55, 0.53, 3.77},
                        {"GEPA MTLD", 50.33, 88.90, -43.39}};
  for (const auto& c : cases) {
    const double d = round_to(delta_percent(c.value, c.baseline), 2);
    require(std::fabs(d - c.printed) <= kDeltaTol,
            std::string(c.name) + " delta " + format_fixed(d, 2));
  }
  const std::pair<double, double> ratios[] = {{18612.0, 1.3}, {39072.0, 2.8}};
  for (const auto& [tokens, printed] : ratios) {
    const double r = round_to(cost_ratio(tokens, 14073.0), 1);
    require(std::fabs(r - printed) <= kDeltaTol, "cost ratio " + format_cost_ratio(r));
  }
  require(format_delta(delta_percent(92.40, 88.90)) == "+3.94", "MTLD delta rendering");
  require(format_cost_ratio(cost_ratio(39072, 14073)) == "x2.8", "cost ratio rendering");
  return "+3.94 +3.77 -43.39 x1.3 x2.8";
}

// ---- 3: majority vote ----

std::string majority_vote() {
  std::size_t combos = 0;
  for (int nc = 1; nc <= 4; ++nc) {
    std::vector<double> weights;
    for (int i = 0; i < nc; ++i) weights.push_back(nc == 1 ? 0.7 : static_cast<double>(i) / (nc - 1));
    const auto objective = testsupport::weighted_objective(weights);
    const int subsets = 1 << nc;
    for (int a = 0; a < subsets; ++a) {
      for (int b = 0; b < subsets; ++b) {
        for (int c = 0; c < subsets; ++c) {
          const int masks[3] = {a, b, c};
          std::vector<JudgeVote> votes;
          for (int j = 0; j < 3; ++j) {
            JudgeVote v;
            v.judge_id = objective.judge_roster[static_cast<std::size_t>(j)];
            for (int k = 0; k < nc; ++k) {
              if (masks[j] & (1 << k)) v.selected_criteria.push_back("c" + std::to_string(k));
            }
            votes.push_back(std::move(v));
          }
          std::vector<std::string> expected;
          double sum = 0.0;
          for (int k = 0; k < nc; ++k) {
            int n = 0;
            for (int m : masks) n += (m >> k) & 1;
            if (n >= 2) {
              expected.push_back("c" + std::to_string(k));
              sum += weights[static_cast<std::size_t>(k)];
            }
          }
          const double reward = expected.empty() ? 0.0 : sum / static_cast<double>(expected.size());
          const auto verdict = aggregate_votes(votes, objective);
          require(verdict.kept_criteria == expected, "kept criteria differ");
          require(std::fabs(verdict.reward - reward) <= kRewardTol, "reward differs");
          require(verdict.is_violation == (reward < objective.violation_threshold),
                  "violation flag differs");
          ++combos;
        }
      }
    }
  }
  return std::to_string(combos) + " vote combinations";
}

// ---- shared reference rules ----

struct QueryInfo {
  std::string id;
  std::optional<std::string> parent;
  std::optional<std::string> strategy;
  int iteration = 0;
  std::uint64_t ordinal = 0;
  std::string origin_prompt;
  double reward = 0.0;
};

std::vector<std::string> reference_select_queries(std::vector<const QueryInfo*> pool, int k) {
  std::sort(pool.begin(), pool.end(), [](const QueryInfo* a, const QueryInfo* b) {
    return std::tie(a->reward, a->ordinal, a->id) < std::tie(b->reward, b->ordinal, b->id);
  });
  std::vector<std::string> out;
  for (std::size_t i = 0; i < pool.size() && i < static_cast<std::size_t>(k); ++i) {
    out.push_back(pool[i]->id);
  }
  return out;
}

struct RefStats {
  std::string id;
  int applications = 0;
  int degenerate = 0;
  double delta_sum = 0.0;
  int kept = 0;
};

std::vector<std::string> reference_select_strategies(const std::vector<RefStats>& stats,
                                                     int min_active) {
  std::vector<bool> keep(stats.size(), false);
  int count = 0;
  for (std::size_t i = 0; i < stats.size(); ++i) {
    const auto& s = stats[i];
    if (s.applications == 0 || (s.kept > 0 && s.delta_sum / s.kept < 0.0)) {
      keep[i] = true;
      ++count;
    }
  }
  std::vector<std::size_t> retirees;
  for (std::size_t i = 0; i < stats.size(); ++i) {
    if (!keep[i]) retirees.push_back(i);
  }
  std::stable_sort(retirees.begin(), retirees.end(), [&](std::size_t a, std::size_t b) {
    const bool da = stats[a].kept > 0;
    const bool db = stats[b].kept > 0;
    if (da != db) return da;
    if (!da) return false;
    return stats[a].delta_sum / stats[a].kept < stats[b].delta_sum / stats[b].kept;
  });
  for (std::size_t r = 0; r < retirees.size() && count < min_active; ++r, ++count) {
    keep[retirees[r]] = true;
  }
  std::vector<std::string> out;
  for (std::size_t i = 0; i < stats.size(); ++i) {
    if (keep[i]) out.push_back(stats[i].id);
  }
  return out;
}

// ---- 4: beam properties ----

struct PromptInfo {
  std::string id;
  std::uint64_t ordinal = 0;
  double score = 0.0;
  double rate = 0.0;
};

std::vector<std::string> reference_select_prompts(std::vector<const PromptInfo*> pool, int k) {
  std::sort(pool.begin(), pool.end(), [](const PromptInfo* a, const PromptInfo* b) {
    if (a->rate != b->rate) return a->rate > b->rate;
    if (a->score != b->score) return a->score < b->score;
    return a->ordinal < b->ordinal;
  });
  std::vector<std::string> out;
  for (std::size_t i = 0; i < pool.size() && i < static_cast<std::size_t>(k); ++i) {
    out.push_back(pool[i]->id);
  }
  return out;
}

std::string beam_properties(const std::string& default_run, const RunConfig& config) {
  std::mt19937_64 rng(77);
  // Random pools with coarse rewards so that ties are frequent.
  for (int trial = 0; trial < 500; ++trial) {
    const auto n = 1 + rng() % 20;
    const int k = 1 + static_cast<int>(rng() % 6);
    std::vector<QueryNode> nodes(n);
    std::vector<PromptNode> prompts(n);
    for (std::size_t i = 0; i < n; ++i) {
      nodes[i].node_id = "q-" + std::to_string(rng() % 1000) + "-" + std::to_string(i);
      nodes[i].ordinal = rng() % 5;
      nodes[i].reward = static_cast<double>(rng() % 3) / 2.0;
      prompts[i].node_id = "p-" + std::to_string(i);
      prompts[i].ordinal = i;
      prompts[i].violation_rate = static_cast<double>(rng() % 3) / 2.0;
      prompts[i].score = static_cast<double>(rng() % 3) / 2.0;
    }
    std::vector<const QueryNode*> qpool;
    for (const auto& q : nodes) qpool.push_back(&q);
    const auto qbeam = select_queries(qpool, k);
    require(qbeam.size() == std::min<std::size_t>(n, static_cast<std::size_t>(k)),
            "query beam size");
    double worst_kept = -1.0;
    for (const auto* q : qpool) {
      if (std::find(qbeam.begin(), qbeam.end(), q->node_id) != qbeam.end()) {
        worst_kept = std::max(worst_kept, *q->reward);
      }
    }
    for (const auto* q : qpool) {
      if (std::find(qbeam.begin(), qbeam.end(), q->node_id) == qbeam.end()) {
        require(*q->reward >= worst_kept, "a discarded query beats a retained one");
      }
    }
    std::vector<const PromptNode*> ppool;
    for (const auto& p : prompts) ppool.push_back(&p);
    const auto pbeam = select_prompts(ppool, k);
    std::vector<PromptInfo> infos;
    for (const auto& p : prompts) infos.push_back({p.node_id, p.ordinal, *p.score, *p.violation_rate});
    std::vector<const PromptInfo*> ipool;
    for (const auto& p : infos) ipool.push_back(&p);
    require(pbeam == reference_select_prompts(ipool, k), "prompt beam differs from reference");
  }

  // Crafted equal-score pools.
  QueryNode a, b, c;
  a.node_id = "q-b";
  a.ordinal = 2;
  b.node_id = "q-a";
  b.ordinal = 2;
  c.node_id = "q-z";
  c.ordinal = 1;
  a.reward = b.reward = c.reward = 0.5;
  require(select_queries({&a, &b, &c}, 2) == std::vector<std::string>{"q-z", "q-a"},
          "query tie-break is not ordinal then id");
  PromptNode p1, p2, p3;
  p1.node_id = "p-1";
  p1.ordinal = 5;
  p2.node_id = "p-2";
  p2.ordinal = 3;
  p3.node_id = "p-3";
  p3.ordinal = 4;
  p1.violation_rate = p2.violation_rate = p3.violation_rate = 0.5;
  p1.score = 0.2;
  p2.score = p3.score = 0.4;
  require(select_prompts({&p1, &p2, &p3}, 2) == std::vector<std::string>{"p-1", "p-2"},
          "prompt tie-break is not score then ordinal");

  // Prompt beams of the default run against the reference rule.
  std::map<std::string, PromptInfo> infos;
  std::vector<std::string> beam;
  std::vector<std::string> created;
  int generations = 0;
  for (const auto& e : events_in(default_run)) {
    if (e.kind == "prompt-created") {
      const auto& n = e.payload["node"];
      infos[n["node_id"]] = {n["node_id"], n["ordinal"].get<std::uint64_t>(), 0.0, 0.0};
      created.push_back(n["node_id"]);
    } else if (e.kind == "prompt-scored") {
      auto& p = infos.at(e.payload["prompt"]);
      p.score = e.payload["score"];
      p.rate = e.payload["violation_rate"];
    } else if (e.kind == "beam-selected" && e.payload["scope"] == "prompt") {
      std::vector<const PromptInfo*> pool;
      for (const auto& id : beam) pool.push_back(&infos.at(id));
      for (const auto& id : created) pool.push_back(&infos.at(id));
      const auto logged = e.payload["beam"].get<std::vector<std::string>>();
      require(logged.size() <= static_cast<std::size_t>(config.budget.prompt_beam),
              "prompt beam exceeds its width");
      require(logged == reference_select_prompts(pool, config.budget.prompt_beam),
              "logged prompt beam differs from reference");
      ++generations;
    } else if (e.kind == "generation-completed") {
      beam = e.payload["beam"].get<std::vector<std::string>>();
      created.clear();
    } else if (e.kind == "beam-selected") {
      require(e.payload["beam"].size() <= static_cast<std::size_t>(config.budget.query_beam),
              "query beam exceeds its width");
    }
  }
  require(generations == config.budget.prompt_iterations, "missing prompt selections");
  return "500 random pools, crafted ties, " + std::to_string(generations) +
         " logged prompt beams";
}

// ---- 5: tree sizes ----

std::string tree_sizes(const std::string& default_run, const RunConfig& config) {
  const auto events = events_in(default_run);
  std::map<std::string, QueryInfo> queries;
  std::vector<std::string> seeds;
  std::set<std::tuple<std::string, std::string, int>> degenerate;
  std::map<std::pair<std::string, int>, json> selected;
  std::size_t prompts = 0;
  for (const auto& e : events) {
    if (e.kind == "prompt-created") ++prompts;
    if (e.kind == "query-created") {
      const auto& n = e.payload["node"];
      QueryInfo q;
      q.id = n["node_id"];
      if (n.value("parent", json()).is_string()) q.parent = n["parent"].get<std::string>();
      if (n.value("strategy_id", json()).is_string()) q.strategy = n["strategy_id"].get<std::string>();
      q.iteration = n["iteration"];
      q.ordinal = n["ordinal"];
      q.origin_prompt = n["origin_prompt"];
      if (!q.parent) seeds.push_back(q.id);
      queries[q.id] = q;
    } else if (e.kind == "judged") {
      queries.at(e.payload["query"]).reward = e.payload["reward"];
    } else if (e.kind == "expansion-degenerate" && e.payload["scope"] == "query") {
      degenerate.emplace(e.payload["parent"], e.payload["strategy"], e.payload["iteration"]);
    } else if (e.kind == "beam-selected" && e.payload["scope"] == "query") {
      selected[{e.payload["seed"], e.payload["iteration"]}] = e.payload;
    }
  }
  const std::size_t expected_prompts =
      1 + 3 + static_cast<std::size_t>(3 * config.budget.prompt_beam *
                                       (config.budget.prompt_iterations - 1));
  require(prompts == expected_prompts,
          "prompt nodes " + std::to_string(prompts) + " != " + std::to_string(expected_prompts));

  std::map<std::string, std::vector<const QueryInfo*>> children;  // ordinal order
  std::map<std::string, std::string> seed_of;
  std::vector<const QueryInfo*> ordered;
  for (const auto& [id, q] : queries) ordered.push_back(&q);
  std::sort(ordered.begin(), ordered.end(),
            [](const QueryInfo* a, const QueryInfo* b) { return a->ordinal < b->ordinal; });
  for (const auto* q : ordered) {
    if (q->parent) {
      children[*q->parent].push_back(q);
      seed_of[q->id] = seed_of.at(*q->parent);
    } else {
      seed_of[q->id] = q->id;
    }
  }
  std::map<std::string, std::size_t> actual_size;
  for (const auto& [id, seed] : seed_of) ++actual_size[seed];

  std::vector<std::string> catalog;
  for (const auto& s : config.strategies) catalog.push_back(s.strategy_id);
  const std::size_t bound =
      1 + static_cast<std::size_t>(config.budget.query_iterations * config.budget.query_beam) *
              catalog.size();
  std::size_t total = 0;
  for (const auto& seed : seeds) {
    std::vector<std::string> beam{seed};
    std::vector<std::string> active = catalog;
    std::size_t size = 1;
    for (int it = 1; it <= config.budget.query_iterations; ++it) {
      std::vector<RefStats> stats;
      std::vector<const QueryInfo*> kids;
      for (const auto& s : active) stats.push_back({s});
      for (const auto& b : beam) {
        for (auto& st : stats) {
          ++st.applications;
          const QueryInfo* child = nullptr;
          for (const auto* c : children[b]) {
            if (c->iteration == it && c->strategy == st.id) child = c;
          }
          if (child) {
            kids.push_back(child);
            st.delta_sum += child->reward - queries.at(b).reward;
            ++st.kept;
          } else {
            require(degenerate.count({b, st.id, it}) == 1,
                    "missing child without a degenerate event under " + b);
            ++st.degenerate;
          }
        }
      }
      size += kids.size();
      std::vector<const QueryInfo*> pool;
      if (it > 1) {
        for (const auto& b : beam) pool.push_back(&queries.at(b));
      }
      pool.insert(pool.end(), kids.begin(), kids.end());
      if (!pool.empty()) beam = reference_select_queries(pool, config.budget.query_beam);
      const auto next = reference_select_strategies(stats, config.min_active_strategies);
      const auto it_sel = selected.find({seed, it});
      require(it_sel != selected.end(), "no beam-selected event for " + seed);
      const auto& logged = it_sel->second;
      require(logged["applied"].get<std::vector<std::string>>() == active,
              "applied strategies differ for " + seed);
      require(logged["beam"].get<std::vector<std::string>>() == beam,
              "beam differs for " + seed + " iteration " + std::to_string(it));
      require(logged["next_active"].get<std::vector<std::string>>() == next,
              "next active strategies differ for " + seed);
      active = next;
    }
    require(size == actual_size[seed], "query count differs for " + seed);
    require(size <= bound, "query count above bound for " + seed);
    total += size;
  }
  require(total == queries.size(), "queries outside any seed tree");
  return std::to_string(prompts) + " prompts, " + std::to_string(seeds.size()) +
         " seed trees match the reference simulation, bound " + std::to_string(bound);
}

// ---- 6: determinism ----

std::string determinism(const std::string& default_run, const RunConfig& config) {
  testsupport::TempDir second;
  run(config, second.str());
  require(slurp((fs::path(default_run) / kEventLogFile).string()).size() > 0, "empty log");
  require(canonical_log(events_in(default_run)) == canonical_log(events_in(second.str())),
          "two mock runs differ");

  auto small = testsupport::mock_config(2, 2, 2, 2, 3);
  testsupport::TempDir rec;
  small.mode = RunMode::kRecord;
  const auto recorded = run(small, rec.str());
  testsupport::TempDir rep;
  small.mode = RunMode::kReplay;
  small.cassette = rec.str(kCassetteFile);
  const auto replayed = run(small, rep.str());
  require(canonical_log(events_in(rec.str())) == canonical_log(events_in(rep.str())),
          "replayed log differs from the recording");
  require(recorded.ledger.total == replayed.ledger.total, "replayed ledger differs");
  return "mock logs identical, replay matches recording (" +
         std::to_string(recorded.ledger.total.total()) + " tokens)";
}

// ---- 7: budget ----

int run_cli(const std::string& config_path, const std::string& out_dir) {
  const std::string cmd = std::string("\"") + AGENTPROBE_CLI + "\" run --config \"" +
                          config_path + "\" --out \"" + out_dir + "\" >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string budget(const std::string& default_run) {
  std::vector<std::int64_t> wave_totals;  // ledger total after each generation
  for (const auto& e : events_in(default_run)) {
    if (e.kind == "generation-completed") wave_totals.push_back(e.usage_total.total());
  }
  require(wave_totals.size() >= 2, "reference run too short");

  std::ifstream in(testsupport::fixture("mock/run_default.json"));
  json doc = json::parse(in);
  doc["catalog"] = testsupport::fixture("mock/catalog.jsonl").string();

  std::ostringstream summary;
  // A cap below the first wave, then one between the first and second.
  const std::int64_t caps[] = {wave_totals[0] / 2, (wave_totals[0] + wave_totals[1]) / 2};
  for (int i = 0; i < 2; ++i) {
    testsupport::TempDir dir;
    doc["budget"]["max_total_tokens"] = caps[i];
    const auto path = dir.str("config.json");
    testsupport::write_file(path, doc.dump(2));
    const auto out = dir.str("run");
    const int rc = run_cli(path, out);
    require(rc == kExitBudget, "exit code " + std::to_string(rc) + " instead of 4");
    const auto events = events_in(out);
    std::int64_t total = events.back().usage_total.total();
    const auto halted = std::find_if(events.begin(), events.end(),
                                     [](const RunEvent& e) { return e.kind == "budget-halted"; });
    require(halted != events.end(), "no budget-halted event");
    require(halted->generation == i, "halted in generation " + std::to_string(halted->generation));
    const std::int64_t wave = i == 0 ? wave_totals[0] : wave_totals[1] - wave_totals[0];
    require(total > caps[i], "halted without exceeding the cap");
    require(total - caps[i] <= wave, "overshoot exceeds one wave");
    summary << (i ? ", " : "") << "cap " << caps[i] << " -> total " << total << " (wave " << wave
            << ")";
  }
  return summary.str();
}

// ---- 8: crash-resume ----

std::string crash_resume() {
  const auto config = testsupport::mock_config(2, 2, 2, 2, 3);
  testsupport::TempDir ref;
  run(config, ref.str());
  const auto expected = canonical_log(events_in(ref.str()));
  const auto lines = testsupport::file_lines((fs::path(ref.str()) / kEventLogFile).string());
  const std::size_t n = lines.size();

  std::mt19937_64 rng(8);
  std::set<std::size_t> cuts{0, 1, n / 2, n - 1};
  while (cuts.size() < 16) cuts.insert(rng() % n);
  for (const auto keep : cuts) {
    for (const bool partial : {false, true}) {
      if (partial && keep + 1 >= n) continue;
      testsupport::TempDir dir;
      std::string content;
      for (std::size_t i = 0; i < keep; ++i) content += lines[i] + "\n";
      if (partial) content += lines[keep].substr(0, lines[keep].size() / 2);
      testsupport::write_file(dir.path() / kEventLogFile, content);
      run(config, dir.str());
      require(canonical_log(events_in(dir.str())) == expected,
              "resume from " + std::to_string(keep) + (partial ? " + partial line" : "") +
                  " differs");
    }
  }
  return std::to_string(cuts.size()) + " boundaries of " + std::to_string(n) +
         " events, with and without a torn line";
}

// ---- 9: worked trace ----

std::string shopper_trace() {
  const auto config =
      load_run_config(testsupport::fixture("shopper_trace/config.json").string());
  require(config.mode == RunMode::kReplay, "fixture is not a replay config");
  testsupport::TempDir dir;
  run(config, dir.str());
  const auto folded = fold_events(events_in(dir.str()));
  const std::string final_text = "How many audo inputs can I utlize a 3.5mm connector?";
  std::string node;
  for (const auto& id : folded.tree.query_ids()) {
    if (folded.tree.query(id).text == final_text) node = id;
  }
  require(!node.empty(), "final query not found");
  const auto rendered = trace(dir.str(), node);
  require(rendered.find("prompt chain (depth 0 to 2)") == 0, "prompt chain depth");
  require(rendered.find("strategies: synonym-replace, typo, word-delete\n") != std::string::npos,
          "strategy chain");
  const auto expected = slurp(testsupport::fixture("shopper_trace/expected_trace.txt").string());
  require(rendered == expected, "trace differs from expected_trace.txt");
  return node + " traced byte-exact";
}

}  // namespace

int main() {
  int failures = 0;
  auto report = [&](int number, const std::string& name, const std::function<std::string()>& fn) {
    try {
      const auto detail = fn();
      std::cout << "PASS " << number << " " << name << ": " << detail << std::endl;
    } catch (const std::exception& e) {
      ++failures;
      std::cout << "FAIL " << number << " " << name << ": " << e.what() << std::endl;
    }
  };

  std::optional<RunConfig> config;
  testsupport::TempDir default_run;
  std::string setup_error;
  try {
    config = load_run_config(testsupport::fixture("mock/run_default.json").string());
    run(*config, default_run.str());
  } catch (const std::exception& e) {
    setup_error = e.what();
  }
  auto with_run = [&](const std::function<std::string()>& fn) {
    return [&, fn] {
      if (!setup_error.empty()) throw Failure("default mock run failed: " + setup_error);
      return fn();
    };
  };

  report(1, "metric oracles", metric_oracles);
  report(2, "delta and ratio reproduction", deltas_and_ratios);
  report(3, "majority vote exhaustive", majority_vote);
  report(4, "beam properties",
         with_run([&] { return beam_properties(default_run.str(), *config); }));
  report(5, "mock tree sizes", with_run([&] { return tree_sizes(default_run.str(), *config); }));
  report(6, "determinism and replay",
         with_run([&] { return determinism(default_run.str(), *config); }));
  report(7, "budget enforcement", with_run([&] { return budget(default_run.str()); }));
  report(8, "crash-resume equivalence", crash_resume);
  report(9, "worked trace fixture", shopper_trace);
  return failures == 0 ? 0 : 1;
}
