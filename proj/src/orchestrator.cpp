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

#include "agentprobe/orchestrator.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "agentprobe/backends.hpp"
#include "agentprobe/cassette.hpp"
#include "agentprobe/error.hpp"
#include "agentprobe/judging.hpp"
#include "agentprobe/metrics.hpp"
#include "agentprobe/parallel.hpp"
#include "agentprobe/query_refinement.hpp"
#include "agentprobe/templates.hpp"
#include "agentprobe/text.hpp"

namespace agentprobe {

namespace fs = std::filesystem;

namespace {

void register_embedders(Gateway& gateway, const std::vector<EmbedderConfig>& embedders,
                        RunMode mode) {
  gateway.register_embedder("hash", std::make_shared<HashEmbedder>());
  const bool networked = mode == RunMode::kLive || mode == RunMode::kRecord;
  for (const auto& e : embedders) {
    if (e.kind == "http" && networked) {
      HttpEmbeddingBackend::Options o;
      o.base_url = e.endpoint;
      if (!e.path.empty()) o.path = e.path;
      o.model = e.model;
      o.api_key_env = e.api_key_env;
      gateway.register_embedder(e.id, std::make_shared<HttpEmbeddingBackend>(o));
    } else {
      gateway.register_embedder(e.id, std::make_shared<HashEmbedder>(e.dim));
    }
  }
}

std::string clean_generated(std::string_view raw) {
  std::string text(trim(raw));
  const auto nl = text.find('\n');
  if (nl != std::string::npos) text = std::string(trim(std::string_view(text).substr(0, nl)));
  if (text.size() >= 2 && ((text.front() == '"' && text.back() == '"') ||
                           (text.front() == '\'' && text.back() == '\''))) {
    text = std::string(trim(std::string_view(text).substr(1, text.size() - 2)));
  }
  return text;
}

// The part of the configuration that defines the search; mode and paths are
// left out so a recording and its replay share it.
json run_identity(const RunConfig& c) {
  json strategies = json::array();
  for (const auto& s : c.strategies) strategies.push_back(s);
  return json{{"objective", c.objective},
              {"budget", c.budget},
              {"strategies", strategies},
              {"min_active_strategies", c.min_active_strategies},
              {"root_prompt", c.root_prompt},
              {"agent_type", c.agent_type},
              {"roles", {{"generator", c.generator}, {"agent", c.agent}}},
              {"catalog_size", c.catalog.size()},
              {"tokenizer", kTokenizerRuleId}};
}

std::string fixed2(const std::optional<double>& v) {
  return v ? format_fixed(*v, 2) : std::string("--");
}

// Seeded catalog sampling: categories in first-appearance order, visited
// round robin from a random start; items drawn uniformly within a category.
std::vector<const DomainKnowledgeItem*> sample_items(
    const std::vector<DomainKnowledgeItem>& catalog, std::uint64_t rng_seed, int generation,
    std::uint64_t prompt_ordinal, int count) {
  std::vector<std::string> categories;
  std::map<std::string, std::vector<const DomainKnowledgeItem*>> by_category;
  for (const auto& item : catalog) {
    auto& bucket = by_category[item.category];
    if (bucket.empty()) categories.push_back(item.category);
    bucket.push_back(&item);
  }
  std::seed_seq seq{static_cast<std::uint32_t>(rng_seed),
                    static_cast<std::uint32_t>(rng_seed >> 32),
                    static_cast<std::uint32_t>(generation),
                    static_cast<std::uint32_t>(prompt_ordinal),
                    static_cast<std::uint32_t>(prompt_ordinal >> 32)};
  std::mt19937_64 rng(seq);
  std::vector<const DomainKnowledgeItem*> out;
  const std::size_t start = rng() % categories.size();
  for (int i = 0; i < count; ++i) {
    const auto& bucket =
        by_category[categories[(start + static_cast<std::size_t>(i)) % categories.size()]];
    out.push_back(bucket[rng() % bucket.size()]);
  }
  return out;
}

class Runner {
 public:
  Runner(const RunConfig& config, Gateway& gateway, const TemplateSet& templates,
         FoldedRun& state, EventLogWriter& writer)
      : config_(config),
        gateway_(gateway),
        templates_(templates),
        state_(state),
        writer_(writer),
        judge_(gateway, config.objective, templates, config.temperature),
        expander_(gateway, templates, config.generator, config.temperature),
        refiner_(gateway, templates, config.objective, config.generator,
                 PromptContext{config.agent_type, config.domain_knowledge_description,
                               config.realism_cut, 10},
                 config.temperature) {
    for (const auto& item : config.catalog) items_.emplace(item.item_id, &item);
    refine_config_.iterations = config.budget.query_iterations;
    refine_config_.beam = config.budget.query_beam;
    refine_config_.strategies = config.strategies;
    refine_config_.min_active_strategies = config.min_active_strategies;
    refine_config_.parallelism = config.parallelism;
  }

  std::uint64_t emit(const std::string& kind, json payload) {
    return writer_.append(kind, generation_, std::move(payload),
                          gateway_.ledger_snapshot().total);
  }

  void start() { emit("run-started", run_identity(config_)); }

  void generation_zero() {
    generation_ = 0;
    const auto& root = state_.tree.add_root_prompt(config_.root_prompt);
    emit("prompt-created", json{{"node", root}});
    const std::string root_id = root.node_id;
    evaluate_prompt(root_id);
    state_.beam = {root_id};
  }

  void generation(int g) {
    generation_ = g;
    PromptHooks hooks;
    hooks.records = [&](const std::string& id) { return records_of(id); };
    hooks.realism = [&](const std::string& id) { return realism_of(id); };
    hooks.reflected = [&](const FeedbackBundle& b) { emit("reflected", json{{"bundle", b}}); };
    hooks.policy_revised = [&](const RealismPolicy& p) {
      emit("policy-revised", json{{"policy", p}});
    };
    hooks.created = [&](const PromptNode& n) { emit("prompt-created", json{{"node", n}}); };
    hooks.skipped = [&](const std::string& parent, Direction d, const std::string& reason) {
      emit("expansion-degenerate", json{{"scope", "prompt"},
                                        {"parent", parent},
                                        {"direction", to_string(d)},
                                        {"reason", reason}});
    };
    hooks.evaluate_children = [&](const std::vector<std::string>& ids) {
      for (const auto& id : ids) evaluate_prompt(id);
    };
    hooks.selected = [&](const std::vector<std::string>& beam) {
      emit("beam-selected", json{{"scope", "prompt"}, {"beam", beam}});
    };
    auto gen = refine_prompts(state_.tree, state_.beam, refiner_, state_.policy,
                              config_.budget.prompt_beam, config_.parallelism, hooks);
    state_.beam = gen.beam;
  }

  void complete_generation() {
    json statuses = json::object();
    for (const auto& id : state_.tree.prompt_ids()) {
      statuses[id] = to_string(state_.tree.prompt(id).status);
    }
    state_.ledger = gateway_.ledger_snapshot();
    state_.generation = generation_;
    emit("generation-completed", json{{"generation", generation_},
                                      {"beam", state_.beam},
                                      {"statuses", statuses},
                                      {"policy", state_.policy},
                                      {"ledger", state_.ledger}});
  }

  bool over_budget() const {
    const auto& cap = config_.budget.max_total_tokens;
    return cap && gateway_.ledger_snapshot().total.total() > *cap;
  }

  void halt() {
    state_.halted = true;
    emit("budget-halted", json{{"cap", *config_.budget.max_total_tokens},
                               {"total", gateway_.ledger_snapshot().total.total()},
                               {"generation", generation_}});
  }

  void set_generation(int g) { generation_ = g; }

 private:
  Evaluation evaluate(const QueryNode& q) {
    const auto* item = items_.at(q.item_id);
    ChatRequest req;
    req.backend_id = config_.agent;
    req.system = templates_.render("agent_system", {{"domain_knowledge", item->describe()}},
                                   {{"AGENT_TYPE", config_.agent_type}});
    req.user = q.text;
    req.temperature = config_.temperature;
    req.tag = "agent:answer";
    Evaluation e;
    e.answer = std::string(trim(gateway_.complete(req).text));
    e.verdict = judge_.judge_response(q.text, e.answer);
    e.violated_criteria =
        violated_criteria(e.verdict.kept_criteria, e.verdict.is_violation, config_.objective);
    e.realism = judge_.judge_realism(q.text).mean;
    return e;
  }

  void evaluate_prompt(const std::string& prompt_id) {
    const auto& prompt = state_.tree.prompt(prompt_id);
    const auto items = sample_items(config_.catalog, config_.budget.rng_seed, generation_,
                                    prompt.ordinal, config_.budget.queries_per_prompt);
    const std::string prompt_text = prompt.text;
    auto texts = parallel_map<std::string>(items.size(), config_.parallelism, [&](std::size_t i) {
      ChatRequest req;
      req.backend_id = config_.generator;
      req.user = templates_.render("query_generate", {{"prompt", prompt_text},
                                                      {"domain_knowledge", items[i]->describe()}});
      req.temperature = config_.temperature;
      req.tag = "query:generate";
      return clean_generated(gateway_.complete(req).text);
    });
    std::vector<std::string> seeds;
    for (std::size_t i = 0; i < items.size(); ++i) {
      if (texts[i].empty()) {
        emit("expansion-degenerate", json{{"scope", "seed"},
                                          {"prompt", prompt_id},
                                          {"item", items[i]->item_id},
                                          {"reason", "empty generation"}});
        continue;
      }
      const auto& node = state_.tree.add_seed_query(prompt_id, texts[i], items[i]->item_id);
      emit("query-created", json{{"node", node}});
      seeds.push_back(node.node_id);
    }

    RefineHooks hooks;
    hooks.created = [&](const QueryNode& n) { emit("query-created", json{{"node", n}}); };
    hooks.degenerate = [&](const std::string& parent, const std::string& strategy,
                           int iteration, const std::string& reason) {
      emit("expansion-degenerate", json{{"scope", "query"},
                                        {"parent", parent},
                                        {"strategy", strategy},
                                        {"iteration", iteration},
                                        {"reason", reason}});
    };
    hooks.evaluated = [&](const QueryNode& n, const Evaluation& e) {
      emit("agent-answered", json{{"query", n.node_id}, {"answer", e.answer}});
      emit("judged", json{{"query", n.node_id},
                          {"kept", e.verdict.kept_criteria},
                          {"reward", e.verdict.reward},
                          {"is_violation", e.verdict.is_violation},
                          {"violated", e.violated_criteria},
                          {"votes", e.verdict.votes},
                          {"realism", e.realism ? json(*e.realism) : json(nullptr)}});
      state_.votes[n.node_id] = e.verdict.votes;
    };
    std::string seed_id;
    hooks.selected = [&](const IterationReport& r) {
      emit("beam-selected", json{{"scope", "query"},
                                 {"prompt", prompt_id},
                                 {"seed", seed_id},
                                 {"iteration", r.iteration},
                                 {"applied", r.applied},
                                 {"stats", r.stats},
                                 {"beam", r.beam},
                                 {"next_active", r.next_active}});
    };
    const Evaluator evaluator = [this](const QueryNode& q) { return evaluate(q); };
    for (const auto& seed : seeds) {
      seed_id = seed;
      refine(state_.tree, {seed}, refine_config_, expander_, evaluator, hooks);
    }
    score_prompt(prompt_id);
  }

  void score_prompt(const std::string& prompt_id) {
    double sum = 0.0;
    int judged = 0;
    int violations = 0;
    for (const auto& qid : state_.tree.query_ids()) {
      const auto& q = state_.tree.query(qid);
      if (q.origin_prompt != prompt_id || !q.judged()) continue;
      sum += *q.reward;
      ++judged;
      if (q.is_violation) ++violations;
    }
    auto& p = state_.tree.prompt_mut(prompt_id);
    p.judged_count = judged;
    // A prompt without judged queries counts as compliant.
    p.score = judged > 0 ? sum / judged : 1.0;
    p.violation_rate = judged > 0 ? static_cast<double>(violations) / judged : 0.0;
    emit("prompt-scored", json{{"prompt", prompt_id},
                               {"score", *p.score},
                               {"violation_rate", *p.violation_rate},
                               {"judged_count", judged}});
  }

  std::vector<InteractionRecord> records_of(const std::string& prompt_id) const {
    std::vector<InteractionRecord> out;
    for (const auto& qid : state_.tree.query_ids()) {
      const auto& q = state_.tree.query(qid);
      if (q.origin_prompt != prompt_id || !q.judged()) continue;
      InteractionRecord r;
      r.prompt = prompt_id;
      r.query = qid;
      r.query_text = q.text;
      r.answer = q.answer.value_or("");
      r.reward = *q.reward;
      r.is_violation = q.is_violation;
      r.violated_criteria = q.violated_criteria;
      if (auto it = state_.votes.find(qid); it != state_.votes.end()) r.judge_votes = it->second;
      out.push_back(std::move(r));
    }
    return out;
  }

  std::vector<RealismSample> realism_of(const std::string& prompt_id) const {
    std::vector<RealismSample> out;
    for (const auto& qid : state_.tree.query_ids()) {
      const auto& q = state_.tree.query(qid);
      if (q.origin_prompt != prompt_id || !q.realism_score) continue;
      out.push_back(RealismSample{qid, q.text, *q.realism_score});
    }
    return out;
  }

  const RunConfig& config_;
  Gateway& gateway_;
  const TemplateSet& templates_;
  FoldedRun& state_;
  EventLogWriter& writer_;
  Judge judge_;
  QueryExpander expander_;
  PromptRefiner refiner_;
  RefinementConfig refine_config_;
  std::map<std::string, const DomainKnowledgeItem*> items_;
  int generation_ = 0;
};

struct RunDirConfig {
  std::vector<EmbedderConfig> embedders;
  std::string embedder = "hash";
  RunMode mode = RunMode::kMock;
  std::string baseline;
};

RunDirConfig read_run_dir_config(const std::string& run_dir) {
  RunDirConfig out;
  const auto path = fs::path(run_dir) / kConfigFile;
  if (!fs::exists(path)) return out;
  const auto doc = json::parse(read_file(path.string()), nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) {
    throw ConfigError("run configuration is not JSON: " + path.string());
  }
  if (doc.contains("embedders")) {
    for (const auto& e : doc["embedders"]) {
      EmbedderConfig c;
      c.id = e.value("id", std::string{});
      c.kind = e.value("kind", std::string("hash"));
      c.dim = e.value("dim", std::size_t{256});
      c.endpoint = e.value("endpoint", std::string{});
      c.path = e.value("path", std::string{});
      c.model = e.value("model", std::string{});
      c.api_key_env = e.value("api_key_env", std::string{});
      out.embedders.push_back(std::move(c));
    }
  }
  if (doc.contains("roles")) out.embedder = doc["roles"].value("embedder", std::string("hash"));
  out.mode = run_mode_from_string(doc.value("mode", std::string("mock")));
  out.baseline = doc.value("baseline", std::string{});
  return out;
}

MetricsReport report_over(const std::vector<RunEvent>& events, std::uint64_t last_ordinal,
                          bool partial, const std::string& run_dir,
                          const std::string& baseline_override) {
  if (events.empty()) throw PreconditionError("event log is empty");
  if (events.front().kind != "run-started") {
    throw IntegrityError("event log does not start with run-started");
  }
  const json& info = events.front().payload;
  const auto folded = fold_events(events);
  const auto dir_config = read_run_dir_config(run_dir);

  MetricsReport r;
  r.tokenizer = std::string(kTokenizerRuleId);
  const auto objective = info.at("objective").get<ObjectiveSpec>();
  r.objective = objective.name;
  r.violation_threshold = objective.violation_threshold;
  r.queries_per_prompt = info.at("budget").get<RunBudget>().queries_per_prompt;
  r.partial = partial;
  r.last_ordinal = last_ordinal;
  r.usage = events.back().usage_total;

  std::vector<std::string> texts;
  double realism_sum = 0.0;
  std::size_t realism_n = 0;
  for (const auto& id : folded.tree.query_ids()) {
    const auto& q = folded.tree.query(id);
    if (!q.judged()) continue;
    texts.push_back(q.text);
    if (q.is_violation) ++r.n_violations;
    if (q.realism_score) {
      realism_sum += *q.realism_score;
      ++realism_n;
    }
  }
  r.n_queries = texts.size();
  if (r.n_queries > 0) {
    r.failure_rate = failure_rate(r.n_violations, r.n_queries);
    UsageLedger ledger;
    ledger.total = r.usage;
    r.cost_tokens_per_query = cost_per_query(ledger, r.n_queries);
  }
  if (realism_n > 0) r.realism_mean = realism_sum / static_cast<double>(realism_n);

  Gateway gateway(RetryPolicy{}, 1);
  register_embedders(gateway, dir_config.embedders, dir_config.mode);
  const auto diversity = diversity_of(texts, &gateway, dir_config.embedder);
  r.one_minus_cossim = diversity.one_minus_cossim;
  r.distinct = diversity.distinct;
  r.mtld = diversity.mtld;

  const std::string baseline_path =
      baseline_override.empty() ? dir_config.baseline : baseline_override;
  if (!baseline_path.empty()) {
    if (!fs::exists(baseline_path)) throw ConfigError("baseline not found: " + baseline_path);
    std::vector<std::string> baseline;
    for (auto& line : read_lines(baseline_path)) {
      if (!trim(line).empty()) baseline.push_back(line);
    }
    r.baseline = diversity_of(baseline, &gateway, dir_config.embedder);
    compute_deltas(r);
  }
  return r;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

void write_reports(const std::string& out_dir, const MetricsReport& r) {
  write_text(fs::path(out_dir) / "report.txt", render_table(r));
  write_text(fs::path(out_dir) / "report.csv", render_csv(r));
  write_text(fs::path(out_dir) / "report.json", render_struct(r));
}

}  // namespace

std::unique_ptr<Gateway> make_gateway(const RunConfig& config, const std::string& record_path) {
  auto gateway = std::make_unique<Gateway>(config.retry, config.parallelism);
  std::shared_ptr<Cassette> cassette;
  if (config.mode == RunMode::kReplay) {
    cassette = std::make_shared<Cassette>(Cassette::load(config.cassette));
  }
  auto synthetic = std::make_shared<SyntheticBackend>();
  for (const auto& b : config.backends) {
    if (cassette) {
      gateway->register_backend(b.id, std::make_shared<ReplayBackend>(cassette));
    } else if (b.kind == "scripted") {
      gateway->register_backend(
          b.id, std::make_shared<ScriptedBackend>(ScriptedBackend::from_file(b.script)));
    } else if (b.kind == "http" &&
               (config.mode == RunMode::kLive || config.mode == RunMode::kRecord)) {
      HttpChatBackend::Options o;
      o.base_url = b.endpoint;
      if (!b.path.empty()) o.path = b.path;
      o.model = b.model;
      o.api_key_env = b.api_key_env;
      o.timeout_seconds = b.timeout_seconds;
      gateway->register_backend(b.id, std::make_shared<HttpChatBackend>(o));
    } else {
      gateway->register_backend(b.id, synthetic);
    }
  }
  register_embedders(*gateway, config.embedders, config.mode);
  if (config.mode == RunMode::kRecord) {
    gateway->attach_recorder(std::make_shared<CassetteRecorder>(record_path));
  }
  return gateway;
}

FoldedRun fold_events(const std::vector<RunEvent>& events) {
  FoldedRun s;
  for (const auto& e : events) {
    const json& p = e.payload;
    if (e.kind == "run-started") {
      s.strategies.clear();
      for (const auto& j : p.at("strategies")) s.strategies.push_back(j.get<StrategySpec>());
    } else if (e.kind == "prompt-created") {
      s.tree.insert(p.at("node").get<PromptNode>());
    } else if (e.kind == "query-created") {
      s.tree.insert(p.at("node").get<QueryNode>());
    } else if (e.kind == "agent-answered") {
      s.tree.query_mut(p.at("query").get<std::string>()).answer =
          p.at("answer").get<std::string>();
    } else if (e.kind == "judged") {
      const auto id = p.at("query").get<std::string>();
      auto& q = s.tree.query_mut(id);
      q.reward = p.at("reward").get<double>();
      q.kept_criteria = p.at("kept").get<std::vector<std::string>>();
      q.violated_criteria = p.at("violated").get<std::vector<std::string>>();
      q.is_violation = p.at("is_violation").get<bool>();
      if (p.contains("realism") && !p["realism"].is_null()) {
        q.realism_score = p["realism"].get<double>();
      }
      s.votes[id] = p.at("votes").get<std::vector<JudgeVote>>();
    } else if (e.kind == "prompt-scored") {
      auto& n = s.tree.prompt_mut(p.at("prompt").get<std::string>());
      n.score = p.at("score").get<double>();
      n.violation_rate = p.at("violation_rate").get<double>();
      n.judged_count = p.at("judged_count").get<int>();
    } else if (e.kind == "generation-completed") {
      s.generation = p.at("generation").get<int>();
      s.beam = p.at("beam").get<std::vector<std::string>>();
      for (auto it = p.at("statuses").begin(); it != p.at("statuses").end(); ++it) {
        s.tree.prompt_mut(it.key()).status = status_from_string(it->get<std::string>());
      }
      s.policy = p.at("policy").get<RealismPolicy>();
      s.ledger = p.at("ledger").get<UsageLedger>();
    } else if (e.kind == "budget-halted") {
      s.halted = true;
    } else if (e.kind == "metrics-emitted") {
      s.finished = true;
    }
  }
  return s;
}

RunOutcome run(RunConfig config, const std::string& out_dir) {
  validate_run_config(config);
  const TemplateSet templates = config.templates_dir.empty()
                                    ? TemplateSet::builtin()
                                    : TemplateSet::from_directory(config.templates_dir);
  templates.validate();

  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw ConfigError("cannot create run directory " + out_dir + ": " + ec.message());
  const std::string log_path = (fs::path(out_dir) / kEventLogFile).string();

  std::vector<RunEvent> events;
  bool partial_line = false;
  if (fs::exists(log_path)) {
    auto loaded = read_event_log(log_path);
    events = std::move(loaded.events);
    partial_line = loaded.dropped_partial_line;
  }
  if (!events.empty() && events.front().payload != run_identity(config)) {
    throw ConfigError("run directory " + out_dir + " holds a different run");
  }

  RunOutcome outcome;
  if (!events.empty() && events.back().kind == "metrics-emitted") {
    const auto folded = fold_events(events);
    outcome.status = folded.halted ? RunStatus::kBudgetHalted : RunStatus::kCompleted;
    outcome.resumed = true;
    outcome.generations_completed = folded.generation + 1;
    outcome.last_ordinal = events.back().ordinal;
    outcome.ledger = folded.ledger;
    outcome.report = compute_report(out_dir);
    return outcome;
  }

  // Resume from the last completed generation; anything after it is redone.
  std::size_t keep = 0;
  for (std::size_t i = 0; i < events.size(); ++i) {
    if (events[i].kind == "generation-completed") keep = i + 1;
  }
  if (keep != events.size() || partial_line) truncate_event_log(log_path, keep);
  events.resize(keep);
  outcome.resumed = keep > 0;

  const std::string record_path =
      config.cassette.empty() ? (fs::path(out_dir) / kCassetteFile).string() : config.cassette;
  if (config.mode == RunMode::kRecord && keep == 0) fs::remove(record_path, ec);
  write_text(fs::path(out_dir) / kConfigFile, run_config_to_json(config).dump(2) + "\n");

  auto gateway = make_gateway(config, record_path);
  FoldedRun state = fold_events(events);
  if (keep == 0) state.policy.cap = config.policy_cap;
  if (keep > 0) gateway->restore_ledger(state.ledger);
  EventLogWriter writer(log_path, keep,
                        keep > 0 ? events.back().usage_total : TokenUsage{});
  Runner runner(config, *gateway, templates, state, writer);

  try {
    if (keep == 0) runner.start();
    int completed = state.generation;
    runner.set_generation(std::max(completed, 0));
    for (;;) {
      if (completed >= 0 && runner.over_budget()) {
        runner.halt();
        break;
      }
      const int next = completed + 1;
      if (next > config.budget.prompt_iterations) break;
      if (next == 0) {
        runner.generation_zero();
      } else {
        runner.generation(next);
      }
      runner.complete_generation();
      completed = next;
    }

    // The metrics event reports itself as the last ordinal so that a later
    // report over the finished log renders the same bytes.
    auto loaded = read_event_log(log_path);
    auto report = report_over(loaded.events, writer.next_ordinal(), state.halted, out_dir, {});
    runner.emit("metrics-emitted", json::parse(render_struct(report)));
    write_reports(out_dir, report);

    outcome.status = state.halted ? RunStatus::kBudgetHalted : RunStatus::kCompleted;
    outcome.generations_completed = completed + 1;
    outcome.last_ordinal = writer.next_ordinal() - 1;
    outcome.ledger = gateway->ledger_snapshot();
    outcome.report = std::move(report);
    return outcome;
  } catch (const std::exception& e) {
    std::optional<std::uint64_t> last;
    if (writer.next_ordinal() > 0) last = writer.next_ordinal() - 1;
    throw RunAborted(e.what(), last);
  }
}

MetricsReport compute_report(const std::string& run_dir, const std::string& baseline_path) {
  const std::string log_path = (fs::path(run_dir) / kEventLogFile).string();
  if (!fs::exists(log_path)) throw PreconditionError("no event log in " + run_dir);
  const auto loaded = read_event_log(log_path);
  if (loaded.events.empty()) throw PreconditionError("event log is empty: " + log_path);
  const auto folded = fold_events(loaded.events);
  return report_over(loaded.events, loaded.events.back().ordinal,
                     folded.halted || !folded.finished, run_dir, baseline_path);
}

std::string trace(const std::string& run_dir, const std::string& node_id) {
  const std::string log_path = (fs::path(run_dir) / kEventLogFile).string();
  if (!fs::exists(log_path)) throw PreconditionError("no event log in " + run_dir);
  const auto folded = fold_events(read_event_log(log_path).events);
  const auto& tree = folded.tree;

  std::vector<const QueryNode*> query_chain;
  std::string prompt_id;
  if (tree.has_query(node_id)) {
    for (const QueryNode* q = &tree.query(node_id);; q = &tree.query(*q->parent)) {
      query_chain.push_back(q);
      if (!q->parent) break;
    }
    std::reverse(query_chain.begin(), query_chain.end());
    prompt_id = query_chain.front()->origin_prompt;
  } else if (tree.has_prompt(node_id)) {
    prompt_id = node_id;
  } else {
    throw PreconditionError("unknown node " + node_id);
  }

  std::vector<const PromptNode*> prompt_chain;
  for (const PromptNode* p = &tree.prompt(prompt_id);; p = &tree.prompt(*p->parent)) {
    prompt_chain.push_back(p);
    if (!p->parent) break;
  }
  std::reverse(prompt_chain.begin(), prompt_chain.end());

  std::map<std::string, const StrategySpec*> strategies;
  for (const auto& s : folded.strategies) strategies.emplace(s.strategy_id, &s);

  std::ostringstream out;
  out << "prompt chain (depth 0 to " << prompt_chain.back()->depth << ")\n";
  for (const auto* p : prompt_chain) {
    out << "  depth " << p->depth << " | " << to_string(p->direction) << " | score "
        << fixed2(p->score) << " | violation rate " << fixed2(p->violation_rate) << " | "
        << p->node_id << "\n";
    if (!p->reasoning.empty()) out << "    reasoning: " << p->reasoning << "\n";
    out << "    prompt: " << p->text << "\n";
  }
  if (query_chain.empty()) return out.str();

  out << "query chain (" << query_chain.size() - 1 << " refinements)\n";
  std::vector<std::string> applied;
  for (const auto* q : query_chain) {
    if (!q->strategy_id) {
      out << "  seed";
    } else {
      applied.push_back(*q->strategy_id);
      out << "  iteration " << q->iteration << " | " << *q->strategy_id;
      if (auto it = strategies.find(*q->strategy_id); it != strategies.end()) {
        out << " (" << it->second->description << ")";
      }
    }
    out << " | reward " << fixed2(q->reward)
        << " | violation " << (q->judged() ? (q->is_violation ? "yes" : "no") : "--") << " | "
        << q->node_id << "\n";
    out << "    query: " << q->text << "\n";
  }
  out << "strategies: ";
  for (std::size_t i = 0; i < applied.size(); ++i) out << (i ? ", " : "") << applied[i];
  out << (applied.empty() ? "(none)\n" : "\n");
  return out.str();
}

}  // namespace agentprobe
