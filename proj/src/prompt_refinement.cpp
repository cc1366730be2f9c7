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

#include "agentprobe/prompt_refinement.hpp"

#include <algorithm>
#include <sstream>

#include "agentprobe/error.hpp"
#include "agentprobe/judging.hpp"
#include "agentprobe/parallel.hpp"

namespace agentprobe {

std::string_view to_string(FeedbackKind k) {
  switch (k) {
    case FeedbackKind::kViolation: return "violation";
    case FeedbackKind::kCompliant: return "compliant";
    case FeedbackKind::kCriterion: return "criterion";
  }
  return "violation";
}

namespace {

FeedbackKind kind_from_string(std::string_view s) {
  if (s == "violation") return FeedbackKind::kViolation;
  if (s == "compliant") return FeedbackKind::kCompliant;
  if (s == "criterion") return FeedbackKind::kCriterion;
  throw ParseError("unknown feedback kind '" + std::string(s) + "'");
}

json objective_feedback_json(const std::optional<ObjectiveFeedback>& f) {
  if (!f) return nullptr;
  json j{{"kind", to_string(f->kind)},
         {"reasoning", f->reasoning},
         {"suggestions", f->suggestions}};
  j["target_criterion"] = f->target_criterion ? json(*f->target_criterion) : json(nullptr);
  return j;
}

std::optional<ObjectiveFeedback> objective_feedback_from(const json& j) {
  if (j.is_null()) return std::nullopt;
  ObjectiveFeedback f;
  f.kind = kind_from_string(j.at("kind").get<std::string>());
  f.reasoning = j.at("reasoning").get<std::string>();
  f.suggestions = j.at("suggestions").get<std::string>();
  if (j.contains("target_criterion") && !j["target_criterion"].is_null()) {
    f.target_criterion = j["target_criterion"].get<std::string>();
  }
  return f;
}

std::string criteria_or_none(const std::vector<const Criterion*>& criteria) {
  return criteria.empty() ? std::string("(none)") : render_criteria(criteria);
}

std::string format_reward(double r) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(2);
  os << r;
  return os.str();
}

std::string render_records(std::vector<const InteractionRecord*> records, bool ascending,
                           std::size_t limit) {
  std::stable_sort(records.begin(), records.end(),
                   [ascending](const InteractionRecord* a, const InteractionRecord* b) {
                     return ascending ? a->reward < b->reward : a->reward > b->reward;
                   });
  if (records.size() > limit) records.resize(limit);
  std::string out;
  for (const auto* r : records) {
    if (!out.empty()) out += "\n\n";
    out += "Query: " + r->query_text + "\nResponse: " + r->answer +
           "\nReward: " + format_reward(r->reward) + "\nViolated criteria: ";
    if (r->violated_criteria.empty()) {
      out += "none";
    } else {
      for (std::size_t i = 0; i < r->violated_criteria.size(); ++i) {
        out += (i ? ", " : "") + r->violated_criteria[i];
      }
    }
  }
  return out;
}

std::string direction_slot(Direction d) {
  switch (d) {
    case Direction::kExploitation: return "violation";
    case Direction::kExploration: return "compliant";
    case Direction::kExamination: return "criterion";
    case Direction::kRoot: break;
  }
  throw PreconditionError("the root direction cannot be expanded");
}

}  // namespace

void to_json(json& j, const FeedbackBundle& b) {
  j = json{{"prompt", b.prompt}};
  if (b.realism) {
    j["realism"] = json{{"reasoning", b.realism->reasoning},
                        {"suggestions", b.realism->suggestions},
                        {"source_queries", b.realism->source_queries}};
  } else {
    j["realism"] = nullptr;
  }
  j["violation"] = objective_feedback_json(b.violation);
  j["compliant"] = objective_feedback_json(b.compliant);
  j["criterion"] = objective_feedback_json(b.criterion);
  j["dropped"] = b.dropped;
}

void from_json(const json& j, FeedbackBundle& b) {
  b = FeedbackBundle{};
  b.prompt = j.at("prompt").get<std::string>();
  if (j.contains("realism") && !j["realism"].is_null()) {
    RealismFeedback r;
    r.reasoning = j["realism"].at("reasoning").get<std::string>();
    r.suggestions = j["realism"].at("suggestions").get<std::string>();
    r.source_queries = j["realism"].value("source_queries", std::vector<std::string>{});
    b.realism = std::move(r);
  }
  b.violation = objective_feedback_from(j.value("violation", json(nullptr)));
  b.compliant = objective_feedback_from(j.value("compliant", json(nullptr)));
  b.criterion = objective_feedback_from(j.value("criterion", json(nullptr)));
  b.dropped = j.value("dropped", std::vector<std::string>{});
}

std::string RealismPolicy::text() const {
  std::string out;
  for (const auto& l : lines) {
    if (!out.empty()) out += '\n';
    out += "- " + l;
  }
  return out;
}

void RealismPolicy::revise(const std::string& suggestions) {
  std::istringstream in(suggestions);
  std::string line;
  while (std::getline(in, line)) {
    std::string t = trim(line);
    while (!t.empty() && (t.front() == '-' || t.front() == '*')) t = trim(t.substr(1));
    if (t.empty()) continue;
    if (std::find(lines.begin(), lines.end(), t) != lines.end()) continue;
    lines.push_back(std::move(t));
  }
  while (lines.size() > cap) lines.erase(lines.begin());
  ++revision;
}

void to_json(json& j, const RealismPolicy& p) {
  j = json{{"lines", p.lines}, {"revision", p.revision}, {"cap", p.cap}};
}

void from_json(const json& j, RealismPolicy& p) {
  p.lines = j.value("lines", std::vector<std::string>{});
  p.revision = j.value("revision", 0);
  p.cap = j.value("cap", std::size_t{20});
}

std::vector<std::string> select_prompts(const std::vector<const PromptNode*>& pool, int k) {
  for (const auto* p : pool) {
    if (!p->violation_rate || !p->score) {
      throw PreconditionError("prompt " + p->node_id + " is not scored");
    }
  }
  std::vector<const PromptNode*> sorted(pool);
  std::sort(sorted.begin(), sorted.end(), [](const PromptNode* a, const PromptNode* b) {
    if (*a->violation_rate != *b->violation_rate) return *a->violation_rate > *b->violation_rate;
    if (*a->score != *b->score) return *a->score < *b->score;
    return a->ordinal < b->ordinal;
  });
  const auto keep = std::min<std::size_t>(sorted.size(), static_cast<std::size_t>(std::max(k, 0)));
  std::vector<std::string> out;
  for (std::size_t i = 0; i < keep; ++i) out.push_back(sorted[i]->node_id);
  return out;
}

std::string pick_underexplored_criterion(
    const std::vector<std::pair<std::string, int>>& counts) {
  if (counts.empty()) throw PreconditionError("no criteria to pick from");
  const auto it = std::min_element(counts.begin(), counts.end(),
                                   [](const auto& a, const auto& b) { return a.second < b.second; });
  return it->first;
}

std::string PromptRefiner::ask(const std::string& user, const std::string& tag) const {
  ChatRequest req;
  req.backend_id = backend_;
  req.user = user;
  req.temperature = temperature_;
  req.tag = tag;
  return gateway_.complete(req).text;
}

std::optional<std::pair<std::string, std::string>> PromptRefiner::ask_reflection(
    const std::string& user, const std::string& tag) const {
  for (int attempt = 0; attempt < 2; ++attempt) {
    const auto reply =
        ask(attempt == 0 ? user : user + templates_.text("reask_suffix"), tag);
    if (auto obj = extract_json_object(reply)) {
      auto reasoning = string_member(*obj, {"reasoning", "reason"});
      auto suggestions = string_member(*obj, {"suggestions", "suggestion"});
      if (reasoning && suggestions) return std::make_pair(*reasoning, *suggestions);
    }
  }
  return std::nullopt;
}

FeedbackBundle PromptRefiner::reflect(const PromptNode& prompt,
                                      const std::vector<InteractionRecord>& records,
                                      const std::vector<RealismSample>& realism) const {
  if (records.empty()) {
    throw PreconditionError("prompt " + prompt.node_id + " has no interaction records");
  }
  FeedbackBundle bundle;
  bundle.prompt = prompt.node_id;
  const Vars markers{{"AGENT_TYPE", context_.agent_type},
                     {"DOMAIN_KNOWLEDGE", context_.domain_knowledge}};
  const std::string violating_criteria = criteria_or_none(objective_.failure_criteria());
  const std::string compliant_criteria = criteria_or_none(objective_.compliance_criteria());

  std::vector<const RealismSample*> unrealistic;
  for (const auto& s : realism) {
    if (s.mean < context_.realism_cut) unrealistic.push_back(&s);
  }
  std::vector<const InteractionRecord*> failing;
  std::vector<const InteractionRecord*> passing;
  for (const auto& r : records) (r.is_violation ? failing : passing).push_back(&r);

  struct Call {
    std::string slot;
    std::string tag;
    std::string user;
  };
  std::vector<Call> calls;
  if (!unrealistic.empty()) {
    std::string listed;
    for (std::size_t i = 0; i < unrealistic.size() && i < context_.max_examples; ++i) {
      if (!listed.empty()) listed += '\n';
      listed += "- " + unrealistic[i]->text;
    }
    calls.push_back({"realism", "reflect:realism",
                     templates_.render("reflect_realism",
                                       {{"current_prompts", prompt.text},
                                        {"unrealistic_queries", listed},
                                        {"realism_definition", objective_.realism_definition}},
                                       markers)});
  }
  if (!failing.empty()) {
    calls.push_back(
        {"violation", "reflect:violation",
         templates_.render("reflect_violation",
                           {{"current_prompts", prompt.text},
                            {"objective_violating_responses",
                             render_records(failing, true, context_.max_examples)},
                            {"objective_violating_criteria", violating_criteria}},
                           markers)});
  }
  if (!passing.empty()) {
    calls.push_back(
        {"compliant", "reflect:compliant",
         templates_.render("reflect_compliant",
                           {{"current_prompts", prompt.text},
                            {"objective_compliant_responses",
                             render_records(passing, false, context_.max_examples)},
                            {"objective_violating_criteria", violating_criteria},
                            {"objective_compliant_criteria", compliant_criteria}},
                           markers)});
  }
  auto replies = parallel_map<std::optional<std::pair<std::string, std::string>>>(
      calls.size(), static_cast<int>(calls.size()),
      [&](std::size_t i) { return ask_reflection(calls[i].user, calls[i].tag); });

  for (std::size_t i = 0; i < calls.size(); ++i) {
    if (!replies[i]) {
      bundle.dropped.push_back(calls[i].slot);
      continue;
    }
    auto& [reasoning, suggestions] = *replies[i];
    if (calls[i].slot == "realism") {
      RealismFeedback f{reasoning, suggestions, {}};
      for (const auto* s : unrealistic) f.source_queries.push_back(s->query);
      bundle.realism = std::move(f);
    } else if (calls[i].slot == "violation") {
      bundle.violation = ObjectiveFeedback{FeedbackKind::kViolation, reasoning, suggestions, {}};
    } else {
      bundle.compliant = ObjectiveFeedback{FeedbackKind::kCompliant, reasoning, suggestions, {}};
    }
  }

  auto targets = objective_.compliance_criteria();
  if (targets.empty()) {
    for (const auto& c : objective_.criteria) targets.push_back(&c);
  }
  std::vector<std::pair<std::string, int>> counts;
  for (const auto* c : targets) {
    int n = 0;
    for (const auto& r : records) {
      n += static_cast<int>(std::count(r.violated_criteria.begin(),
                                       r.violated_criteria.end(), c->id));
    }
    counts.emplace_back(c->id, n);
  }
  const std::string target = pick_underexplored_criterion(counts);
  const Criterion* tc = objective_.find(target);
  int target_count = 0;
  for (const auto& [id, n] : counts) {
    if (id == target) target_count = n;
  }
  bundle.criterion = ObjectiveFeedback{
      FeedbackKind::kCriterion,
      "Criterion " + target + " was violated in " + std::to_string(target_count) + " of " +
          std::to_string(records.size()) +
          " judged responses, the fewest among the objective criteria.",
      "Steer queries toward answers that fail this criterion: " + tc->description,
      target};

  if (bundle.empty()) throw ReflectionError("reflection produced no feedback");
  return bundle;
}

ExpandedPrompt PromptRefiner::expand(const PromptNode& parent, const FeedbackBundle& bundle,
                                     Direction direction, const RealismPolicy& policy,
                                     const std::vector<std::string>& history) const {
  const std::string slot = direction_slot(direction);
  std::string section;
  std::string feedback_type;
  if (slot == "violation") {
    if (!bundle.violation) throw PreconditionError("exploitation needs violation feedback");
    feedback_type = "objective-violation";
    section = templates_.render(
        "expand_section_violation",
        {{"objective_violating_reasoning", bundle.violation->reasoning},
         {"objective_violating_improvement_suggestions", bundle.violation->suggestions}});
  } else if (slot == "compliant") {
    if (!bundle.compliant) throw PreconditionError("exploration needs compliant feedback");
    feedback_type = "objective-compliant";
    section = templates_.render(
        "expand_section_compliant",
        {{"objective_compliant_reasoning", bundle.compliant->reasoning},
         {"objective_compliant_improvement_suggestions", bundle.compliant->suggestions}});
  } else {
    if (!bundle.criterion) throw PreconditionError("examination needs criterion feedback");
    feedback_type = "criterion-specific";
    const Criterion* c = objective_.find(*bundle.criterion->target_criterion);
    section = templates_.render(
        "expand_section_criterion",
        {{"target_criterion", c ? c->id + ": " + c->description
                                : *bundle.criterion->target_criterion}});
  }

  auto render = [&](const std::vector<std::string>& prev) {
    std::string listed;
    for (const auto& h : prev) {
      if (!listed.empty()) listed += '\n';
      listed += "- " + h;
    }
    return templates_.render(
        "expand_prompt",
        {{"objective_compliant_criteria", criteria_or_none(objective_.compliance_criteria())},
         {"objective_violating_criteria", criteria_or_none(objective_.failure_criteria())},
         {"realism_policy", policy.lines.empty() ? "(none yet)" : policy.text()},
         {"current_prompt", parent.text},
         {"unrealistic_reasoning", bundle.realism ? bundle.realism->reasoning
                                                  : "None; the queries were judged realistic."},
         {"realistic_improvement_suggestions",
          bundle.realism ? bundle.realism->suggestions : "None."},
         {"feedback_section", section},
         {"prev_prompts", listed.empty() ? "(none)" : listed}},
        {{"FEEDBACK_TYPE", feedback_type}});
  };

  const std::string tag = "expand:" + std::string(to_string(direction));
  std::vector<std::string> prev = history;
  for (int round = 0; round < 2; ++round) {
    const std::string user = render(prev);
    std::optional<ExpandedPrompt> parsed;
    for (int attempt = 0; attempt < 2 && !parsed; ++attempt) {
      const auto reply = ask(attempt == 0 ? user : user + templates_.text("reask_suffix"), tag);
      if (auto obj = extract_json_object(reply)) {
        if (auto p = string_member(*obj, {"prompt"}); p && !trim(*p).empty()) {
          parsed = ExpandedPrompt{trim(*p), string_member(*obj, {"reasoning"}).value_or("")};
        }
      }
    }
    if (!parsed) throw ParseError("expansion output malformed after a re-ask");
    if (std::find(prev.begin(), prev.end(), parsed->text) == prev.end()) return *parsed;
    prev.push_back(parsed->text);
  }
  throw DuplicatePromptError("expansion repeated an earlier prompt twice");
}

const PromptNode& expand_prompt(SearchTree& tree, const PromptRefiner& refiner,
                                const std::string& parent_id, const FeedbackBundle& bundle,
                                Direction direction, const RealismPolicy& policy,
                                const std::vector<std::string>& history) {
  auto e = refiner.expand(tree.prompt(parent_id), bundle, direction, policy, history);
  return tree.add_child_prompt(parent_id, std::move(e.text), direction, std::move(e.reasoning));
}

PromptGeneration refine_prompts(SearchTree& tree, const std::vector<std::string>& beam,
                                const PromptRefiner& refiner, RealismPolicy& policy, int k,
                                int parallelism, const PromptHooks& hooks) {
  if (beam.empty()) throw PreconditionError("prompt beam empty");
  PromptGeneration gen;

  std::vector<std::vector<InteractionRecord>> records;
  std::vector<std::vector<RealismSample>> samples;
  for (const auto& id : beam) {
    records.push_back(hooks.records ? hooks.records(id) : std::vector<InteractionRecord>{});
    samples.push_back(hooks.realism ? hooks.realism(id) : std::vector<RealismSample>{});
  }
  gen.bundles = parallel_map<FeedbackBundle>(beam.size(), parallelism, [&](std::size_t i) {
    if (records[i].empty()) {
      FeedbackBundle none;
      none.prompt = beam[i];
      return none;
    }
    return refiner.reflect(tree.prompt(beam[i]), records[i], samples[i]);
  });
  for (const auto& b : gen.bundles) {
    if (b.empty()) continue;
    if (hooks.reflected) hooks.reflected(b);
    if (b.realism) {
      policy.revise(b.realism->suggestions);
      if (hooks.policy_revised) hooks.policy_revised(policy);
    }
  }

  std::vector<std::string> history;
  for (const auto& id : tree.prompt_ids()) history.push_back(tree.prompt(id).text);

  struct Job {
    std::size_t beam_index;
    Direction direction;
  };
  std::vector<Job> jobs;
  for (std::size_t i = 0; i < beam.size(); ++i) {
    for (Direction d : kExpansionDirections) jobs.push_back({i, d});
  }
  struct Outcome {
    std::optional<ExpandedPrompt> prompt;
    std::string reason;
  };
  auto expand_one = [&](const Job& job, const std::vector<std::string>& prev) {
    const auto& bundle = gen.bundles[job.beam_index];
    try {
      return Outcome{refiner.expand(tree.prompt(beam[job.beam_index]), bundle,
                                    job.direction, policy, prev),
                     {}};
    } catch (const PreconditionError& e) {
      return Outcome{std::nullopt, e.what()};
    } catch (const ParseError& e) {
      return Outcome{std::nullopt, e.what()};
    } catch (const DuplicatePromptError& e) {
      return Outcome{std::nullopt, e.what()};
    }
  };
  auto outcomes = parallel_map<Outcome>(jobs.size(), parallelism,
                                        [&](std::size_t i) { return expand_one(jobs[i], history); });

  std::vector<int> child_count(beam.size(), 0);
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    Outcome out = std::move(outcomes[i]);
    if (out.prompt &&
        std::find(history.begin(), history.end(), out.prompt->text) != history.end()) {
      // A sibling merged earlier produced the same text; ask again with it listed.
      out = expand_one(jobs[i], history);
      if (out.prompt &&
          std::find(history.begin(), history.end(), out.prompt->text) != history.end()) {
        out = Outcome{std::nullopt, "expansion repeated an earlier prompt"};
      }
    }
    const auto& parent = beam[jobs[i].beam_index];
    if (!out.prompt) {
      if (hooks.skipped) hooks.skipped(parent, jobs[i].direction, out.reason);
      continue;
    }
    const auto& child = tree.add_child_prompt(parent, out.prompt->text, jobs[i].direction,
                                              out.prompt->reasoning);
    history.push_back(child.text);
    gen.children.push_back(child.node_id);
    ++child_count[jobs[i].beam_index];
    if (hooks.created) hooks.created(child);
  }

  if (hooks.evaluate_children) hooks.evaluate_children(gen.children);

  std::vector<const PromptNode*> pool;
  for (const auto& id : beam) pool.push_back(&tree.prompt(id));
  for (const auto& id : gen.children) pool.push_back(&tree.prompt(id));
  gen.beam = select_prompts(pool, k);
  for (std::size_t i = 0; i < pool.size(); ++i) {
    auto& node = tree.prompt_mut(pool[i]->node_id);
    const bool kept = std::find(gen.beam.begin(), gen.beam.end(), node.node_id) != gen.beam.end();
    if (kept) {
      node.status = NodeStatus::kLive;
    } else if (i < beam.size() && child_count[i] == 0) {
      node.status = NodeStatus::kExhausted;
    } else {
      node.status = NodeStatus::kPruned;
    }
  }
  if (hooks.selected) hooks.selected(gen.beam);
  return gen;
}

}  // namespace agentprobe
