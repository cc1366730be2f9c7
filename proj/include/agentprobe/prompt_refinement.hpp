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

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "agentprobe/gateway.hpp"
#include "agentprobe/objective.hpp"
#include "agentprobe/templates.hpp"
#include "agentprobe/tree.hpp"

namespace agentprobe {

struct RealismFeedback {
  std::string reasoning;
  std::string suggestions;
  std::vector<std::string> source_queries;

  bool operator==(const RealismFeedback&) const = default;
};

enum class FeedbackKind { kViolation, kCompliant, kCriterion };
std::string_view to_string(FeedbackKind k);

struct ObjectiveFeedback {
  FeedbackKind kind = FeedbackKind::kViolation;
  std::string reasoning;
  std::string suggestions;
  std::optional<std::string> target_criterion;  // criterion kind only

  bool operator==(const ObjectiveFeedback&) const = default;
};

struct FeedbackBundle {
  std::string prompt;
  std::optional<RealismFeedback> realism;
  std::optional<ObjectiveFeedback> violation;
  std::optional<ObjectiveFeedback> compliant;
  std::optional<ObjectiveFeedback> criterion;
  std::vector<std::string> dropped;  // slots whose reflection output stayed malformed

  bool empty() const { return !realism && !violation && !compliant && !criterion; }
  bool operator==(const FeedbackBundle&) const = default;
};

void to_json(json& j, const FeedbackBundle& b);
void from_json(const json& j, FeedbackBundle& b);

// Accumulated realism guidance. Suggestions are split into lines, deduplicated
// and appended; the oldest lines fall off beyond `cap`.
struct RealismPolicy {
  std::vector<std::string> lines;
  int revision = 0;
  std::size_t cap = 20;

  std::string text() const;
  void revise(const std::string& suggestions);
  bool operator==(const RealismPolicy&) const = default;
};

void to_json(json& j, const RealismPolicy& p);
void from_json(const json& j, RealismPolicy& p);

// Realism verdict mean of one attributed query.
struct RealismSample {
  std::string query;
  std::string text;
  double mean = 0.0;
};

// Highest violation rate first; ties by lower mean reward, then older
// ordinal. Throws PreconditionError on an unscored prompt.
std::vector<std::string> select_prompts(const std::vector<const PromptNode*>& pool, int k);

// Argmin over the counts in catalog order; the first minimum wins.
std::string pick_underexplored_criterion(
    const std::vector<std::pair<std::string, int>>& counts);

struct PromptContext {
  std::string agent_type = "an online shopping assistant";
  std::string domain_knowledge = "product information (name and attributes)";
  double realism_cut = 3.0;
  std::size_t max_examples = 10;  // records quoted per reflection prompt
};

struct ExpandedPrompt {
  std::string text;
  std::string reasoning;
};

class PromptRefiner {
 public:
  PromptRefiner(Gateway& gateway, const TemplateSet& templates,
                const ObjectiveSpec& objective, std::string backend, PromptContext context,
                double temperature = 1.0)
      : gateway_(gateway),
        templates_(templates),
        objective_(objective),
        backend_(std::move(backend)),
        context_(std::move(context)),
        temperature_(temperature) {}

  // Realism feedback from samples under the cut, violation feedback from
  // failing records, compliant feedback from passing ones (tags
  // "reflect:realism|violation|compliant"), and criterion feedback computed
  // from violation counts without a model call. Throws PreconditionError on
  // empty records and ReflectionError when every slot ends up empty.
  FeedbackBundle reflect(const PromptNode& prompt,
                         const std::vector<InteractionRecord>& records,
                         const std::vector<RealismSample>& realism) const;

  // Tag "expand:<direction>". Throws PreconditionError when the direction's
  // slot is missing, ParseError on output that stays malformed after a
  // re-ask, and DuplicatePromptError when the new text is already in
  // `history` (after one retry that lists the duplicate as well).
  ExpandedPrompt expand(const PromptNode& parent, const FeedbackBundle& bundle,
                        Direction direction, const RealismPolicy& policy,
                        const std::vector<std::string>& history) const;

  const ObjectiveSpec& objective() const { return objective_; }

 private:
  std::optional<std::pair<std::string, std::string>> ask_reflection(
      const std::string& user, const std::string& tag) const;
  std::string ask(const std::string& user, const std::string& tag) const;

  Gateway& gateway_;
  const TemplateSet& templates_;
  const ObjectiveSpec& objective_;
  std::string backend_;
  PromptContext context_;
  double temperature_;
};

// Creates the child prompt for one expansion.
const PromptNode& expand_prompt(SearchTree& tree, const PromptRefiner& refiner,
                                const std::string& parent_id, const FeedbackBundle& bundle,
                                Direction direction, const RealismPolicy& policy,
                                const std::vector<std::string>& history);

struct PromptHooks {
  // Records and realism samples attributed to a prompt.
  std::function<std::vector<InteractionRecord>(const std::string&)> records;
  std::function<std::vector<RealismSample>(const std::string&)> realism;
  std::function<void(const FeedbackBundle&)> reflected;
  std::function<void(const RealismPolicy&)> policy_revised;
  std::function<void(const PromptNode&)> created;
  std::function<void(const std::string& parent, Direction, const std::string& reason)>
      skipped;
  // Must leave every listed child scored.
  std::function<void(const std::vector<std::string>&)> evaluate_children;
  std::function<void(const std::vector<std::string>& beam)> selected;
};

struct PromptGeneration {
  std::vector<FeedbackBundle> bundles;
  std::vector<std::string> children;
  std::vector<std::string> beam;
};

// One prompt generation: reflect on every beam prompt, revise the policy,
// expand each prompt in the three directions (skipping directions without
// feedback or whose output is malformed or duplicate), evaluate the children,
// and select the next beam from beam and children. Beam prompts that yield
// no child are marked exhausted; prompts left out of the beam are pruned.
PromptGeneration refine_prompts(SearchTree& tree, const std::vector<std::string>& beam,
                                const PromptRefiner& refiner, RealismPolicy& policy, int k,
                                int parallelism, const PromptHooks& hooks);

}  // namespace agentprobe
