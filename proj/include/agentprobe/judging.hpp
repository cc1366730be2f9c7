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

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "agentprobe/gateway.hpp"
#include "agentprobe/objective.hpp"
#include "agentprobe/templates.hpp"
#include "agentprobe/tree.hpp"

namespace agentprobe {

struct JudgeVerdict {
  std::vector<std::string> kept_criteria;  // objective catalog order
  double reward = 0.0;
  bool is_violation = false;
  std::vector<JudgeVote> votes;
};

struct RealismVerdict {
  std::map<std::string, int> per_judge;
  double mean = 0.0;
};

// Mean weight of `kept`; 0.0 for the empty set. Throws ValidationError on an
// id the objective does not define.
double reward_of(const std::vector<std::string>& kept, const ObjectiveSpec& objective);

// Majority merge: a criterion is kept iff strictly more than half of the
// non-abstaining votes selected it. Vote order does not matter. Throws
// JudgingError when more than half of the votes abstained.
JudgeVerdict aggregate_votes(std::vector<JudgeVote> votes, const ObjectiveSpec& objective);

// Violated criteria of a verdict. Only failures violate anything: compliance
// criteria (weight >= threshold) the majority did not keep, plus
// failure-describing criteria (weight < threshold) it did keep.
std::vector<std::string> violated_criteria(const std::vector<std::string>& kept,
                                           bool is_violation,
                                           const ObjectiveSpec& objective);

// Parses `{"criteria": [...]}` from judge output. Ids are matched against
// the objective case-insensitively; an unknown id is a parse failure.
std::optional<std::vector<std::string>> parse_criteria_selection(
    std::string_view text, const ObjectiveSpec& objective);
std::optional<std::string> parse_rationale(std::string_view text);
// Integer `score` in [1, 5].
std::optional<int> parse_realism_score(std::string_view text);

// "- id: description" lines in catalog order.
std::string render_criteria(const std::vector<const Criterion*>& criteria);
std::string render_criteria(const ObjectiveSpec& objective);

// Runs the judge rosters through the gateway. Calls for one verdict are
// issued concurrently; each unparseable reply gets one re-ask.
class Judge {
 public:
  Judge(Gateway& gateway, const ObjectiveSpec& objective,
        const TemplateSet& templates, double temperature = 1.0)
      : gateway_(gateway),
        objective_(objective),
        templates_(templates),
        temperature_(temperature) {}

  // Tag "judge:response". A judge whose reply stays unparseable abstains.
  JudgeVerdict judge_response(const std::string& query, const std::string& answer);
  // Tag "judge:realism". Throws JudgingError naming the judge whose reply
  // stays unparseable or out of range.
  RealismVerdict judge_realism(const std::string& query);

  const ObjectiveSpec& objective() const { return objective_; }

 private:
  std::string ask(const std::string& judge, const std::string& user,
                  const std::string& tag, bool reask);

  Gateway& gateway_;
  const ObjectiveSpec& objective_;
  const TemplateSet& templates_;
  double temperature_;
};

}  // namespace agentprobe
