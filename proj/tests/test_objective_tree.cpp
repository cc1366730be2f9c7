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

#include <gtest/gtest.h>

#include <sstream>

#include "agentprobe/error.hpp"
#include "agentprobe/hash.hpp"
#include "agentprobe/objective.hpp"
#include "agentprobe/tree.hpp"
#include "test_support.hpp"

using namespace agentprobe;

TEST(Objective, HelpfulnessRubricWeights) {
  auto s = helpfulness_objective({"a", "b", "c"}, {"a", "b", "c"});
  ASSERT_EQ(s.criteria.size(), 3u);
  EXPECT_EQ(s.criteria[0].id, "unhelpful");
  EXPECT_DOUBLE_EQ(s.criteria[0].weight, 0.0);
  EXPECT_EQ(s.criteria[1].id, "partially_helpful");
  EXPECT_DOUBLE_EQ(s.criteria[1].weight, 0.5);
  EXPECT_EQ(s.criteria[2].id, "helpful");
  EXPECT_DOUBLE_EQ(s.criteria[2].weight, 1.0);
  EXPECT_EQ(s.compliance_criteria().size(), 2u);
  EXPECT_EQ(s.failure_criteria().size(), 1u);
}

TEST(Objective, RejectsBrokenInvariants) {
  auto base = testsupport::weighted_objective({0.0, 1.0});
  auto dup = base;
  dup.criteria.push_back(dup.criteria[0]);
  EXPECT_THROW(validate_objective(dup), ValidationError);
  auto weight = base;
  weight.criteria[0].weight = 1.5;
  EXPECT_THROW(validate_objective(weight), ValidationError);
  auto even = base;
  even.judge_roster = {"a", "b"};
  EXPECT_THROW(validate_objective(even), ValidationError);
  auto thr = base;
  thr.violation_threshold = 0.0;
  EXPECT_THROW(validate_objective(thr), ValidationError);
  auto empty = base;
  empty.criteria.clear();
  EXPECT_THROW(validate_objective(empty), ValidationError);
}

TEST(Objective, JsonRoundTrip) {
  auto s = testsupport::weighted_objective({0.0, 0.5, 1.0});
  EXPECT_EQ(json(s).get<ObjectiveSpec>(), s);
}

TEST(Catalog, LoadsItemsInFileOrder) {
  std::istringstream in(
      R"({"item_id": "x", "product_name": "X", "attributes": {"b": "2", "a": "1"}})"
      "\n\n"
      R"({"item_id": "y", "product_name": "Y", "attributes": {}, "category": "home"})"
      "\n");
  auto items = load_domain_knowledge(in);
  ASSERT_EQ(items.size(), 2u);
  EXPECT_EQ(items[0].attributes.front().first, "b");
  EXPECT_EQ(items[1].category, "home");
  EXPECT_NE(items[0].describe().find("\"product_name\": \"X\""), std::string::npos);
}

TEST(Catalog, ReportsRecordIndexAndDuplicates) {
  std::istringstream bad("{\"item_id\": \"x\", \"product_name\": \"X\", \"attributes\": {}}\nnot json\n");
  try {
    load_domain_knowledge(bad);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.index(), 1);
  }
  std::istringstream dup(
      "{\"item_id\": \"x\", \"product_name\": \"X\", \"attributes\": {}}\n"
      "{\"item_id\": \"x\", \"product_name\": \"Z\", \"attributes\": {}}\n");
  EXPECT_THROW(load_domain_knowledge(dup), ValidationError);
}

TEST(Tree, NodeIdIsPrefixedDigest) {
  // Independent construction: prefix, dash, first 16 hex of sha256(parent|ordinal|text).
  EXPECT_EQ(make_node_id('q', "p-1", 3, "hi"), "q-" + sha256_hex("p-1|3|hi").substr(0, 16));
}

TEST(Tree, BuildsLinkedPromptAndQueryTrees) {
  SearchTree t;
  const auto root = t.add_root_prompt("root").node_id;
  const auto child = t.add_child_prompt(root, "child", Direction::kExploration, "why").node_id;
  EXPECT_EQ(t.prompt(child).depth, 1);
  EXPECT_EQ(t.prompt(child).parent, root);
  const auto seed = t.add_seed_query(child, "q0", "item").node_id;
  const auto q1 = t.add_child_query(seed, "q1", "typo", 1).node_id;
  const auto q2 = t.add_child_query(q1, "q2", "word-delete", 2).node_id;
  EXPECT_EQ(t.query(q2).origin_prompt, child);
  EXPECT_EQ(t.query(q2).item_id, "item");
  EXPECT_EQ(t.seed_of(q2).node_id, seed);
  EXPECT_EQ(t.prompt_ids().size(), 2u);
  EXPECT_EQ(t.query_ids(), (std::vector<std::string>{seed, q1, q2}));
  EXPECT_NO_THROW(t.check_well_formed());
  EXPECT_LT(t.query(seed).ordinal, t.query(q1).ordinal);
}

TEST(Tree, RejectsUnknownParents) {
  SearchTree t;
  EXPECT_THROW(t.add_seed_query("p-missing", "q", "i"), IntegrityError);
  EXPECT_THROW(t.add_child_query("q-missing", "q", "typo", 1), IntegrityError);
  EXPECT_THROW(t.prompt("p-missing"), IntegrityError);
}

TEST(Tree, WellFormednessCatchesDepthMismatch) {
  SearchTree t;
  const auto root = t.add_root_prompt("root").node_id;
  PromptNode bad;
  bad.node_id = "p-bad";
  bad.parent = root;
  bad.depth = 3;
  bad.ordinal = 99;
  t.insert(bad);
  EXPECT_THROW(t.check_well_formed(), IntegrityError);
}

TEST(Tree, JsonRoundTripPreservesEverything) {
  SearchTree t;
  const auto root = t.add_root_prompt("root").node_id;
  t.prompt_mut(root).score = 0.25;
  const auto seed = t.add_seed_query(root, "q0", "item").node_id;
  auto& q = t.query_mut(seed);
  q.reward = 0.5;
  q.kept_criteria = {"partially_helpful"};
  q.realism_score = 4.0;
  const auto back = tree_from_json(tree_to_json(t));
  EXPECT_TRUE(back == t);
  EXPECT_EQ(back.next_ordinal(), t.next_ordinal());
}

TEST(Budget, DefaultsAndValidation) {
  RunBudget b;
  EXPECT_EQ(b.prompt_iterations, 4);
  EXPECT_EQ(b.prompt_beam, 2);
  EXPECT_EQ(b.query_iterations, 3);
  EXPECT_EQ(b.query_beam, 3);
  EXPECT_NO_THROW(validate_budget(b));
  b.query_beam = 0;
  EXPECT_THROW(validate_budget(b), ValidationError);
  RunBudget neg;
  neg.max_total_tokens = -1;
  EXPECT_THROW(validate_budget(neg), ValidationError);
  EXPECT_EQ(json(RunBudget{}).get<RunBudget>(), RunBudget{});
}
