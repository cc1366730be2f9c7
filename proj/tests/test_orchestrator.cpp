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

#include <fstream>
#include <sstream>

#include "agentprobe/error.hpp"
#include "agentprobe/event_log.hpp"
#include "agentprobe/orchestrator.hpp"
#include "agentprobe/report.hpp"
#include "test_support.hpp"

using namespace agentprobe;

namespace {

std::vector<RunEvent> events_of(const testsupport::TempDir& dir) {
  return read_event_log(dir.str(kEventLogFile)).events;
}

std::string hash_of(const testsupport::TempDir& dir) { return canonical_hash(events_of(dir)); }

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::size_t count_kind(const std::vector<RunEvent>& events, const std::string& kind) {
  std::size_t n = 0;
  for (const auto& e : events) n += e.kind == kind ? 1 : 0;
  return n;
}

RunConfig small() { return testsupport::mock_config(2, 2, 2, 2, 2); }

}  // namespace

TEST(Run, MockRunsAreDeterministic) {
  testsupport::TempDir a;
  testsupport::TempDir b;
  const auto oa = run(small(), a.str());
  const auto ob = run(small(), b.str());
  EXPECT_EQ(oa.status, RunStatus::kCompleted);
  EXPECT_FALSE(oa.resumed);
  EXPECT_EQ(oa.generations_completed, 3);
  EXPECT_EQ(hash_of(a), hash_of(b));
  EXPECT_EQ(oa.ledger, ob.ledger);

  const auto events = events_of(a);
  EXPECT_EQ(events.front().kind, "run-started");
  EXPECT_EQ(events.back().kind, "metrics-emitted");
  EXPECT_EQ(count_kind(events, "generation-completed"), 3u);
  EXPECT_EQ(oa.last_ordinal, events.back().ordinal);
}

TEST(Run, LedgerIsTheSumOfUsageDeltas) {
  testsupport::TempDir dir;
  const auto out = run(small(), dir.str());
  TokenUsage sum;
  for (const auto& e : events_of(dir)) sum += e.usage_delta;
  EXPECT_EQ(sum, out.ledger.total);
  EXPECT_EQ(events_of(dir).back().usage_total, out.ledger.total);
}

TEST(Run, FoldRebuildsTree) {
  testsupport::TempDir dir;
  run(small(), dir.str());
  const auto events = events_of(dir);
  const auto folded = fold_events(events);
  EXPECT_TRUE(folded.finished);
  EXPECT_FALSE(folded.halted);
  EXPECT_EQ(folded.generation, 2);
  EXPECT_EQ(folded.tree.prompt_ids().size(), count_kind(events, "prompt-created"));
  EXPECT_EQ(folded.tree.query_ids().size(), count_kind(events, "query-created"));
  EXPECT_EQ(folded.beam.size(), 2u);
  EXPECT_NO_THROW(folded.tree.check_well_formed());
}

TEST(Run, ResumeAfterTruncationMatchesUninterruptedRun) {
  testsupport::TempDir ref;
  run(small(), ref.str());
  const auto expected = hash_of(ref);
  const auto n = events_of(ref).size();
  for (std::size_t keep : {std::size_t{0}, std::size_t{1}, n / 3, n / 2, n - 2, n - 1}) {
    testsupport::TempDir dir;
    run(small(), dir.str());
    truncate_event_log(dir.str(kEventLogFile), keep);
    const auto out = run(small(), dir.str());
    EXPECT_EQ(hash_of(dir), expected) << "keep " << keep;
    EXPECT_EQ(out.status, RunStatus::kCompleted);
  }
}

TEST(Run, FinishedLogIsLeftAlone) {
  testsupport::TempDir dir;
  run(small(), dir.str());
  const auto before = slurp(dir.str(kEventLogFile));
  const auto out = run(small(), dir.str());
  EXPECT_TRUE(out.resumed);
  EXPECT_EQ(slurp(dir.str(kEventLogFile)), before);
}

TEST(Run, ResumeWithDifferentIdentityIsConfigError) {
  testsupport::TempDir dir;
  run(small(), dir.str());
  auto other = small();
  other.budget.rng_seed = 99;
  EXPECT_THROW(run(other, dir.str()), ConfigError);
}

TEST(Run, BudgetHaltAfterFirstWave) {
  testsupport::TempDir dir;
  auto c = small();
  c.budget.max_total_tokens = 1;
  const auto out = run(c, dir.str());
  EXPECT_EQ(out.status, RunStatus::kBudgetHalted);
  EXPECT_EQ(out.generations_completed, 1);
  EXPECT_TRUE(out.report.partial);
  const auto events = events_of(dir);
  ASSERT_GE(events.size(), 3u);
  EXPECT_EQ(events[events.size() - 2].kind, "budget-halted");
  EXPECT_EQ(events[events.size() - 3].kind, "generation-completed");
  EXPECT_EQ(count_kind(events, "prompt-created"), 1u);
  const auto folded = fold_events(events);
  EXPECT_TRUE(folded.halted);
}

TEST(Run, RecordThenReplayReproducesLog) {
  testsupport::TempDir rec;
  auto c = small();
  c.mode = RunMode::kRecord;
  const auto recorded = run(c, rec.str());
  ASSERT_TRUE(std::filesystem::exists(rec.str(kCassetteFile)));

  testsupport::TempDir rep;
  auto r = small();
  r.mode = RunMode::kReplay;
  r.cassette = rec.str(kCassetteFile);
  const auto replayed = run(r, rep.str());
  EXPECT_EQ(hash_of(rep), hash_of(rec));
  EXPECT_EQ(replayed.ledger.total, recorded.ledger.total);

  // The mock run and the recorded run share their log as well.
  testsupport::TempDir mock;
  run(small(), mock.str());
  EXPECT_EQ(hash_of(mock), hash_of(rec));
}

TEST(Report, RecomputedReportMatchesWrittenFiles) {
  testsupport::TempDir dir;
  const auto out = run(small(), dir.str());
  const auto again = compute_report(dir.str());
  EXPECT_EQ(render_struct(again), render_struct(out.report));
  EXPECT_EQ(render_table(again), slurp(dir.str("report.txt")));
  EXPECT_EQ(render_csv(again), slurp(dir.str("report.csv")));
  EXPECT_FALSE(again.partial);
  EXPECT_EQ(again.n_queries, count_kind(events_of(dir), "judged"));
  ASSERT_TRUE(again.failure_rate.has_value());
  EXPECT_DOUBLE_EQ(*again.failure_rate, static_cast<double>(again.n_violations) /
                                            static_cast<double>(again.n_queries));
}

TEST(Report, TruncatedLogIsPartial) {
  testsupport::TempDir dir;
  run(small(), dir.str());
  truncate_event_log(dir.str(kEventLogFile), events_of(dir).size() / 2);
  const auto r = compute_report(dir.str());
  EXPECT_TRUE(r.partial);
  EXPECT_EQ(r.last_ordinal, events_of(dir).back().ordinal);
  testsupport::TempDir empty;
  EXPECT_THROW(compute_report(empty.str()), PreconditionError);
}

TEST(Trace, RootPromptAndUnknownNode) {
  testsupport::TempDir dir;
  run(small(), dir.str());
  const auto folded = fold_events(events_of(dir));
  std::string root;
  for (const auto& id : folded.tree.prompt_ids()) {
    if (!folded.tree.prompt(id).parent) root = id;
  }
  const auto t = trace(dir.str(), root);
  EXPECT_EQ(t.find("prompt chain (depth 0 to 0)\n"), 0u);
  EXPECT_NE(t.find("depth 0 | root |"), std::string::npos);
  EXPECT_EQ(t.find("query chain"), std::string::npos);
  EXPECT_THROW(trace(dir.str(), "q-0000000000000000"), PreconditionError);

  const auto& any_query = folded.tree.query_ids().back();
  const auto qt = trace(dir.str(), any_query);
  EXPECT_NE(qt.find("query chain ("), std::string::npos);
  EXPECT_NE(qt.find(any_query), std::string::npos);
}
