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
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "agentprobe/error.hpp"
#include "agentprobe/event_log.hpp"
#include "agentprobe/gateway.hpp"
#include "agentprobe/prompt_refinement.hpp"
#include "agentprobe/report.hpp"
#include "agentprobe/run_config.hpp"
#include "agentprobe/strategies.hpp"
#include "agentprobe/tree.hpp"

namespace agentprobe {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitRuntime = 3;
inline constexpr int kExitBudget = 4;

// A failure after the run started; the log is durable up to `last_ordinal`.
class RunAborted : public Error {
 public:
  RunAborted(const std::string& what, std::optional<std::uint64_t> last_ordinal)
      : Error(what), last_ordinal(last_ordinal) {}
  std::optional<std::uint64_t> last_ordinal;
};

enum class RunStatus { kCompleted, kBudgetHalted };

struct RunOutcome {
  RunStatus status = RunStatus::kCompleted;
  bool resumed = false;
  int generations_completed = 0;  // generation 0 included
  std::uint64_t last_ordinal = 0;
  UsageLedger ledger;
  MetricsReport report;
};

// Well-known file names inside a run directory.
inline constexpr const char* kEventLogFile = "events.jsonl";
inline constexpr const char* kConfigFile = "config.json";
inline constexpr const char* kCassetteFile = "cassette.jsonl";

// Registers chat backends and embedders for `config.mode`. Mock mode serves
// mock and http backends from SyntheticBackend; replay serves every chat
// backend from the cassette; record also attaches a recorder writing to
// `record_path`. http embedders fall back to the hash embedder outside
// live/record.
std::unique_ptr<Gateway> make_gateway(const RunConfig& config,
                                      const std::string& record_path = {});

// Run state rebuilt from events.
struct FoldedRun {
  SearchTree tree;
  std::map<std::string, std::vector<JudgeVote>> votes;
  std::vector<StrategySpec> strategies;
  std::vector<std::string> beam;
  RealismPolicy policy;
  UsageLedger ledger;
  int generation = -1;  // last completed generation
  bool halted = false;
  bool finished = false;  // metrics emitted
};

FoldedRun fold_events(const std::vector<RunEvent>& events);

// Executes (or resumes) a run into `out_dir`. A log that already ends with
// its metrics is left untouched. Throws ConfigError before any event is
// written and RunAborted afterwards.
RunOutcome run(RunConfig config, const std::string& out_dir);

// Recomputes the metrics of a run directory from its event log. When
// `baseline_path` is empty the baseline configured for the run is used.
MetricsReport compute_report(const std::string& run_dir,
                             const std::string& baseline_path = {});

// Prompt-ancestor chain, then (for a query id) the query-ancestor chain.
// Throws PreconditionError for an unknown id.
std::string trace(const std::string& run_dir, const std::string& node_id);

}  // namespace agentprobe
