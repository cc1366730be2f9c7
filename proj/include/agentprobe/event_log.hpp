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
#include <fstream>
#include <string>
#include <vector>

#include "agentprobe/gateway.hpp"

namespace agentprobe {

// One line of the run log. `ts` is wall-clock time and is excluded from the
// canonical form.
struct RunEvent {
  std::uint64_t ordinal = 0;
  std::string kind;
  int generation = 0;
  json payload;
  TokenUsage usage_delta;  // ledger growth since the previous event
  TokenUsage usage_total;
  std::string ts;
};

json to_json(const RunEvent& e);
RunEvent run_event_from_json(const json& j);

// The event serialized without its timestamp.
std::string canonical_line(const RunEvent& e);
std::string canonical_log(const std::vector<RunEvent>& events);
std::string canonical_hash(const std::vector<RunEvent>& events);

struct LoadedLog {
  std::vector<RunEvent> events;
  bool dropped_partial_line = false;
};

// Reads a log. A final line that is cut short (no newline, not JSON) is
// dropped; any other malformed line, or a break in the ordinal sequence
// 0, 1, 2, ..., throws IntegrityError naming the position.
LoadedLog read_event_log(const std::string& path);

// Rewrites `path` so that only its first `keep` events remain.
void truncate_event_log(const std::string& path, std::size_t keep);

// Append-only writer; each event is flushed as one line.
class EventLogWriter {
 public:
  EventLogWriter(const std::string& path, std::uint64_t next_ordinal, TokenUsage last_total);

  // Returns the ordinal assigned to the event.
  std::uint64_t append(std::string kind, int generation, json payload,
                       const TokenUsage& usage_total);
  std::uint64_t next_ordinal() const { return next_ordinal_; }

 private:
  std::ofstream out_;
  std::uint64_t next_ordinal_;
  TokenUsage last_total_;
};

}  // namespace agentprobe
