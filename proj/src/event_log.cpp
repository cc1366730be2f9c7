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

#include "agentprobe/event_log.hpp"

#include <chrono>
#include <ctime>
#include <filesystem>

#include "agentprobe/error.hpp"
#include "agentprobe/hash.hpp"

namespace agentprobe {

namespace {

std::string now_utc() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json canonical_json(const RunEvent& e) {
  json j = to_json(e);
  j.erase("ts");
  return j;
}

}  // namespace

json to_json(const RunEvent& e) {
  json delta;
  json total;
  to_json(delta, e.usage_delta);
  to_json(total, e.usage_total);
  return json{{"ordinal", e.ordinal},       {"kind", e.kind},
              {"generation", e.generation}, {"payload", e.payload},
              {"usage_delta", delta},       {"usage_total", total},
              {"ts", e.ts}};
}

RunEvent run_event_from_json(const json& j) {
  RunEvent e;
  e.ordinal = j.at("ordinal").get<std::uint64_t>();
  e.kind = j.at("kind").get<std::string>();
  e.generation = j.value("generation", 0);
  e.payload = j.value("payload", json::object());
  e.usage_delta = j.at("usage_delta").get<TokenUsage>();
  e.usage_total = j.at("usage_total").get<TokenUsage>();
  e.ts = j.value("ts", std::string{});
  return e;
}

std::string canonical_line(const RunEvent& e) { return canonical_json(e).dump(); }

std::string canonical_log(const std::vector<RunEvent>& events) {
  std::string out;
  for (const auto& e : events) out += canonical_line(e) + "\n";
  return out;
}

std::string canonical_hash(const std::vector<RunEvent>& events) {
  return sha256_hex(canonical_log(events));
}

LoadedLog read_event_log(const std::string& path) {
  const std::string content = read_file(path);
  LoadedLog log;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < content.size()) {
    const auto nl = content.find('\n', pos);
    const bool terminated = nl != std::string::npos;
    const std::string line = content.substr(pos, terminated ? nl - pos : std::string::npos);
    pos = terminated ? nl + 1 : content.size();
    ++line_no;
    if (trim(line).empty()) continue;
    auto j = json::parse(line, nullptr, false);
    if (j.is_discarded()) {
      if (!terminated) {
        log.dropped_partial_line = true;
        break;
      }
      throw IntegrityError("event log line " + std::to_string(line_no) + " is not JSON");
    }
    RunEvent e;
    try {
      e = run_event_from_json(j);
    } catch (const nlohmann::json::exception& ex) {
      throw IntegrityError("event log line " + std::to_string(line_no) +
                           " malformed: " + ex.what());
    }
    const std::uint64_t expected = log.events.size();
    if (e.ordinal != expected) {
      throw IntegrityError("event log ordinal gap: expected " + std::to_string(expected) +
                           ", found " + std::to_string(e.ordinal) + " at line " +
                           std::to_string(line_no));
    }
    log.events.push_back(std::move(e));
  }
  return log;
}

void truncate_event_log(const std::string& path, std::size_t keep) {
  const std::string content = read_file(path);
  std::size_t pos = 0;
  std::size_t kept = 0;
  while (kept < keep && pos < content.size()) {
    const auto nl = content.find('\n', pos);
    if (nl == std::string::npos) break;
    if (!trim(std::string_view(content).substr(pos, nl - pos)).empty()) ++kept;
    pos = nl + 1;
  }
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << content.substr(0, pos);
    if (!out) throw Error("cannot rewrite event log " + path);
  }
  std::filesystem::rename(tmp, path);
}

EventLogWriter::EventLogWriter(const std::string& path, std::uint64_t next_ordinal,
                               TokenUsage last_total)
    : out_(path, std::ios::app | std::ios::binary),
      next_ordinal_(next_ordinal),
      last_total_(last_total) {
  if (!out_) throw Error("cannot open event log " + path);
}

std::uint64_t EventLogWriter::append(std::string kind, int generation, json payload,
                                     const TokenUsage& usage_total) {
  RunEvent e;
  e.ordinal = next_ordinal_++;
  e.kind = std::move(kind);
  e.generation = generation;
  e.payload = std::move(payload);
  e.usage_total = usage_total;
  e.usage_delta = TokenUsage{usage_total.prompt_tokens - last_total_.prompt_tokens,
                             usage_total.completion_tokens - last_total_.completion_tokens};
  e.ts = now_utc();
  last_total_ = usage_total;
  out_ << to_json(e).dump() << '\n';
  out_.flush();
  return e.ordinal;
}

}  // namespace agentprobe
