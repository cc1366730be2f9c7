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
#include <deque>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "agentprobe/gateway.hpp"

namespace agentprobe {

// One recorded call: {ordinal, key, request, response, usage, latency_ms}.
struct CassetteEntry {
  std::uint64_t ordinal = 0;
  std::string key;
  ChatRequest request;
  std::string response;
  TokenUsage usage;
  double latency_ms = 0.0;
};

json to_json(const CassetteEntry& e);
CassetteEntry cassette_entry_from_json(const json& j);

// Append-only cassette writer. Callers take a ticket before dispatching a
// request; entries are written in ticket order even when responses complete
// out of order. Failed calls release their ticket without writing.
class CassetteRecorder {
 public:
  // Appends to `path`; existing entries are kept and ordinals continue.
  explicit CassetteRecorder(const std::string& path);

  std::uint64_t take_ticket();
  void complete(std::uint64_t ticket, const ChatRequest& request,
                const ChatResponse& response);
  void abandon(std::uint64_t ticket);

 private:
  void flush_ready();

  std::mutex mu_;
  std::ofstream out_;
  std::uint64_t next_ticket_ = 0;
  std::uint64_t next_to_write_ = 0;
  std::uint64_t next_ordinal_ = 0;
  std::map<std::uint64_t, std::optional<CassetteEntry>> pending_;
};

// Serves recorded responses. The n-th request with a given key receives the
// n-th entry recorded under that key; a request with no remaining entry is a
// cassette miss.
class Cassette {
 public:
  static Cassette load(const std::string& path);
  explicit Cassette(std::vector<CassetteEntry> entries);
  Cassette(Cassette&& other) noexcept
      : by_key_(std::move(other.by_key_)), size_(other.size_) {}

  // Throws CassetteMissError.
  CassetteEntry next(const ChatRequest& request);
  std::size_t size() const { return size_; }
  std::size_t remaining() const;

 private:
  mutable std::mutex mu_;
  std::map<std::string, std::deque<CassetteEntry>> by_key_;
  std::size_t size_ = 0;
};

// Chat backend answering from a shared cassette (strict replay).
class ReplayBackend : public ChatBackend {
 public:
  explicit ReplayBackend(std::shared_ptr<Cassette> cassette)
      : cassette_(std::move(cassette)) {}
  ChatResponse complete(const ChatRequest& request) override;

 private:
  std::shared_ptr<Cassette> cassette_;
};

}  // namespace agentprobe
