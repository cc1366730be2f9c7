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

#include <chrono>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <span>
#include <string>
#include <vector>

#include "agentprobe/json_util.hpp"

namespace agentprobe {

struct TokenUsage {
  std::int64_t prompt_tokens = 0;
  std::int64_t completion_tokens = 0;

  std::int64_t total() const { return prompt_tokens + completion_tokens; }
  TokenUsage& operator+=(const TokenUsage& o) {
    prompt_tokens += o.prompt_tokens;
    completion_tokens += o.completion_tokens;
    return *this;
  }
  bool operator==(const TokenUsage&) const = default;
};

struct ChatRequest {
  std::string backend_id;
  std::optional<std::string> system;
  std::string user;
  double temperature = 1.0;
  std::optional<int> max_output_tokens;
  std::string tag;  // call site, e.g. "expand:exploitation"
};

struct ChatResponse {
  std::string text;
  TokenUsage usage;
  std::string backend_id;
  double latency_ms = 0.0;
};

struct TagTotals {
  TokenUsage usage;
  std::int64_t calls = 0;
  double wall_ms = 0.0;

  bool operator==(const TagTotals&) const = default;
};

// Running token/call/time sums, globally and per call-site tag. The global
// totals always equal the sum over tags.
struct UsageLedger {
  std::map<std::string, TagTotals> per_tag;
  TokenUsage total;
  std::int64_t calls = 0;
  double wall_ms = 0.0;

  void add(const std::string& tag, const TokenUsage& usage, double wall_ms);
  bool operator==(const UsageLedger&) const = default;
};

void to_json(json& j, const TokenUsage& u);
void from_json(const json& j, TokenUsage& u);
void to_json(json& j, const UsageLedger& l);
void from_json(const json& j, UsageLedger& l);

// Canonical cassette key: sha256 over (backend_id, system, user, temperature).
std::string request_key(const ChatRequest& request);

// Rough token estimate (4 bytes per token, rounded up) used by offline
// backends.
std::int64_t estimate_tokens(std::string_view text);

class ChatBackend {
 public:
  virtual ~ChatBackend() = default;
  virtual ChatResponse complete(const ChatRequest& request) = 0;
};

class EmbeddingBackend {
 public:
  virtual ~EmbeddingBackend() = default;
  virtual std::vector<std::vector<double>> embed(
      std::span<const std::string> texts) = 0;
};

struct RetryPolicy {
  int max_attempts = 3;
  std::chrono::milliseconds initial_backoff{500};
  double backoff_multiplier = 2.0;
};

class CassetteRecorder;

// Routes chat and embedding calls to registered backends, retries transport
// failures, records every completed call in the usage ledger, and (in record
// mode) appends it to a cassette. Safe for concurrent callers.
class Gateway {
 public:
  explicit Gateway(RetryPolicy retry = {}, int parallelism = 4);
  ~Gateway();

  void register_backend(const std::string& id,
                        std::shared_ptr<ChatBackend> backend);
  void register_embedder(const std::string& id,
                         std::shared_ptr<EmbeddingBackend> backend);
  void attach_recorder(std::shared_ptr<CassetteRecorder> recorder);
  bool has_backend(const std::string& id) const;

  ChatResponse complete(const ChatRequest& request);

  // One L2-normalized vector per input text.
  std::vector<std::vector<double>> embed(std::span<const std::string> texts,
                                         const std::string& backend_id);

  UsageLedger ledger_snapshot() const;
  // Resets the ledger to `ledger` (used when resuming a run).
  void restore_ledger(const UsageLedger& ledger);

 private:
  std::shared_ptr<ChatBackend> backend_for(const std::string& id) const;

  RetryPolicy retry_;
  std::counting_semaphore<> slots_;
  mutable std::mutex mu_;
  std::map<std::string, std::shared_ptr<ChatBackend>> backends_;
  std::map<std::string, std::shared_ptr<EmbeddingBackend>> embedders_;
  std::shared_ptr<CassetteRecorder> recorder_;
  UsageLedger ledger_;
};

}  // namespace agentprobe
