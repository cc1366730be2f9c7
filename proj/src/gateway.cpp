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

#include "agentprobe/gateway.hpp"

#include <cmath>
#include <thread>

#include "agentprobe/cassette.hpp"
#include "agentprobe/error.hpp"
#include "agentprobe/hash.hpp"

namespace agentprobe {

void UsageLedger::add(const std::string& tag, const TokenUsage& usage,
                      double elapsed_ms) {
  auto& t = per_tag[tag];
  t.usage += usage;
  t.calls += 1;
  t.wall_ms += elapsed_ms;
  total += usage;
  calls += 1;
  wall_ms += elapsed_ms;
}

void to_json(json& j, const TokenUsage& u) {
  j = json{{"prompt_tokens", u.prompt_tokens},
           {"completion_tokens", u.completion_tokens}};
}

void from_json(const json& j, TokenUsage& u) {
  u.prompt_tokens = j.value("prompt_tokens", std::int64_t{0});
  u.completion_tokens = j.value("completion_tokens", std::int64_t{0});
}

void to_json(json& j, const UsageLedger& l) {
  json tags = json::object();
  for (const auto& [tag, t] : l.per_tag) {
    tags[tag] = json{{"usage", t.usage}, {"calls", t.calls}, {"wall_ms", t.wall_ms}};
  }
  j = json{{"total", l.total},
           {"calls", l.calls},
           {"wall_ms", l.wall_ms},
           {"per_tag", tags}};
}

void from_json(const json& j, UsageLedger& l) {
  l = UsageLedger{};
  l.total = j.at("total").get<TokenUsage>();
  l.calls = j.value("calls", std::int64_t{0});
  l.wall_ms = j.value("wall_ms", 0.0);
  if (j.contains("per_tag")) {
    for (auto it = j["per_tag"].begin(); it != j["per_tag"].end(); ++it) {
      TagTotals t;
      t.usage = it->at("usage").get<TokenUsage>();
      t.calls = it->value("calls", std::int64_t{0});
      t.wall_ms = it->value("wall_ms", 0.0);
      l.per_tag[it.key()] = t;
    }
  }
}

std::string request_key(const ChatRequest& r) {
  json material = json::array();
  material.push_back(r.backend_id);
  if (r.system) {
    material.push_back(*r.system);
  } else {
    material.push_back(nullptr);
  }
  material.push_back(r.user);
  material.push_back(r.temperature);
  return sha256_hex(material.dump());
}

std::int64_t estimate_tokens(std::string_view text) {
  return static_cast<std::int64_t>((text.size() + 3) / 4);
}

Gateway::Gateway(RetryPolicy retry, int parallelism)
    : retry_(retry), slots_(parallelism < 1 ? 1 : parallelism) {}

Gateway::~Gateway() = default;

void Gateway::register_backend(const std::string& id,
                               std::shared_ptr<ChatBackend> backend) {
  std::lock_guard lock(mu_);
  backends_[id] = std::move(backend);
}

void Gateway::register_embedder(const std::string& id,
                                std::shared_ptr<EmbeddingBackend> backend) {
  std::lock_guard lock(mu_);
  embedders_[id] = std::move(backend);
}

void Gateway::attach_recorder(std::shared_ptr<CassetteRecorder> recorder) {
  std::lock_guard lock(mu_);
  recorder_ = std::move(recorder);
}

bool Gateway::has_backend(const std::string& id) const {
  std::lock_guard lock(mu_);
  return backends_.count(id) > 0;
}

std::shared_ptr<ChatBackend> Gateway::backend_for(const std::string& id) const {
  std::lock_guard lock(mu_);
  auto it = backends_.find(id);
  if (it == backends_.end()) {
    throw UnknownBackendError("unknown backend '" + id + "'");
  }
  return it->second;
}

ChatResponse Gateway::complete(const ChatRequest& request) {
  if (request.user.empty()) throw ValidationError("chat request user text empty");
  if (!(request.temperature >= 0.0)) {
    throw ValidationError("chat request temperature must be >= 0");
  }
  auto backend = backend_for(request.backend_id);
  std::shared_ptr<CassetteRecorder> recorder;
  {
    std::lock_guard lock(mu_);
    recorder = recorder_;
  }

  struct SlotGuard {
    std::counting_semaphore<>& s;
    explicit SlotGuard(std::counting_semaphore<>& sem) : s(sem) { s.acquire(); }
    ~SlotGuard() { s.release(); }
  } slot(slots_);

  std::optional<std::uint64_t> ticket;
  if (recorder) ticket = recorder->take_ticket();

  ChatResponse response;
  auto backoff = retry_.initial_backoff;
  const int attempts = retry_.max_attempts < 1 ? 1 : retry_.max_attempts;
  for (int attempt = 1;; ++attempt) {
    try {
      response = backend->complete(request);
      break;
    } catch (const TransportError&) {
      if (attempt >= attempts) {
        if (ticket) recorder->abandon(*ticket);
        throw;
      }
    } catch (...) {
      if (ticket) recorder->abandon(*ticket);
      throw;
    }
    if (backoff.count() > 0) std::this_thread::sleep_for(backoff);
    backoff = std::chrono::milliseconds(static_cast<std::int64_t>(
        static_cast<double>(backoff.count()) * retry_.backoff_multiplier));
  }
  response.backend_id = request.backend_id;
  // Whole milliseconds keep ledger sums independent of completion order.
  response.latency_ms = std::round(response.latency_ms);

  {
    std::lock_guard lock(mu_);
    ledger_.add(request.tag, response.usage, response.latency_ms);
  }
  if (ticket) recorder->complete(*ticket, request, response);
  return response;
}

std::vector<std::vector<double>> Gateway::embed(
    std::span<const std::string> texts, const std::string& backend_id) {
  if (texts.empty()) throw ValidationError("embed: texts empty");
  std::shared_ptr<EmbeddingBackend> backend;
  {
    std::lock_guard lock(mu_);
    auto it = embedders_.find(backend_id);
    if (it == embedders_.end()) {
      throw UnknownBackendError("unknown embedding backend '" + backend_id + "'");
    }
    backend = it->second;
  }
  auto vectors = backend->embed(texts);
  if (vectors.size() != texts.size()) {
    throw TransportError("embedding backend returned wrong vector count");
  }
  const std::size_t dim = vectors.empty() ? 0 : vectors.front().size();
  for (auto& v : vectors) {
    if (v.size() != dim) throw ValidationError("embedding dimension mismatch");
    double norm = 0.0;
    for (double x : v) norm += x * x;
    norm = std::sqrt(norm);
    if (norm == 0.0) throw ValidationError("embedding has zero norm");
    for (double& x : v) x /= norm;
  }
  return vectors;
}

UsageLedger Gateway::ledger_snapshot() const {
  std::lock_guard lock(mu_);
  return ledger_;
}

void Gateway::restore_ledger(const UsageLedger& ledger) {
  std::lock_guard lock(mu_);
  ledger_ = ledger;
}

}  // namespace agentprobe
