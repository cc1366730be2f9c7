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

#include "agentprobe/cassette.hpp"

#include <algorithm>

#include "agentprobe/error.hpp"
#include "agentprobe/json_util.hpp"

namespace agentprobe {

json to_json(const CassetteEntry& e) {
  json req = json{{"backend_id", e.request.backend_id},
                  {"user", e.request.user},
                  {"temperature", e.request.temperature},
                  {"tag", e.request.tag}};
  req["system"] = e.request.system ? json(*e.request.system) : json(nullptr);
  req["max_output_tokens"] = e.request.max_output_tokens
                                 ? json(*e.request.max_output_tokens)
                                 : json(nullptr);
  return json{{"ordinal", e.ordinal},   {"key", e.key},
              {"request", req},         {"response", e.response},
              {"usage", e.usage},       {"latency_ms", e.latency_ms}};
}

CassetteEntry cassette_entry_from_json(const json& j) {
  CassetteEntry e;
  e.ordinal = j.at("ordinal").get<std::uint64_t>();
  e.key = j.at("key").get<std::string>();
  const auto& r = j.at("request");
  e.request.backend_id = r.at("backend_id").get<std::string>();
  if (r.contains("system") && !r["system"].is_null()) {
    e.request.system = r["system"].get<std::string>();
  }
  e.request.user = r.at("user").get<std::string>();
  e.request.temperature = r.value("temperature", 1.0);
  if (r.contains("max_output_tokens") && !r["max_output_tokens"].is_null()) {
    e.request.max_output_tokens = r["max_output_tokens"].get<int>();
  }
  e.request.tag = r.value("tag", std::string{});
  e.response = j.at("response").get<std::string>();
  e.usage = j.at("usage").get<TokenUsage>();
  e.latency_ms = j.value("latency_ms", 0.0);
  return e;
}

CassetteRecorder::CassetteRecorder(const std::string& path) {
  {
    std::ifstream existing(path);
    std::string line;
    while (existing && std::getline(existing, line)) {
      if (!trim(line).empty()) ++next_ordinal_;
    }
  }
  out_.open(path, std::ios::app);
  if (!out_) throw Error("cannot open cassette for writing: " + path);
}

std::uint64_t CassetteRecorder::take_ticket() {
  std::lock_guard lock(mu_);
  return next_ticket_++;
}

void CassetteRecorder::complete(std::uint64_t ticket,
                                const ChatRequest& request,
                                const ChatResponse& response) {
  std::lock_guard lock(mu_);
  CassetteEntry e;
  e.key = request_key(request);
  e.request = request;
  e.response = response.text;
  e.usage = response.usage;
  e.latency_ms = response.latency_ms;
  pending_[ticket] = std::move(e);
  flush_ready();
}

void CassetteRecorder::abandon(std::uint64_t ticket) {
  std::lock_guard lock(mu_);
  pending_[ticket] = std::nullopt;
  flush_ready();
}

void CassetteRecorder::flush_ready() {
  for (auto it = pending_.find(next_to_write_); it != pending_.end();
       it = pending_.find(next_to_write_)) {
    if (it->second) {
      it->second->ordinal = next_ordinal_++;
      out_ << to_json(*it->second).dump() << '\n';
    }
    pending_.erase(it);
    ++next_to_write_;
  }
  out_.flush();
}

Cassette Cassette::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open cassette " + path);
  std::vector<CassetteEntry> entries;
  std::string line;
  long index = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    auto j = json::parse(line, nullptr, false);
    if (j.is_discarded()) throw ParseError("cassette line is not JSON", index);
    try {
      entries.push_back(cassette_entry_from_json(j));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("cassette entry malformed: ") + e.what(),
                       index);
    }
    ++index;
  }
  return Cassette(std::move(entries));
}

Cassette::Cassette(std::vector<CassetteEntry> entries) {
  std::stable_sort(entries.begin(), entries.end(),
                   [](const auto& a, const auto& b) { return a.ordinal < b.ordinal; });
  size_ = entries.size();
  for (auto& e : entries) by_key_[e.key].push_back(std::move(e));
}

CassetteEntry Cassette::next(const ChatRequest& request) {
  const auto key = request_key(request);
  std::lock_guard lock(mu_);
  auto it = by_key_.find(key);
  if (it == by_key_.end() || it->second.empty()) {
    throw CassetteMissError("cassette miss for " + request.tag + " request to '" +
                            request.backend_id + "' (key " + key.substr(0, 16) +
                            ")");
  }
  CassetteEntry e = std::move(it->second.front());
  it->second.pop_front();
  return e;
}

std::size_t Cassette::remaining() const {
  std::lock_guard lock(mu_);
  std::size_t n = 0;
  for (const auto& [k, q] : by_key_) n += q.size();
  return n;
}

ChatResponse ReplayBackend::complete(const ChatRequest& request) {
  CassetteEntry e = cassette_->next(request);
  ChatResponse r;
  r.text = std::move(e.response);
  r.usage = e.usage;
  r.backend_id = request.backend_id;
  r.latency_ms = e.latency_ms;
  return r;
}

}  // namespace agentprobe
