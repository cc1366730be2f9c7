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

#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "agentprobe/gateway.hpp"

namespace agentprobe {

// OpenAI-compatible chat-completions client (POST {base}{path}). The API key
// is read from the named environment variable at call time and never stored
// in cassettes or logs. HTTP 408/429/5xx and connection failures surface as
// TransportError so the gateway retries them.
class HttpChatBackend : public ChatBackend {
 public:
  struct Options {
    std::string base_url;  // e.g. "https://api.openai.com"
    std::string path = "/v1/chat/completions";
    std::string model;
    std::string api_key_env;
    int timeout_seconds = 120;
  };
  explicit HttpChatBackend(Options options) : options_(std::move(options)) {}
  ChatResponse complete(const ChatRequest& request) override;

 private:
  Options options_;
};

class HttpEmbeddingBackend : public EmbeddingBackend {
 public:
  struct Options {
    std::string base_url;
    std::string path = "/v1/embeddings";
    std::string model;
    std::string api_key_env;
    int timeout_seconds = 120;
  };
  explicit HttpEmbeddingBackend(Options options) : options_(std::move(options)) {}
  std::vector<std::vector<double>> embed(
      std::span<const std::string> texts) override;

 private:
  Options options_;
};

// Deterministic bag-of-words embedder: each lower-alnum-v1 token adds 1.0 to
// bucket fnv1a64(token) % dim, then the vector is L2-normalized. A text with
// no tokens puts its weight on bucket fnv1a64("") % dim.
class HashEmbedder : public EmbeddingBackend {
 public:
  explicit HashEmbedder(std::size_t dim = 256) : dim_(dim) {}
  std::vector<std::vector<double>> embed(
      std::span<const std::string> texts) override;
  std::size_t dim() const { return dim_; }

 private:
  std::size_t dim_;
};

// Fixture backend answering from ordered rules. A rule matches when the
// request tag and backend id match its globs ('*' wildcard) and the user text
// contains `user_contains`. The k-th hit on a rule returns responses[k]
// (the last response repeats). No matching rule is an Error.
struct ScriptRule {
  std::string tag = "*";
  std::string backend = "*";
  std::string user_contains;
  std::vector<std::string> responses;
  std::optional<TokenUsage> usage;
};

class ScriptedBackend : public ChatBackend {
 public:
  explicit ScriptedBackend(std::vector<ScriptRule> rules);
  ScriptedBackend(ScriptedBackend&& other) noexcept
      : rules_(std::move(other.rules_)), hits_(std::move(other.hits_)) {}
  static ScriptedBackend from_json(const json& j);
  static ScriptedBackend from_file(const std::string& path);

  ChatResponse complete(const ChatRequest& request) override;

 private:
  std::mutex mu_;
  std::vector<ScriptRule> rules_;
  std::vector<std::size_t> hits_;
};

// Wraps a callable; handy in tests.
class FunctionBackend : public ChatBackend {
 public:
  using Fn = std::function<std::string(const ChatRequest&)>;
  explicit FunctionBackend(Fn fn) : fn_(std::move(fn)) {}
  ChatResponse complete(const ChatRequest& request) override;

 private:
  Fn fn_;
};

// Offline stand-in for every model role. Output is a pure function of the
// request (backend id, system, user) and shaped by the call-site tag, so a
// mock run is reproducible bit for bit and can be resumed.
class SyntheticBackend : public ChatBackend {
 public:
  ChatResponse complete(const ChatRequest& request) override;
};

bool glob_match(std::string_view pattern, std::string_view text);

}  // namespace agentprobe
