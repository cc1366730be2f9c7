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

#include <optional>
#include <string>
#include <vector>

#include "agentprobe/gateway.hpp"
#include "agentprobe/objective.hpp"
#include "agentprobe/strategies.hpp"
#include "agentprobe/tree.hpp"

namespace agentprobe {

enum class RunMode { kLive, kMock, kRecord, kReplay };
std::string_view to_string(RunMode m);
RunMode run_mode_from_string(std::string_view s);

struct BackendConfig {
  std::string id;
  std::string kind;  // mock | scripted | http
  std::string endpoint;
  std::string path;
  std::string model;
  std::string api_key_env;
  std::string script;  // scripted: rule file
  int timeout_seconds = 120;
};

struct EmbedderConfig {
  std::string id;
  std::string kind = "hash";  // hash | http
  std::size_t dim = 256;
  std::string endpoint;
  std::string path;
  std::string model;
  std::string api_key_env;
};

// A run description loaded from one JSON document. Relative paths resolve
// against the document's directory.
struct RunConfig {
  std::string source_dir;
  ObjectiveSpec objective;
  std::string catalog_path;
  std::vector<DomainKnowledgeItem> catalog;
  std::string strategies_path;  // empty: built-in catalog
  std::vector<StrategySpec> strategies;
  std::string templates_dir;  // empty: built-in templates
  std::vector<BackendConfig> backends;
  std::vector<EmbedderConfig> embedders;
  std::string generator;
  std::string agent;
  std::string embedder = "hash";
  RunBudget budget;
  int min_active_strategies = 2;
  std::string root_prompt;
  std::string agent_type = "an online shopping assistant";
  std::string domain_knowledge_description = "product information (name and attributes)";
  RunMode mode = RunMode::kMock;
  std::string cassette;
  double temperature = 1.0;
  RetryPolicy retry;
  int parallelism = 4;
  double realism_cut = 3.0;
  std::size_t policy_cap = 20;
  std::string baseline_path;
};

const std::string& default_root_prompt();

// Parses and validates; throws ConfigError (or ValidationError/ParseError
// from the referenced files) on the first problem found. `mode` replaces the
// document's mode before validation.
RunConfig parse_run_config(const json& doc, const std::string& source_dir,
                           std::optional<RunMode> mode = {});
RunConfig load_run_config(const std::string& path, std::optional<RunMode> mode = {});

// Checks cross references and file existence.
void validate_run_config(const RunConfig& config);

// Self-contained form with absolute paths (written into the run directory).
json run_config_to_json(const RunConfig& config);

}  // namespace agentprobe
