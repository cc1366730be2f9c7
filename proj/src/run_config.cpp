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

#include "agentprobe/run_config.hpp"

#include <algorithm>
#include <filesystem>
#include <set>

#include "agentprobe/error.hpp"

namespace agentprobe {

namespace fs = std::filesystem;

std::string_view to_string(RunMode m) {
  switch (m) {
    case RunMode::kLive: return "live";
    case RunMode::kMock: return "mock";
    case RunMode::kRecord: return "record";
    case RunMode::kReplay: return "replay";
  }
  return "mock";
}

RunMode run_mode_from_string(std::string_view s) {
  if (s == "live") return RunMode::kLive;
  if (s == "mock") return RunMode::kMock;
  if (s == "record") return RunMode::kRecord;
  if (s == "replay") return RunMode::kReplay;
  throw ConfigError("unknown mode '" + std::string(s) + "'");
}

const std::string& default_root_prompt() {
  static const std::string kRoot =
      "Create a user question related to online shopping that a customer might ask about a "
      "product.";
  return kRoot;
}

namespace {

std::string resolve(const std::string& dir, const std::string& p) {
  if (p.empty()) return p;
  fs::path path(p);
  if (path.is_relative()) path = fs::path(dir) / path;
  return path.lexically_normal().string();
}

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key) || j[key].is_null()) return fallback;
  try {
    return j[key].get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(std::string("config key '") + key + "' has the wrong type");
  }
}

ObjectiveSpec objective_from_config(const json& j) {
  if (!j.is_object()) throw ConfigError("objective must be an object");
  ObjectiveSpec spec;
  const auto preset = get_or<std::string>(j, "preset", "");
  if (preset == "helpfulness") {
    spec = helpfulness_objective(get_or<std::vector<std::string>>(j, "judge_roster", {}),
                                 get_or<std::vector<std::string>>(j, "realism_roster", {}));
    if (j.contains("violation_threshold")) {
      spec.violation_threshold = j["violation_threshold"].get<double>();
    }
    if (j.contains("realism_definition")) {
      spec.realism_definition = j["realism_definition"].get<std::string>();
    }
  } else if (preset.empty()) {
    try {
      spec = j.get<ObjectiveSpec>();
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("objective malformed: ") + e.what());
    }
  } else {
    throw ConfigError("unknown objective preset '" + preset + "'");
  }
  return validate_objective(std::move(spec));
}

}  // namespace

RunConfig parse_run_config(const json& doc, const std::string& source_dir,
                           std::optional<RunMode> mode) {
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  RunConfig c;
  c.source_dir = source_dir;
  if (!doc.contains("objective")) throw ConfigError("config lacks 'objective'");
  c.objective = objective_from_config(doc["objective"]);

  c.catalog_path = resolve(source_dir, get_or<std::string>(doc, "catalog", ""));
  if (c.catalog_path.empty()) throw ConfigError("config lacks 'catalog'");
  c.strategies_path = resolve(source_dir, get_or<std::string>(doc, "strategies", ""));
  c.templates_dir = resolve(source_dir, get_or<std::string>(doc, "templates", ""));
  c.cassette = resolve(source_dir, get_or<std::string>(doc, "cassette", ""));
  c.baseline_path = resolve(source_dir, get_or<std::string>(doc, "baseline", ""));

  for (const auto& b : get_or<json>(doc, "backends", json::array())) {
    BackendConfig bc;
    bc.id = get_or<std::string>(b, "id", "");
    bc.kind = get_or<std::string>(b, "kind", "mock");
    bc.endpoint = get_or<std::string>(b, "endpoint", "");
    bc.path = get_or<std::string>(b, "path", "");
    bc.model = get_or<std::string>(b, "model", "");
    bc.api_key_env = get_or<std::string>(b, "api_key_env", "");
    bc.script = resolve(source_dir, get_or<std::string>(b, "script", ""));
    bc.timeout_seconds = get_or<int>(b, "timeout_seconds", 120);
    c.backends.push_back(std::move(bc));
  }
  for (const auto& e : get_or<json>(doc, "embedders", json::array())) {
    EmbedderConfig ec;
    ec.id = get_or<std::string>(e, "id", "");
    ec.kind = get_or<std::string>(e, "kind", "hash");
    ec.dim = get_or<std::size_t>(e, "dim", 256);
    ec.endpoint = get_or<std::string>(e, "endpoint", "");
    ec.path = get_or<std::string>(e, "path", "");
    ec.model = get_or<std::string>(e, "model", "");
    ec.api_key_env = get_or<std::string>(e, "api_key_env", "");
    c.embedders.push_back(std::move(ec));
  }

  const json roles = get_or<json>(doc, "roles", json::object());
  c.generator = get_or<std::string>(roles, "generator", "");
  c.agent = get_or<std::string>(roles, "agent", "");
  c.embedder = get_or<std::string>(roles, "embedder", "hash");

  try {
    c.budget = get_or<json>(doc, "budget", json::object()).get<RunBudget>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("budget malformed: ") + e.what());
  }
  c.min_active_strategies =
      get_or<int>(get_or<json>(doc, "query_refinement", json::object()), "min_active_strategies", 2);
  c.root_prompt = get_or<std::string>(doc, "root_prompt", default_root_prompt());
  c.agent_type = get_or<std::string>(doc, "agent_type", c.agent_type);
  c.domain_knowledge_description =
      get_or<std::string>(doc, "domain_knowledge_description", c.domain_knowledge_description);
  c.mode = run_mode_from_string(get_or<std::string>(doc, "mode", "mock"));
  c.temperature = get_or<double>(doc, "temperature", 1.0);
  const json retry = get_or<json>(doc, "retry", json::object());
  c.retry.max_attempts = get_or<int>(retry, "max_attempts", 3);
  c.retry.initial_backoff = std::chrono::milliseconds(get_or<int>(retry, "initial_backoff_ms", 500));
  c.retry.backoff_multiplier = get_or<double>(retry, "backoff_multiplier", 2.0);
  c.parallelism = get_or<int>(doc, "parallelism", 4);
  c.realism_cut = get_or<double>(doc, "realism_cut", 3.0);
  c.policy_cap = get_or<std::size_t>(doc, "policy_cap", 20);

  // Catalog files and strategies are loaded here so that validation sees
  // their parse and invariant errors.
  if (!fs::exists(c.catalog_path)) throw ConfigError("catalog not found: " + c.catalog_path);
  c.catalog = load_domain_knowledge_file(c.catalog_path);
  if (!c.strategies_path.empty()) {
    if (!fs::exists(c.strategies_path)) {
      throw ConfigError("strategy catalog not found: " + c.strategies_path);
    }
    c.strategies = load_strategy_catalog_file(c.strategies_path);
  } else {
    c.strategies = default_strategies();
  }
  if (doc.contains("strategy_ids")) {
    const auto ids = get_or<std::vector<std::string>>(doc, "strategy_ids", {});
    std::vector<StrategySpec> picked;
    for (const auto& id : ids) {
      auto it = std::find_if(c.strategies.begin(), c.strategies.end(),
                             [&](const StrategySpec& s) { return s.strategy_id == id; });
      if (it == c.strategies.end()) throw ConfigError("unknown strategy id '" + id + "'");
      picked.push_back(*it);
    }
    c.strategies = std::move(picked);
  }
  if (mode) c.mode = *mode;
  validate_run_config(c);
  return c;
}

RunConfig load_run_config(const std::string& path, std::optional<RunMode> mode) {
  if (!fs::exists(path)) throw ConfigError("config not found: " + path);
  auto doc = json::parse(read_file(path), nullptr, false);
  if (doc.is_discarded()) throw ConfigError("config is not valid JSON: " + path);
  const auto dir = fs::absolute(path).parent_path().string();
  return parse_run_config(doc, dir, mode);
}

void validate_run_config(const RunConfig& c) {
  validate_objective(c.objective);
  validate_budget(c.budget);
  validate_catalog(c.strategies);
  if (c.catalog.empty()) throw ConfigError("catalog is empty");
  if (c.min_active_strategies < 1) throw ConfigError("min_active_strategies must be >= 1");
  if (c.parallelism < 1) throw ConfigError("parallelism must be >= 1");
  if (c.temperature < 0.0) throw ConfigError("temperature must be >= 0");
  if (c.retry.max_attempts < 1) throw ConfigError("retry.max_attempts must be >= 1");
  if (trim(c.root_prompt).empty()) throw ConfigError("root_prompt empty");

  std::set<std::string> ids;
  for (const auto& b : c.backends) {
    if (b.id.empty()) throw ConfigError("backend without id");
    if (!ids.insert(b.id).second) throw ConfigError("duplicate backend id " + b.id);
    if (b.kind == "http") {
      if (b.endpoint.empty()) throw ConfigError("http backend " + b.id + " lacks endpoint");
      if (b.model.empty()) throw ConfigError("http backend " + b.id + " lacks model");
    } else if (b.kind == "scripted") {
      if (b.script.empty() || !fs::exists(b.script)) {
        throw ConfigError("scripted backend " + b.id + " script not found: " + b.script);
      }
    } else if (b.kind != "mock") {
      throw ConfigError("backend " + b.id + " has unknown kind '" + b.kind + "'");
    }
  }
  auto need = [&](const std::string& id, const std::string& role) {
    if (id.empty()) throw ConfigError("role " + role + " is not assigned");
    if (!ids.contains(id)) throw ConfigError(role + " backend '" + id + "' is not configured");
  };
  need(c.generator, "generator");
  need(c.agent, "agent");
  for (const auto& j : c.objective.judge_roster) need(j, "judge");
  for (const auto& j : c.objective.realism_roster) need(j, "realism judge");

  std::set<std::string> emb{"hash"};
  for (const auto& e : c.embedders) {
    if (e.kind != "hash" && e.kind != "http") {
      throw ConfigError("embedder " + e.id + " has unknown kind '" + e.kind + "'");
    }
    if (e.dim == 0) throw ConfigError("embedder " + e.id + " dim must be > 0");
    emb.insert(e.id);
  }
  if (!emb.contains(c.embedder)) throw ConfigError("embedder '" + c.embedder + "' not configured");

  if (c.mode == RunMode::kReplay) {
    if (c.cassette.empty()) throw ConfigError("replay mode requires a cassette");
    if (!fs::exists(c.cassette)) throw ConfigError("cassette not found: " + c.cassette);
  }
  if (!c.templates_dir.empty() && !fs::is_directory(c.templates_dir)) {
    throw ConfigError("template dir not found: " + c.templates_dir);
  }
  if (!c.baseline_path.empty() && !fs::exists(c.baseline_path)) {
    throw ConfigError("baseline corpus not found: " + c.baseline_path);
  }
}

json run_config_to_json(const RunConfig& c) {
  json backends = json::array();
  for (const auto& b : c.backends) {
    json j{{"id", b.id}, {"kind", b.kind}};
    if (!b.endpoint.empty()) j["endpoint"] = b.endpoint;
    if (!b.path.empty()) j["path"] = b.path;
    if (!b.model.empty()) j["model"] = b.model;
    if (!b.api_key_env.empty()) j["api_key_env"] = b.api_key_env;
    if (!b.script.empty()) j["script"] = fs::absolute(b.script).string();
    j["timeout_seconds"] = b.timeout_seconds;
    backends.push_back(std::move(j));
  }
  json embedders = json::array();
  for (const auto& e : c.embedders) {
    json j{{"id", e.id}, {"kind", e.kind}, {"dim", e.dim}};
    if (!e.endpoint.empty()) j["endpoint"] = e.endpoint;
    if (!e.path.empty()) j["path"] = e.path;
    if (!e.model.empty()) j["model"] = e.model;
    if (!e.api_key_env.empty()) j["api_key_env"] = e.api_key_env;
    embedders.push_back(std::move(j));
  }
  auto abs = [](const std::string& p) { return p.empty() ? p : fs::absolute(p).string(); };
  json doc{{"objective", c.objective},
           {"catalog", abs(c.catalog_path)},
           {"backends", backends},
           {"embedders", embedders},
           {"roles", {{"generator", c.generator}, {"agent", c.agent}, {"embedder", c.embedder}}},
           {"budget", c.budget},
           {"query_refinement", {{"min_active_strategies", c.min_active_strategies}}},
           {"root_prompt", c.root_prompt},
           {"agent_type", c.agent_type},
           {"domain_knowledge_description", c.domain_knowledge_description},
           {"mode", to_string(c.mode)},
           {"temperature", c.temperature},
           {"retry",
            {{"max_attempts", c.retry.max_attempts},
             {"initial_backoff_ms", c.retry.initial_backoff.count()},
             {"backoff_multiplier", c.retry.backoff_multiplier}}},
           {"parallelism", c.parallelism},
           {"realism_cut", c.realism_cut},
           {"policy_cap", c.policy_cap}};
  if (!c.strategies_path.empty()) doc["strategies"] = abs(c.strategies_path);
  json ids = json::array();
  for (const auto& s : c.strategies) ids.push_back(s.strategy_id);
  doc["strategy_ids"] = ids;
  if (!c.templates_dir.empty()) doc["templates"] = abs(c.templates_dir);
  if (!c.cassette.empty()) doc["cassette"] = abs(c.cassette);
  if (!c.baseline_path.empty()) doc["baseline"] = abs(c.baseline_path);
  return doc;
}

}  // namespace agentprobe
