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

// agentprobe: run, report, trace and validate red-teaming searches.

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>

#include "agentprobe/error.hpp"
#include "agentprobe/orchestrator.hpp"
#include "agentprobe/run_config.hpp"

namespace ap = agentprobe;

namespace {

bool is_config_error(const std::exception& e) {
  return dynamic_cast<const ap::ConfigError*>(&e) != nullptr ||
         dynamic_cast<const ap::ValidationError*>(&e) != nullptr ||
         dynamic_cast<const ap::ParseError*>(&e) != nullptr;
}

int cmd_run(const std::string& config_path, const std::string& out_dir,
            const std::optional<std::string>& mode) {
  ap::RunConfig config;
  try {
    std::optional<ap::RunMode> override;
    if (mode) override = ap::run_mode_from_string(*mode);
    config = ap::load_run_config(config_path, override);
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return ap::kExitConfig;
  }
  try {
    const auto outcome = ap::run(std::move(config), out_dir);
    std::cout << (outcome.resumed ? "resumed run, " : "run, ")
              << outcome.generations_completed << " generation(s) completed, last ordinal "
              << outcome.last_ordinal << ", " << outcome.ledger.total.total() << " tokens\n";
    if (outcome.status == ap::RunStatus::kBudgetHalted) {
      std::cerr << "budget exceeded: run halted after generation "
                << outcome.generations_completed - 1 << "\n";
      return ap::kExitBudget;
    }
    return ap::kExitOk;
  } catch (const ap::RunAborted& e) {
    std::cerr << "run aborted: " << e.what() << "; last durable ordinal "
              << (e.last_ordinal ? std::to_string(*e.last_ordinal) : std::string("none"))
              << "\n";
    return ap::kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << (is_config_error(e) ? "config error: " : "error: ") << e.what() << "\n";
    return is_config_error(e) ? ap::kExitConfig : ap::kExitRuntime;
  }
}

int cmd_report(const std::string& run_dir, const std::string& baseline,
               const std::string& format) {
  try {
    const auto report = ap::compute_report(run_dir, baseline);
    if (format == "csv") {
      std::cout << ap::render_csv(report);
    } else if (format == "struct") {
      std::cout << ap::render_struct(report);
    } else {
      std::cout << ap::render_table(report);
    }
    return ap::kExitOk;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return is_config_error(e) ? ap::kExitConfig : ap::kExitRuntime;
  }
}

int cmd_trace(const std::string& run_dir, const std::string& node_id) {
  try {
    std::cout << ap::trace(run_dir, node_id);
    return ap::kExitOk;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return ap::kExitRuntime;
  }
}

int cmd_validate(const std::string& config_path) {
  try {
    const auto config = ap::load_run_config(config_path);
    ap::validate_run_config(config);
    std::cout << "config ok: " << config.objective.name << ", " << config.catalog.size()
              << " catalog items, " << config.strategies.size() << " strategies\n";
    return ap::kExitOk;
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return ap::kExitConfig;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Automated red teaming of LLM agents"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::optional<std::string> mode;
  auto* run = app.add_subcommand("run", "Run or resume a search");
  run->add_option("--config", config_path, "Run configuration (JSON)")->required();
  run->add_option("--out", out_dir, "Run directory")->required();
  run->add_option("--mode", mode, "Backend mode")
      ->check(CLI::IsMember({"live", "mock", "record", "replay"}));

  std::string run_dir;
  std::string baseline;
  std::string format = "table";
  auto* report = app.add_subcommand("report", "Recompute metrics from a run log");
  report->add_option("run-dir", run_dir)->required();
  report->add_option("--baseline", baseline, "Human query corpus, one per line");
  report->add_option("--format", format)->check(CLI::IsMember({"table", "csv", "struct"}));

  std::string node_id;
  auto* trace = app.add_subcommand("trace", "Print the lineage of a node");
  trace->add_option("run-dir", run_dir)->required();
  trace->add_option("node-id", node_id)->required();

  auto* validate = app.add_subcommand("validate", "Check a run configuration");
  validate->add_option("--config", config_path)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : ap::kExitConfig;
  }

  if (*run) return cmd_run(config_path, out_dir, mode);
  if (*report) return cmd_report(run_dir, baseline, format);
  if (*trace) return cmd_trace(run_dir, node_id);
  return cmd_validate(config_path);
}
