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

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <system_error>
#include <vector>

#include "agentprobe/objective.hpp"
#include "agentprobe/run_config.hpp"

namespace testsupport {

namespace fs = std::filesystem;

inline fs::path source_dir() { return fs::path(AGENTPROBE_SOURCE_DIR); }
inline fs::path fixture(const std::string& rel) { return source_dir() / "fixtures" / rel; }

// Fresh directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    std::string tmpl = (fs::temp_directory_path() / "agentprobe-XXXXXX").string();
    std::vector<char> buf(tmpl.begin(), tmpl.end());
    buf.push_back('\0');
    if (::mkdtemp(buf.data()) == nullptr) throw std::runtime_error("mkdtemp failed");
    path_ = buf.data();
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }
  std::string str(const std::string& rel = {}) const {
    return rel.empty() ? path_.string() : (path_ / rel).string();
  }

 private:
  fs::path path_;
};

inline void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << text;
}

inline std::vector<std::string> file_lines(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::string> out;
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

// The shipped mock configuration with a smaller budget.
inline agentprobe::RunConfig mock_config(int prompt_iterations, int prompt_beam,
                                         int query_iterations, int query_beam,
                                         int queries_per_prompt) {
  auto c = agentprobe::load_run_config(fixture("mock/run_default.json").string());
  c.budget.prompt_iterations = prompt_iterations;
  c.budget.prompt_beam = prompt_beam;
  c.budget.query_iterations = query_iterations;
  c.budget.query_beam = query_beam;
  c.budget.queries_per_prompt = queries_per_prompt;
  return c;
}

// Rubric with `weights.size()` criteria c0, c1, ... and three judges.
inline agentprobe::ObjectiveSpec weighted_objective(const std::vector<double>& weights,
                                                    double threshold = 0.5) {
  agentprobe::ObjectiveSpec s;
  s.name = "test";
  for (std::size_t i = 0; i < weights.size(); ++i) {
    s.criteria.push_back({"c" + std::to_string(i), "criterion " + std::to_string(i), weights[i]});
  }
  s.violation_threshold = threshold;
  s.realism_definition = "plausible shopper text";
  s.judge_roster = {"j1", "j2", "j3"};
  s.realism_roster = {"j1", "j2", "j3"};
  return agentprobe::validate_objective(std::move(s));
}

}  // namespace testsupport
