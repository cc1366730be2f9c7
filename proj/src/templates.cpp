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

#include "agentprobe/templates.hpp"

#include <filesystem>

#include "agentprobe/error.hpp"
#include "agentprobe/json_util.hpp"

namespace agentprobe {

namespace detail {
const std::map<std::string, std::string>& builtin_template_text();
}

namespace {

bool ident_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
         (c >= '0' && c <= '9') || c == '_';
}

}  // namespace

const std::map<std::string, std::vector<std::string>, std::less<>>&
required_placeholders() {
  static const std::map<std::string, std::vector<std::string>, std::less<>> kRequired{
      {"agent_system", {"{domain_knowledge}", "[[AGENT_TYPE]]"}},
      {"expand_prompt",
       {"{objective_compliant_criteria}", "{objective_violating_criteria}",
        "{realism_policy}", "{current_prompt}", "{unrealistic_reasoning}",
        "{realistic_improvement_suggestions}", "{feedback_section}",
        "{prev_prompts}", "[[FEEDBACK_TYPE]]"}},
      {"expand_section_compliant",
       {"{objective_compliant_reasoning}",
        "{objective_compliant_improvement_suggestions}"}},
      {"expand_section_criterion", {"{target_criterion}"}},
      {"expand_section_violation",
       {"{objective_violating_reasoning}",
        "{objective_violating_improvement_suggestions}"}},
      {"judge_realism", {"{query}"}},
      {"judge_response", {"{query}", "{response}", "{criteria}"}},
      {"query_generate", {"{prompt}", "{domain_knowledge}"}},
      {"query_perturbation", {"{current_query}", "{strategy}"}},
      {"query_roleplay",
       {"{current_query}", "{strategy_description}", "[[STRATEGY_TYPE]]"}},
      {"reask_suffix", {}},
      {"reflect_compliant",
       {"{current_prompts}", "{objective_compliant_responses}",
        "{objective_violating_criteria}", "{objective_compliant_criteria}"}},
      {"reflect_realism",
       {"{current_prompts}", "{unrealistic_queries}", "{realism_definition}"}},
      {"reflect_violation",
       {"{current_prompts}", "{objective_violating_responses}",
        "{objective_violating_criteria}"}},
  };
  return kRequired;
}

TemplateSet TemplateSet::builtin() {
  TemplateSet set;
  for (const auto& [name, text] : detail::builtin_template_text()) set.set(name, text);
  return set;
}

TemplateSet TemplateSet::from_directory(const std::string& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw ConfigError("template dir not found: " + dir);
  TemplateSet set = builtin();
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.path().extension() != ".txt") continue;
    set.set(entry.path().stem().string(), read_file(entry.path().string()));
  }
  return set;
}

const std::string& TemplateSet::text(std::string_view name) const {
  auto it = text_.find(name);
  if (it == text_.end()) throw ConfigError("unknown template " + std::string(name));
  return it->second;
}

void TemplateSet::validate() const {
  for (const auto& [name, needed] : required_placeholders()) {
    auto it = text_.find(name);
    if (it == text_.end()) throw ConfigError("template " + name + " missing");
    for (const auto& p : needed) {
      if (it->second.find(p) == std::string::npos) {
        throw ConfigError("template " + name + " lacks placeholder " + p);
      }
    }
  }
}

std::string substitute(std::string_view text, const Vars& vars,
                       const Vars& markers) {
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    if (text[i] == '{') {
      std::size_t j = i + 1;
      while (j < text.size() && ident_char(text[j])) ++j;
      if (j > i + 1 && j < text.size() && text[j] == '}') {
        auto it = vars.find(text.substr(i + 1, j - i - 1));
        if (it != vars.end()) {
          out += it->second;
          i = j + 1;
          continue;
        }
      }
    } else if (text.compare(i, 2, "[[") == 0) {
      auto close = text.find("]]", i + 2);
      if (close != std::string_view::npos) {
        auto it = markers.find(text.substr(i + 2, close - i - 2));
        if (it != markers.end()) {
          out += it->second;
          i = close + 2;
          continue;
        }
      }
    }
    out.push_back(text[i++]);
  }
  return out;
}

std::string TemplateSet::render(std::string_view name, const Vars& vars,
                                const Vars& markers) const {
  return substitute(text(name), vars, markers);
}

}  // namespace agentprobe
