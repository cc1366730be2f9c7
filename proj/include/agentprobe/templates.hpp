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

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace agentprobe {

using Vars = std::map<std::string, std::string, std::less<>>;

// Named prompt templates. `{name}` placeholders take per-call values and
// `[[NAME]]` markers take run-level constants (agent type, strategy type).
// Braces that do not enclose a known placeholder are left verbatim, so the
// JSON output blocks inside templates survive rendering.
class TemplateSet {
 public:
  // The set compiled in from assets/templates.
  static TemplateSet builtin();
  // Builtin set overlaid with every <name>.txt found in `dir`.
  static TemplateSet from_directory(const std::string& dir);

  void set(std::string name, std::string text) { text_[std::move(name)] = std::move(text); }
  const std::string& text(std::string_view name) const;
  bool has(std::string_view name) const { return text_.find(name) != text_.end(); }

  // Throws ConfigError naming the first template missing a required
  // placeholder or marker.
  void validate() const;

  // Substitution is single pass; values are never rescanned.
  std::string render(std::string_view name, const Vars& vars,
                     const Vars& markers = {}) const;

 private:
  std::map<std::string, std::string, std::less<>> text_;
};

// Required placeholders ("{x}") and markers ("[[X]]") per template name.
const std::map<std::string, std::vector<std::string>, std::less<>>&
required_placeholders();

std::string substitute(std::string_view text, const Vars& vars,
                       const Vars& markers);

}  // namespace agentprobe
