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
#include <string_view>
#include <vector>

#include <json.hpp>

namespace agentprobe {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

// Pulls the first parseable JSON object out of free-form model output
// (tolerates code fences and surrounding prose).
std::optional<json> extract_json_object(std::string_view text);

// Returns the first string-valued member among `keys`.
std::optional<std::string> string_member(const json& obj,
                                         std::initializer_list<const char*> keys);

std::string trim(std::string_view s);

// Reads every non-blank line of a text file. Throws ParseError when the file
// cannot be opened.
std::vector<std::string> read_lines(const std::string& path);

std::string read_file(const std::string& path);

}  // namespace agentprobe
