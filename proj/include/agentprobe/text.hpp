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

#include <string>
#include <string_view>
#include <vector>

namespace agentprobe {

// Identifier of the tokenization rule; travels with every lexical metric.
inline constexpr std::string_view kTokenizerRuleId = "lower-alnum-v1";

// lower-alnum-v1: ASCII letters are lowercased; tokens are maximal runs of
// ASCII alphanumerics and non-ASCII bytes (so UTF-8 letters stay inside
// words); every other byte separates tokens; empty tokens are dropped.
std::vector<std::string> tokenize(std::string_view text);

}  // namespace agentprobe
