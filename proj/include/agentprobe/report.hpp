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

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "agentprobe/gateway.hpp"

namespace agentprobe {

// Diversity of the human reference corpus.
struct BaselineMetrics {
  std::size_t n_queries = 0;
  std::optional<double> one_minus_cossim;
  std::array<std::optional<double>, 3> distinct;
  std::optional<double> mtld;
};

struct MetricsReport {
  std::string tokenizer;
  std::string objective;
  double violation_threshold = 0.5;
  std::size_t n_queries = 0;
  std::size_t n_violations = 0;
  std::optional<double> failure_rate;
  std::optional<double> one_minus_cossim;
  std::array<std::optional<double>, 3> distinct;
  std::optional<double> mtld;
  std::optional<double> realism_mean;
  std::optional<double> cost_tokens_per_query;
  TokenUsage usage;
  int queries_per_prompt = 0;
  bool partial = false;
  std::uint64_t last_ordinal = 0;
  std::optional<BaselineMetrics> baseline;
  // Filled when a baseline is present and both sides are defined.
  std::optional<double> delta_one_minus_cossim;
  std::optional<double> delta_distinct;  // mean of the three per-n deltas
  std::optional<double> delta_mtld;
};

// Diversity metrics of a query list; undefined entries stay empty (e.g.
// Distinct@3 when no query has three tokens).
BaselineMetrics diversity_of(const std::vector<std::string>& queries, Gateway* gateway,
                             const std::string& embedder);

// Sets the delta fields from report and baseline values.
void compute_deltas(MetricsReport& report);

std::string render_table(const MetricsReport& report);
std::string render_csv(const MetricsReport& report);
std::string render_struct(const MetricsReport& report);

}  // namespace agentprobe
