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
#include <string>
#include <vector>

#include "agentprobe/gateway.hpp"
#include "agentprobe/text.hpp"
#include "agentprobe/tree.hpp"

namespace agentprobe {

// Fraction of records flagged as violations. Throws PreconditionError when
// `records` is empty.
double failure_rate(const std::vector<InteractionRecord>& records);
double failure_rate(std::size_t violations, std::size_t total);

// Unique n-grams over total n-gram occurrences, pooled over queries; n-grams
// never cross query boundaries. Throws PreconditionError when n is outside
// 1..3 or the corpus has no n-grams.
double distinct_n(const std::vector<std::string>& queries, int n);

// Bidirectional MTLD over a token stream. A direction with zero factors
// returns the token count. Throws PreconditionError on an empty stream.
double mtld_tokens(const std::vector<std::string>& tokens, double ttr_threshold = 0.72);
// MTLD over the concatenated tokens of all queries.
double mtld(const std::vector<std::string>& queries, double ttr_threshold = 0.72);

// 1 - mean cosine similarity over all unordered pairs of unit vectors, with
// compensated summation. Throws PreconditionError with fewer than 2 vectors.
double mean_pairwise_cosine_distance(const std::vector<std::vector<double>>& unit_vectors);

// Embeds `queries` through the gateway. Above `cap` queries a seeded sample
// of `cap` queries is used.
double mean_pairwise_cosine_distance(const std::vector<std::string>& queries,
                                     Gateway& gateway, const std::string& embedder,
                                     std::size_t cap = 2000, std::uint64_t seed = 0);

// Total prompt plus completion tokens per final query. Throws
// PreconditionError when n_queries is 0.
double cost_per_query(const UsageLedger& ledger, std::size_t n_queries);

// (value - baseline) / baseline * 100. Throws PreconditionError on a zero
// baseline.
double delta_percent(double value, double baseline);
// Mean of the three per-n deltas.
double distinct_delta_percent(const std::array<double, 3>& value,
                              const std::array<double, 3>& baseline);
// method / reference. Throws PreconditionError on a zero reference.
double cost_ratio(double method_tokens, double reference_tokens);

// Half-away-from-zero rounding to `decimals` places.
double round_to(double value, int decimals);
// "+3.94" / "-43.39" / "0.00".
std::string format_delta(double delta_percent);
// "x1.3".
std::string format_cost_ratio(double ratio);
std::string format_fixed(double value, int decimals);

}  // namespace agentprobe
