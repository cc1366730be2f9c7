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

#include "agentprobe/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>
#include <set>
#include <unordered_set>

#include "agentprobe/error.hpp"

namespace agentprobe {

double failure_rate(std::size_t violations, std::size_t total) {
  if (total == 0) throw PreconditionError("failure rate of zero records");
  return static_cast<double>(violations) / static_cast<double>(total);
}

double failure_rate(const std::vector<InteractionRecord>& records) {
  const auto v = std::count_if(records.begin(), records.end(),
                               [](const InteractionRecord& r) { return r.is_violation; });
  return failure_rate(static_cast<std::size_t>(v), records.size());
}

double distinct_n(const std::vector<std::string>& queries, int n) {
  if (n < 1 || n > 3) throw PreconditionError("distinct-n supports n in 1..3");
  std::set<std::vector<std::string>> unique;
  std::size_t total = 0;
  for (const auto& q : queries) {
    const auto tokens = tokenize(q);
    if (tokens.size() < static_cast<std::size_t>(n)) continue;
    for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
      unique.emplace(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                     tokens.begin() + static_cast<std::ptrdiff_t>(i + n));
      ++total;
    }
  }
  if (total == 0) throw PreconditionError("corpus has no " + std::to_string(n) + "-grams");
  return static_cast<double>(unique.size()) / static_cast<double>(total);
}

namespace {

template <class It>
double mtld_pass(It begin, It end, double threshold) {
  std::unordered_set<std::string> types;
  std::size_t count = 0;
  std::size_t length = 0;
  double ttr = 1.0;
  double factors = 0.0;
  for (It it = begin; it != end; ++it) {
    ++length;
    ++count;
    types.insert(*it);
    ttr = static_cast<double>(types.size()) / static_cast<double>(count);
    if (ttr <= threshold) {
      factors += 1.0;
      types.clear();
      count = 0;
      ttr = 1.0;
    }
  }
  factors += (1.0 - ttr) / (1.0 - threshold);
  if (factors == 0.0) return static_cast<double>(length);
  return static_cast<double>(length) / factors;
}

// Neumaier compensated sum.
struct CompensatedSum {
  double sum = 0.0;
  double c = 0.0;
  void add(double x) {
    const double t = sum + x;
    if (std::fabs(sum) >= std::fabs(x)) {
      c += (sum - t) + x;
    } else {
      c += (x - t) + sum;
    }
    sum = t;
  }
  double value() const { return sum + c; }
};

}  // namespace

double mtld_tokens(const std::vector<std::string>& tokens, double ttr_threshold) {
  if (tokens.empty()) throw PreconditionError("MTLD of an empty token stream");
  const double fwd = mtld_pass(tokens.begin(), tokens.end(), ttr_threshold);
  const double bwd = mtld_pass(tokens.rbegin(), tokens.rend(), ttr_threshold);
  return (fwd + bwd) / 2.0;
}

double mtld(const std::vector<std::string>& queries, double ttr_threshold) {
  std::vector<std::string> stream;
  for (const auto& q : queries) {
    auto t = tokenize(q);
    stream.insert(stream.end(), std::make_move_iterator(t.begin()),
                  std::make_move_iterator(t.end()));
  }
  return mtld_tokens(stream, ttr_threshold);
}

double mean_pairwise_cosine_distance(const std::vector<std::vector<double>>& v) {
  if (v.size() < 2) throw PreconditionError("cosine distance needs at least 2 queries");
  CompensatedSum sum;
  for (std::size_t i = 0; i < v.size(); ++i) {
    for (std::size_t j = i + 1; j < v.size(); ++j) {
      CompensatedSum dot;
      for (std::size_t d = 0; d < v[i].size(); ++d) dot.add(v[i][d] * v[j][d]);
      sum.add(dot.value());
    }
  }
  const double pairs = static_cast<double>(v.size()) * static_cast<double>(v.size() - 1) / 2.0;
  return 1.0 - sum.value() / pairs;
}

double mean_pairwise_cosine_distance(const std::vector<std::string>& queries,
                                     Gateway& gateway, const std::string& embedder,
                                     std::size_t cap, std::uint64_t seed) {
  if (queries.size() < 2) throw PreconditionError("cosine distance needs at least 2 queries");
  std::vector<std::string> sample = queries;
  if (cap >= 2 && sample.size() > cap) {
    std::mt19937_64 rng(seed);
    std::vector<std::string> picked;
    std::sample(queries.begin(), queries.end(), std::back_inserter(picked), cap, rng);
    sample = std::move(picked);
  }
  return mean_pairwise_cosine_distance(gateway.embed(sample, embedder));
}

double cost_per_query(const UsageLedger& ledger, std::size_t n_queries) {
  if (n_queries == 0) throw PreconditionError("cost per query with zero queries");
  return static_cast<double>(ledger.total.total()) / static_cast<double>(n_queries);
}

double delta_percent(double value, double baseline) {
  if (baseline == 0.0) throw PreconditionError("delta against a zero baseline");
  return (value - baseline) / baseline * 100.0;
}

double distinct_delta_percent(const std::array<double, 3>& value,
                              const std::array<double, 3>& baseline) {
  double sum = 0.0;
  for (std::size_t i = 0; i < 3; ++i) sum += delta_percent(value[i], baseline[i]);
  return sum / 3.0;
}

double cost_ratio(double method_tokens, double reference_tokens) {
  if (reference_tokens == 0.0) throw PreconditionError("cost ratio against zero tokens");
  return method_tokens / reference_tokens;
}

double round_to(double value, int decimals) {
  const double scale = std::pow(10.0, decimals);
  return std::round(value * scale) / scale;
}

std::string format_fixed(double value, int decimals) {
  value = round_to(value, decimals);
  if (value == 0.0) value = 0.0;  // no "-0.00"
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, value);
  return buf;
}

std::string format_delta(double delta) {
  const std::string s = format_fixed(delta, 2);
  return round_to(delta, 2) > 0.0 ? "+" + s : s;
}

std::string format_cost_ratio(double ratio) { return "x" + format_fixed(ratio, 1); }

}  // namespace agentprobe
