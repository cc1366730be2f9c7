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

#include "agentprobe/report.hpp"

#include <sstream>

#include "agentprobe/error.hpp"
#include "agentprobe/metrics.hpp"

namespace agentprobe {

namespace {

template <class F>
std::optional<double> maybe(F f) {
  try {
    return f();
  } catch (const PreconditionError&) {
    return std::nullopt;
  }
}

std::string opt(const std::optional<double>& v, int decimals) {
  return v ? format_fixed(*v, decimals) : std::string("--");
}

std::string opt_delta(const std::optional<double>& v) {
  return v ? format_delta(*v) : std::string("--");
}

std::string distinct_triple(const std::array<std::optional<double>, 3>& d) {
  return opt(d[0], 2) + "/" + opt(d[1], 2) + "/" + opt(d[2], 2);
}

json opt_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::string pad(const std::string& s, std::size_t width) {
  // Width counts code points so "Δ" aligns.
  std::size_t cps = 0;
  for (unsigned char c : s) cps += (c & 0xC0) != 0x80;
  return cps >= width ? s : s + std::string(width - cps, ' ');
}

}  // namespace

BaselineMetrics diversity_of(const std::vector<std::string>& queries, Gateway* gateway,
                             const std::string& embedder) {
  BaselineMetrics b;
  b.n_queries = queries.size();
  for (int n = 1; n <= 3; ++n) {
    b.distinct[static_cast<std::size_t>(n - 1)] = maybe([&] { return distinct_n(queries, n); });
  }
  b.mtld = maybe([&] { return mtld(queries); });
  if (gateway != nullptr) {
    b.one_minus_cossim =
        maybe([&] { return mean_pairwise_cosine_distance(queries, *gateway, embedder); });
  }
  return b;
}

void compute_deltas(MetricsReport& r) {
  r.delta_one_minus_cossim.reset();
  r.delta_distinct.reset();
  r.delta_mtld.reset();
  if (!r.baseline) return;
  const auto& b = *r.baseline;
  if (r.one_minus_cossim && b.one_minus_cossim && *b.one_minus_cossim != 0.0) {
    r.delta_one_minus_cossim = delta_percent(*r.one_minus_cossim, *b.one_minus_cossim);
  }
  bool all = true;
  std::array<double, 3> v{};
  std::array<double, 3> base{};
  for (std::size_t i = 0; i < 3; ++i) {
    if (!r.distinct[i] || !b.distinct[i] || *b.distinct[i] == 0.0) {
      all = false;
      break;
    }
    v[i] = *r.distinct[i];
    base[i] = *b.distinct[i];
  }
  if (all) r.delta_distinct = distinct_delta_percent(v, base);
  if (r.mtld && b.mtld && *b.mtld != 0.0) r.delta_mtld = delta_percent(*r.mtld, *b.mtld);
}

std::string render_table(const MetricsReport& r) {
  std::ostringstream os;
  os << "# tokenizer: " << r.tokenizer << "\n";
  os << "# reward: mean weight of majority-kept criteria in [0,1]; violation when reward < "
     << format_fixed(r.violation_threshold, 2) << "\n";
  os << "# objective: " << r.objective << "; queries judged: " << r.n_queries
     << "; queries per prompt: " << r.queries_per_prompt << "\n";
  os << "# log: " << (r.partial ? "partial" : "complete") << ", last ordinal "
     << r.last_ordinal << "\n";
  const std::vector<std::size_t> w{10, 9, 12, 9, 10, 9, 16, 9, 10, 9};
  const std::vector<std::string> head{"Method", "UHR",     "Cost(tok/q)",    "Realism",
                                      "1-CosSim", "Δ%", "Distinct@1/2/3", "mean Δ%",
                                      "MTLD",     "Δ%"};
  auto row = [&](const std::vector<std::string>& cells) {
    std::string line;
    for (std::size_t i = 0; i < cells.size(); ++i) {
      line += i + 1 < cells.size() ? pad(cells[i], w[i]) + " " : cells[i];
    }
    os << line << "\n";
  };
  row(head);
  row({"run",
       r.failure_rate ? format_fixed(*r.failure_rate * 100.0, 2) + "%" : "--",
       opt(r.cost_tokens_per_query, 0), opt(r.realism_mean, 2), opt(r.one_minus_cossim, 2),
       opt_delta(r.delta_one_minus_cossim), distinct_triple(r.distinct),
       opt_delta(r.delta_distinct), opt(r.mtld, 2), opt_delta(r.delta_mtld)});
  if (r.baseline) {
    const auto& b = *r.baseline;
    row({"Human", "--", "--", "--", opt(b.one_minus_cossim, 2),
         b.one_minus_cossim ? "0.00" : "--", distinct_triple(b.distinct), "0.00",
         opt(b.mtld, 2), b.mtld ? "0.00" : "--"});
  }
  return os.str();
}

std::string render_csv(const MetricsReport& r) {
  std::ostringstream os;
  os << "method,uhr,cost_tokens_per_query,realism,one_minus_cossim,one_minus_cossim_delta,"
        "distinct_1,distinct_2,distinct_3,distinct_delta,mtld,mtld_delta,n_queries,"
        "tokenizer,partial,last_ordinal\n";
  auto cell = [](const std::optional<double>& v, int d) {
    return v ? format_fixed(*v, d) : std::string();
  };
  os << "run," << cell(r.failure_rate, 4) << "," << cell(r.cost_tokens_per_query, 2) << ","
     << cell(r.realism_mean, 4) << "," << cell(r.one_minus_cossim, 4) << ","
     << cell(r.delta_one_minus_cossim, 2) << "," << cell(r.distinct[0], 4) << ","
     << cell(r.distinct[1], 4) << "," << cell(r.distinct[2], 4) << ","
     << cell(r.delta_distinct, 2) << "," << cell(r.mtld, 4) << "," << cell(r.delta_mtld, 2)
     << "," << r.n_queries << "," << r.tokenizer << "," << (r.partial ? "true" : "false")
     << "," << r.last_ordinal << "\n";
  if (r.baseline) {
    const auto& b = *r.baseline;
    os << "human,,,," << cell(b.one_minus_cossim, 4) << ",0.00," << cell(b.distinct[0], 4)
       << "," << cell(b.distinct[1], 4) << "," << cell(b.distinct[2], 4) << ",0.00,"
       << cell(b.mtld, 4) << ",0.00," << b.n_queries << "," << r.tokenizer << ",false,\n";
  }
  return os.str();
}

std::string render_struct(const MetricsReport& r) {
  ordered_json j;
  j["tokenizer"] = r.tokenizer;
  j["reward_scale"] = "mean weight of majority-kept criteria in [0,1]";
  j["objective"] = r.objective;
  j["violation_threshold"] = r.violation_threshold;
  j["partial"] = r.partial;
  j["last_ordinal"] = r.last_ordinal;
  j["queries_per_prompt"] = r.queries_per_prompt;
  j["n_queries"] = r.n_queries;
  j["n_violations"] = r.n_violations;
  j["failure_rate"] = opt_json(r.failure_rate);
  j["cost_tokens_per_query"] = opt_json(r.cost_tokens_per_query);
  j["usage"] = {{"prompt_tokens", r.usage.prompt_tokens},
                {"completion_tokens", r.usage.completion_tokens}};
  j["realism_mean"] = opt_json(r.realism_mean);
  j["one_minus_cossim"] = opt_json(r.one_minus_cossim);
  j["distinct"] = {opt_json(r.distinct[0]), opt_json(r.distinct[1]), opt_json(r.distinct[2])};
  j["mtld"] = opt_json(r.mtld);
  if (r.baseline) {
    const auto& b = *r.baseline;
    j["baseline"] = {{"n_queries", b.n_queries},
                     {"one_minus_cossim", opt_json(b.one_minus_cossim)},
                     {"distinct",
                      {opt_json(b.distinct[0]), opt_json(b.distinct[1]), opt_json(b.distinct[2])}},
                     {"mtld", opt_json(b.mtld)}};
    j["delta_percent"] = {{"one_minus_cossim", opt_json(r.delta_one_minus_cossim)},
                          {"distinct", opt_json(r.delta_distinct)},
                          {"mtld", opt_json(r.delta_mtld)}};
  } else {
    j["baseline"] = nullptr;
  }
  return j.dump(2) + "\n";
}

}  // namespace agentprobe
