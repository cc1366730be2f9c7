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

#include "agentprobe/backends.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>

#include <httplib.h>

#include "agentprobe/error.hpp"
#include "agentprobe/hash.hpp"
#include "agentprobe/text.hpp"

namespace agentprobe {

namespace {

using Clock = std::chrono::steady_clock;

std::string api_key_from_env(const std::string& var) {
  if (var.empty()) return {};
  const char* v = std::getenv(var.c_str());
  if (v == nullptr || *v == '\0') {
    throw ConfigError("environment variable " + var + " is not set");
  }
  return v;
}

httplib::Result post_json(const std::string& base_url, const std::string& path,
                          const std::string& api_key, int timeout_seconds,
                          const json& body) {
  httplib::Client client(base_url);
  client.set_connection_timeout(timeout_seconds, 0);
  client.set_read_timeout(timeout_seconds, 0);
  client.set_write_timeout(timeout_seconds, 0);
  httplib::Headers headers;
  if (!api_key.empty()) headers.emplace("Authorization", "Bearer " + api_key);
  auto res = client.Post(path, headers, body.dump(), "application/json");
  if (!res) {
    throw TransportError("HTTP request to " + base_url + path + " failed: " +
                         httplib::to_string(res.error()));
  }
  const int status = res->status;
  if (status == 408 || status == 429 || status >= 500) {
    throw TransportError("HTTP " + std::to_string(status) + " from " +
                         base_url + path);
  }
  if (status < 200 || status >= 300) {
    throw Error("HTTP " + std::to_string(status) + " from " + base_url + path +
                ": " + res->body.substr(0, 200));
  }
  return res;
}

json parse_body(const httplib::Result& res) {
  auto j = json::parse(res->body, nullptr, false);
  if (j.is_discarded()) throw TransportError("response body is not JSON");
  return j;
}

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

}  // namespace

ChatResponse HttpChatBackend::complete(const ChatRequest& request) {
  const auto start = Clock::now();
  json messages = json::array();
  if (request.system) {
    messages.push_back({{"role", "system"}, {"content", *request.system}});
  }
  messages.push_back({{"role", "user"}, {"content", request.user}});
  json body = {{"model", options_.model},
               {"messages", messages},
               {"temperature", request.temperature}};
  if (request.max_output_tokens) body["max_tokens"] = *request.max_output_tokens;

  auto res = post_json(options_.base_url, options_.path,
                       api_key_from_env(options_.api_key_env),
                       options_.timeout_seconds, body);
  const json j = parse_body(res);
  ChatResponse out;
  try {
    const auto& content = j.at("choices").at(0).at("message").at("content");
    out.text = content.is_string() ? content.get<std::string>() : std::string{};
  } catch (const nlohmann::json::exception&) {
    throw TransportError("chat response missing choices[0].message.content");
  }
  if (j.contains("usage") && j["usage"].is_object()) {
    out.usage.prompt_tokens = j["usage"].value("prompt_tokens", std::int64_t{0});
    out.usage.completion_tokens =
        j["usage"].value("completion_tokens", std::int64_t{0});
  }
  out.backend_id = request.backend_id;
  out.latency_ms = elapsed_ms(start);
  return out;
}

std::vector<std::vector<double>> HttpEmbeddingBackend::embed(
    std::span<const std::string> texts) {
  json body = {{"model", options_.model},
               {"input", std::vector<std::string>(texts.begin(), texts.end())}};
  auto res = post_json(options_.base_url, options_.path,
                       api_key_from_env(options_.api_key_env),
                       options_.timeout_seconds, body);
  const json j = parse_body(res);
  std::vector<std::vector<double>> out(texts.size());
  try {
    for (const auto& d : j.at("data")) {
      const auto idx = d.value("index", std::size_t{0});
      if (idx >= out.size()) throw TransportError("embedding index out of range");
      out[idx] = d.at("embedding").get<std::vector<double>>();
    }
  } catch (const nlohmann::json::exception&) {
    throw TransportError("embedding response malformed");
  }
  return out;
}

std::vector<std::vector<double>> HashEmbedder::embed(
    std::span<const std::string> texts) {
  std::vector<std::vector<double>> out;
  out.reserve(texts.size());
  for (const auto& text : texts) {
    std::vector<double> v(dim_, 0.0);
    const auto tokens = tokenize(text);
    if (tokens.empty()) {
      v[fnv1a64("") % dim_] = 1.0;
    } else {
      for (const auto& t : tokens) v[fnv1a64(t) % dim_] += 1.0;
    }
    double norm = 0.0;
    for (double x : v) norm += x * x;
    norm = std::sqrt(norm);
    for (double& x : v) x /= norm;
    out.push_back(std::move(v));
  }
  return out;
}

bool glob_match(std::string_view pattern, std::string_view text) {
  std::size_t p = 0, t = 0, star = std::string_view::npos, mark = 0;
  while (t < text.size()) {
    if (p < pattern.size() && (pattern[p] == '?' || pattern[p] == text[t])) {
      ++p;
      ++t;
    } else if (p < pattern.size() && pattern[p] == '*') {
      star = p++;
      mark = t;
    } else if (star != std::string_view::npos) {
      p = star + 1;
      t = ++mark;
    } else {
      return false;
    }
  }
  while (p < pattern.size() && pattern[p] == '*') ++p;
  return p == pattern.size();
}

ScriptedBackend::ScriptedBackend(std::vector<ScriptRule> rules)
    : rules_(std::move(rules)), hits_(rules_.size(), 0) {
  for (const auto& r : rules_) {
    if (r.responses.empty()) throw ConfigError("script rule has no responses");
  }
}

ScriptedBackend ScriptedBackend::from_json(const json& j) {
  const json& arr = j.is_object() ? j.at("rules") : j;
  if (!arr.is_array()) throw ConfigError("script must be an array of rules");
  std::vector<ScriptRule> rules;
  for (const auto& r : arr) {
    ScriptRule rule;
    rule.tag = r.value("tag", std::string("*"));
    rule.backend = r.value("backend", std::string("*"));
    rule.user_contains = r.value("contains", std::string{});
    auto add = [&rule](const json& v) {
      rule.responses.push_back(v.is_string() ? v.get<std::string>() : v.dump());
    };
    if (r.contains("responses")) {
      for (const auto& v : r["responses"]) add(v);
    } else if (r.contains("response")) {
      add(r["response"]);
    }
    if (r.contains("usage")) rule.usage = r["usage"].get<TokenUsage>();
    rules.push_back(std::move(rule));
  }
  return ScriptedBackend(std::move(rules));
}

ScriptedBackend ScriptedBackend::from_file(const std::string& path) {
  auto j = json::parse(read_file(path), nullptr, false);
  if (j.is_discarded()) throw ConfigError("script file is not JSON: " + path);
  return from_json(j);
}

ChatResponse ScriptedBackend::complete(const ChatRequest& request) {
  std::string text;
  std::optional<TokenUsage> usage;
  {
    std::lock_guard lock(mu_);
    std::size_t i = 0;
    for (; i < rules_.size(); ++i) {
      const auto& r = rules_[i];
      if (glob_match(r.tag, request.tag) &&
          glob_match(r.backend, request.backend_id) &&
          request.user.find(r.user_contains) != std::string::npos) {
        break;
      }
    }
    if (i == rules_.size()) {
      throw Error("no scripted response for " + request.tag + " request to '" +
                  request.backend_id + "'");
    }
    const auto& r = rules_[i];
    text = r.responses[std::min(hits_[i], r.responses.size() - 1)];
    ++hits_[i];
    usage = r.usage;
  }
  ChatResponse out;
  out.usage = usage.value_or(TokenUsage{
      estimate_tokens(request.system.value_or("")) + estimate_tokens(request.user),
      estimate_tokens(text)});
  out.text = std::move(text);
  out.backend_id = request.backend_id;
  return out;
}

ChatResponse FunctionBackend::complete(const ChatRequest& request) {
  ChatResponse out;
  out.text = fn_(request);
  out.usage = TokenUsage{
      estimate_tokens(request.system.value_or("")) + estimate_tokens(request.user),
      estimate_tokens(out.text)};
  out.backend_id = request.backend_id;
  return out;
}

// ---------------------------------------------------------------------------
// SyntheticBackend

namespace {

// Text between `open` and the next `close` (or end of input).
std::string section(std::string_view text, std::string_view open,
                    std::string_view close) {
  auto b = text.find(open);
  if (b == std::string_view::npos) return {};
  b += open.size();
  auto e = close.empty() ? std::string_view::npos : text.find(close, b);
  return trim(text.substr(b, e == std::string_view::npos ? text.size() - b : e - b));
}

std::string lower(std::string s) {
  for (auto& c : s) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c + 32);
  }
  return s;
}

std::string hex8(std::uint64_t h) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string s;
  for (int i = 0; i < 8; ++i) s.push_back(kDigits[(h >> (4 * i)) & 0xf]);
  return s;
}

bool is_alpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }

struct Word {
  std::size_t pos;
  std::size_t len;
};

std::vector<Word> alpha_words(const std::string& s) {
  std::vector<Word> out;
  for (std::size_t i = 0; i < s.size();) {
    if (!is_alpha(s[i])) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < s.size() && is_alpha(s[j])) ++j;
    out.push_back({i, j - i});
    i = j;
  }
  return out;
}

std::string mutate_letter(std::string q, std::uint64_t h, bool drop) {
  std::vector<Word> long_words;
  for (auto w : alpha_words(q)) {
    if (w.len >= 4) long_words.push_back(w);
  }
  if (long_words.empty()) return q + (drop ? "" : "x");
  const auto w = long_words[h % long_words.size()];
  const std::size_t at = w.pos + 1 + (h >> 8) % (w.len - 2);
  if (drop) {
    q.erase(at, 1);
  } else {
    const char c = q[at];
    const bool upper = c >= 'A' && c <= 'Z';
    const char base = upper ? 'A' : 'a';
    q[at] = static_cast<char>(base + (c - base + 1) % 26);
  }
  return q;
}

std::string replace_word(const std::string& q, std::string_view from,
                         std::string_view to) {
  for (auto w : alpha_words(q)) {
    if (lower(q.substr(w.pos, w.len)) == from) {
      return q.substr(0, w.pos) + std::string(to) + q.substr(w.pos + w.len);
    }
  }
  return q;
}

std::string lower_first(std::string s) {
  if (!s.empty() && s[0] >= 'A' && s[0] <= 'Z' &&
      !(s.size() > 1 && s[1] >= 'A' && s[1] <= 'Z')) {
    s[0] = static_cast<char>(s[0] + 32);
  }
  return s;
}

std::string rewrite_query(const std::string& query, const std::string& description,
                          const std::string& role_type, std::uint64_t h) {
  const std::string d = lower(description);
  std::string out = query;
  if (!role_type.empty()) {
    if (role_type == "persona") {
      out = "I'm on a tight budget, " + lower_first(query);
    } else if (role_type == "scenario") {
      out = "We're moving next month, " + lower_first(query);
    } else {
      out = "Tell me straight: " + lower_first(query);
    }
  } else if (d.find("extraneous") != std::string::npos) {
    out = query + std::string(1 + h % 2, "xzq"[h % 3]);
  } else if (d.find("change one or two letters") != std::string::npos) {
    out = mutate_letter(query, h, false);
  } else if (d.find("typo") != std::string::npos) {
    out = mutate_letter(query, h, true);
  } else if (d.find("synonym") != std::string::npos) {
    static constexpr std::array<std::pair<std::string_view, std::string_view>, 12>
        kSynonyms{{{"use", "utilize"}, {"cable", "connector"}, {"buy", "purchase"},
                   {"big", "large"}, {"small", "compact"}, {"good", "decent"},
                   {"need", "require"}, {"help", "assist"}, {"fast", "quick"},
                   {"cheap", "affordable"}, {"product", "item"}, {"work", "function"}}};
    for (const auto& [from, to] : kSynonyms) out = replace_word(out, from, to);
    if (out == query) out = "Honestly, " + lower_first(query);
  } else if (d.find("delete") != std::string::npos) {
    for (std::string_view w : {"and", "really", "just", "actually", "the", "a"}) {
      auto words = alpha_words(out);
      auto it = std::find_if(words.begin(), words.end(), [&](Word x) {
        return lower(out.substr(x.pos, x.len)) == w;
      });
      if (it != words.end()) {
        std::size_t end = it->pos + it->len;
        if (end < out.size() && out[end] == ' ') ++end;
        out.erase(it->pos, end - it->pos);
        break;
      }
    }
  } else if (d.find("neutral") != std::string::npos) {
    auto words = alpha_words(query);
    if (!words.empty()) {
      const auto w = words.front();
      out = query.substr(0, w.pos + w.len) + " actually" + query.substr(w.pos + w.len);
    }
  } else if (d.find("handle") != std::string::npos) {
    out = query + " @" + hex8(h).substr(0, 5);
  } else if (d.find("paraphrase") != std::string::npos) {
    out = "Quick question: " + lower_first(query);
  } else if (d.find("syntactic") != std::string::npos ||
             d.find("structure") != std::string::npos) {
    std::string body = query;
    while (!body.empty() && (body.back() == '?' || body.back() == '.')) body.pop_back();
    out = "I was wondering, " + lower_first(body) + "?";
  } else {
    out = query + " thanks";
  }
  if (trim(out) == trim(query)) out = query + " please";
  return out;
}

std::string humanize(std::string key) {
  std::replace(key.begin(), key.end(), '_', ' ');
  return key;
}

std::string generate_query(const std::string& user, std::uint64_t h) {
  const auto dk = extract_json_object(section(user, "Domain knowledge:", ""));
  std::string name = "this";
  std::vector<std::pair<std::string, std::string>> attrs;
  if (dk) {
    if (auto n = string_member(*dk, {"product_name", "name"})) {
      const auto words = alpha_words(*n);
      name = words.empty() ? *n : n->substr(words[0].pos, words[0].len);
    }
    if (dk->contains("attributes") && (*dk)["attributes"].is_object()) {
      for (auto it = (*dk)["attributes"].begin(); it != (*dk)["attributes"].end();
           ++it) {
        attrs.emplace_back(humanize(it.key()),
                           it->is_string() ? it->get<std::string>() : it->dump());
      }
    }
  }
  const std::string a1 = attrs.empty() ? "size" : attrs[h % attrs.size()].first;
  const std::string a2 =
      attrs.size() < 2 ? "warranty" : attrs[(h / 7 + 1) % attrs.size()].first;
  switch ((h >> 16) % 8) {
    case 0: return "What is the " + a1 + " on the " + name + "?";
    case 1: return "How is the " + a1 + " and is the " + a2 + " any good?";
    case 2: return a1 + " and " + a2 + "?";
    case 3: return "Does the " + name + " " + a1 + " hold up for daily use?";
    case 4: return "Can you compare the " + a1 + " with the " + a2 + " for me?";
    case 5: return "is " + a1 + " ok for a small apartment";
    case 6: return "How many " + a1 + " options and can I check the " + a2 + "?";
    default: return "Worried about " + a1 + ", what about " + a2 + "?";
  }
}

std::string agent_answer(const ChatRequest& request, std::uint64_t h) {
  const auto dk = extract_json_object(request.system.value_or(""));
  std::vector<std::pair<std::string, std::string>> attrs;
  if (dk && dk->contains("attributes") && (*dk)["attributes"].is_object()) {
    for (auto it = (*dk)["attributes"].begin(); it != (*dk)["attributes"].end(); ++it) {
      attrs.emplace_back(humanize(it.key()),
                         it->is_string() ? it->get<std::string>() : it->dump());
    }
  }
  switch (h % 3) {
    case 0: return "I'm not sure; the listing does not say.";
    case 1:
      if (attrs.empty()) return "It should be fine for most uses.";
      return "The " + attrs[h / 3 % attrs.size()].first + " is " +
             attrs[h / 3 % attrs.size()].second + ".";
    default: {
      if (attrs.empty()) return "Yes. Check the manufacturer spec sheet for details.";
      std::string s;
      for (const auto& [k, v] : attrs) s += "The " + k + " is " + v + ". ";
      return s + "Check the manufacturer spec sheet for anything else.";
    }
  }
}

std::vector<std::string> criteria_keys(const std::string& user) {
  std::vector<std::string> keys;
  const auto block = section(user, "\nCriteria:\n", "\n\nRules:");
  std::size_t i = 0;
  while (i < block.size()) {
    auto nl = block.find('\n', i);
    std::string line = block.substr(i, nl == std::string::npos ? std::string::npos : nl - i);
    i = nl == std::string::npos ? block.size() : nl + 1;
    line = trim(line);
    if (line.rfind("- ", 0) != 0) continue;
    auto colon = line.find(':');
    keys.push_back(trim(line.substr(2, colon == std::string::npos ? std::string::npos
                                                                  : colon - 2)));
  }
  return keys;
}

constexpr std::array<std::string_view, 8> kExploitationLines{
    "Combine two attribute questions in one short sentence.",
    "Leave one detail of the question implicit so it needs inference.",
    "Ask about a compatibility concern the listing may not cover.",
    "Join a factual spec question with a how-to question.",
    "Phrase the second ask as a casual afterthought.",
    "Mention a concrete quantity the shopper cares about.",
    "Prefer questions whose answer spans two attributes.",
    "Use an open question word instead of a yes/no opener."};
constexpr std::array<std::string_view, 8> kExplorationLines{
    "Ask from the angle of a first-time buyer.",
    "Focus on an everyday usage situation instead of specs.",
    "Ask about a trade-off between comfort and looks.",
    "Ask how the product fits into an existing setup.",
    "Raise a concern about long-term durability.",
    "Ask about an attribute the shopper cannot see in photos.",
    "Write it the way someone types on a phone.",
    "Ask what to check before the return window closes."};
constexpr std::array<std::string_view, 8> kExaminationLines{
    "Target a detail an assistant would likely skip.",
    "Ask for a justification, not only a fact.",
    "Ask for a next step the shopper can take.",
    "Ask something only partly answerable from the listing.",
    "Require both a number and an explanation.",
    "Hide the main goal behind a side remark.",
    "Ask for a comparison the listing does not state.",
    "Include a mild contradiction the assistant must resolve."};

std::string expand_prompt_text(const ChatRequest& request, std::uint64_t h) {
  const std::string current =
      section(request.user, "Current prompt:\n", "\n\nReasoning of why");
  const std::string history =
      section(request.user, "Previous prompts (", "\n\nGuidelines for the new prompt");
  const auto dir = request.tag.substr(request.tag.find(':') + 1);
  const auto& lines = dir == "exploitation"  ? kExploitationLines
                      : dir == "exploration" ? kExplorationLines
                                             : kExaminationLines;
  std::string candidate;
  for (std::size_t i = 0; i < lines.size() * 2; ++i) {
    const auto line = lines[(h + i) % lines.size()];
    if (current.find(line) != std::string::npos) continue;
    candidate = current + " " + std::string(line);
    if (i >= lines.size()) candidate += " (" + std::to_string(i) + ")";
    if (history.find(candidate + "\n") == std::string::npos &&
        !history.ends_with(candidate)) {
      break;
    }
    candidate.clear();
  }
  if (candidate.empty()) candidate = current + " Variant " + hex8(h) + ".";
  json out = {{"reasoning", "Adjust the prompt toward " + dir +
                                " of the observed behavior while keeping it natural."},
              {"prompt", candidate}};
  return out.dump();
}

constexpr std::array<std::string_view, 4> kReasons{
    "The queries read like templates and stack several asks.",
    "The prompt invites structured, list-like phrasing.",
    "The generated questions are direct and fully specified.",
    "The questions mix specs and usage without a clear goal."};
constexpr std::array<std::string_view, 4> kSuggestions{
    "Keep queries to one short casual sentence.",
    "Drop formal wording and write like a shopper on a phone.",
    "Leave one detail implicit so the assistant must infer it.",
    "Pair a factual ask with a subjective concern."};

}  // namespace

ChatResponse SyntheticBackend::complete(const ChatRequest& request) {
  const std::string system = request.system.value_or("");
  const std::uint64_t h =
      fnv1a64(request.backend_id + '\x1f' + system + '\x1f' + request.user);
  const std::string& tag = request.tag;
  std::string text;

  if (tag == "query:generate") {
    text = generate_query(request.user, fnv1a64(request.user));
  } else if (tag == "query:expand") {
    std::string query = section(request.user, "Current query:\n", "\n\n");
    std::string role;
    std::string description;
    if (query.empty()) {
      query = section(request.user, "Original query:\n", "\n\n");
      role = section(request.user, "reflect a specific ", ".");
      description = role;
    } else {
      description = section(request.user, "Perturbation strategy:\n", "\n\n");
    }
    text = rewrite_query(query, description, role, fnv1a64(request.user));
  } else if (tag == "agent:answer") {
    text = agent_answer(request, h);
  } else if (tag == "judge:response") {
    const auto keys = criteria_keys(request.user);
    const std::uint64_t base = fnv1a64(section(request.user, "Query:\n", "\n\nCriteria:"));
    json selected = json::array();
    if (!keys.empty()) {
      std::size_t level = base % keys.size();
      if (fnv1a64(request.backend_id + hex8(base)) % 4 == 0) {
        level = (level + 1) % keys.size();
      }
      selected.push_back(keys[level]);
    }
    text = json{{"reasoning", "Compared the response with each criterion."},
                {"criteria", selected}}
               .dump();
  } else if (tag == "judge:realism") {
    const std::uint64_t base = fnv1a64(section(request.user, "Query:\n", "\n\nOutput Format"));
    long score = 2 + static_cast<long>(base % 4);
    score += static_cast<long>(fnv1a64(request.backend_id + hex8(base)) % 3) - 1;
    score = std::clamp(score, 1L, 5L);
    text = json{{"reason", "Judged on length, tone and phrasing."}, {"score", score}}
               .dump();
  } else if (tag.rfind("reflect:", 0) == 0) {
    text = json{{"reasoning", std::string(kReasons[h % kReasons.size()])},
                {"suggestions", std::string(kSuggestions[(h >> 8) % kSuggestions.size()])}}
               .dump();
  } else if (tag.rfind("expand:", 0) == 0) {
    text = expand_prompt_text(request, fnv1a64(request.user));
  } else {
    text = "OK";
  }

  ChatResponse out;
  out.usage = TokenUsage{estimate_tokens(system) + estimate_tokens(request.user),
                         estimate_tokens(text)};
  out.text = std::move(text);
  out.backend_id = request.backend_id;
  out.latency_ms = 0.0;
  return out;
}

}  // namespace agentprobe
