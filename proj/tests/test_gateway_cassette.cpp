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

#include <gtest/gtest.h>

#include <atomic>
#include <cmath>

#include "agentprobe/backends.hpp"
#include "agentprobe/cassette.hpp"
#include "agentprobe/error.hpp"
#include "agentprobe/gateway.hpp"
#include "agentprobe/hash.hpp"
#include "agentprobe/parallel.hpp"
#include "test_support.hpp"

using namespace agentprobe;

namespace {

ChatRequest req(std::string backend, std::string user, std::string tag = "t") {
  ChatRequest r;
  r.backend_id = std::move(backend);
  r.user = std::move(user);
  r.tag = std::move(tag);
  return r;
}

RetryPolicy no_wait(int attempts) {
  RetryPolicy p;
  p.max_attempts = attempts;
  p.initial_backoff = std::chrono::milliseconds(0);
  return p;
}

class Flaky : public ChatBackend {
 public:
  explicit Flaky(int failures) : failures_(failures) {}
  ChatResponse complete(const ChatRequest& r) override {
    if (calls_++ < failures_) throw TransportError("503");
    ChatResponse out;
    out.text = "ok:" + r.user;
    out.usage = {10, 5};
    out.latency_ms = 1.6;
    return out;
  }
  int calls() const { return calls_; }

 private:
  int failures_;
  std::atomic<int> calls_{0};
};

}  // namespace

TEST(Gateway, RoutesAndTracksUsagePerTag) {
  Gateway g(no_wait(1), 2);
  g.register_backend("echo", std::make_shared<FunctionBackend>(
                                 [](const ChatRequest& r) { return "echo " + r.user; }));
  EXPECT_EQ(g.complete(req("echo", "hi", "a")).text, "echo hi");
  g.complete(req("echo", "there", "b"));
  g.complete(req("echo", "again", "a"));
  const auto l = g.ledger_snapshot();
  EXPECT_EQ(l.calls, 3);
  EXPECT_EQ(l.per_tag.at("a").calls, 2);
  TokenUsage sum;
  for (const auto& [tag, t] : l.per_tag) sum += t.usage;
  EXPECT_EQ(sum.total(), l.total.total());
  EXPECT_GT(l.total.total(), 0);
}

TEST(Gateway, RejectsBadRequests) {
  Gateway g(no_wait(1), 1);
  g.register_backend("echo", std::make_shared<FunctionBackend>([](const ChatRequest&) { return "x"; }));
  EXPECT_THROW(g.complete(req("nobody", "hi")), UnknownBackendError);
  EXPECT_THROW(g.complete(req("echo", "")), ValidationError);
  auto r = req("echo", "hi");
  r.temperature = -1.0;
  EXPECT_THROW(g.complete(r), ValidationError);
}

TEST(Gateway, RetriesTransportFailures) {
  auto flaky = std::make_shared<Flaky>(2);
  Gateway g(no_wait(3), 1);
  g.register_backend("f", flaky);
  EXPECT_EQ(g.complete(req("f", "q")).text, "ok:q");
  EXPECT_EQ(flaky->calls(), 3);

  auto worse = std::make_shared<Flaky>(5);
  Gateway g2(no_wait(2), 1);
  g2.register_backend("f", worse);
  EXPECT_THROW(g2.complete(req("f", "q")), TransportError);
  EXPECT_EQ(worse->calls(), 2);
  EXPECT_EQ(g2.ledger_snapshot().calls, 0);
}

TEST(Gateway, LatencyIsRoundedToWholeMilliseconds) {
  Gateway g(no_wait(1), 1);
  g.register_backend("f", std::make_shared<Flaky>(0));
  EXPECT_DOUBLE_EQ(g.complete(req("f", "q")).latency_ms, 2.0);
  EXPECT_DOUBLE_EQ(g.ledger_snapshot().wall_ms, 2.0);
}

TEST(Gateway, RestoreLedger) {
  Gateway g(no_wait(1), 1);
  UsageLedger l;
  l.add("x", {3, 4}, 1.0);
  g.restore_ledger(l);
  EXPECT_EQ(g.ledger_snapshot(), l);
}

TEST(Cassette, RequestKeyIsDigestOfCanonicalTuple) {
  auto r = req("b", "user text");
  r.system = "sys";
  r.temperature = 0.5;
  const json tuple = json::array({"b", "sys", "user text", 0.5});
  EXPECT_EQ(request_key(r), sha256_hex(tuple.dump()));
  auto other = r;
  other.tag = "different tag";
  EXPECT_EQ(request_key(other), request_key(r));
  other.system.reset();
  EXPECT_NE(request_key(other), request_key(r));
}

TEST(Cassette, RecordThenReplayReproducesResponsesAndLedger) {
  testsupport::TempDir dir;
  const auto path = dir.str("c.jsonl");
  std::atomic<int> counter{0};
  auto live = std::make_shared<FunctionBackend>(
      [&](const ChatRequest& r) { return r.user + "#" + std::to_string(counter++); });

  std::vector<std::string> users;
  for (int i = 0; i < 40; ++i) users.push_back("u" + std::to_string(i % 7));
  std::vector<std::string> recorded;
  UsageLedger recorded_ledger;
  {
    Gateway g(no_wait(1), 4);
    g.register_backend("m", live);
    g.attach_recorder(std::make_shared<CassetteRecorder>(path));
    // Sequential so the n-th occurrence of a key is well defined.
    for (const auto& u : users) recorded.push_back(g.complete(req("m", u)).text);
    recorded_ledger = g.ledger_snapshot();
  }
  const auto lines = testsupport::file_lines(path);
  ASSERT_EQ(lines.size(), users.size());
  for (std::size_t i = 0; i < lines.size(); ++i) {
    EXPECT_EQ(json::parse(lines[i])["ordinal"].get<std::size_t>(), i);
  }

  auto cassette = std::make_shared<Cassette>(Cassette::load(path));
  Gateway replay(no_wait(1), 1);
  replay.register_backend("m", std::make_shared<ReplayBackend>(cassette));
  for (std::size_t i = 0; i < users.size(); ++i) {
    EXPECT_EQ(replay.complete(req("m", users[i])).text, recorded[i]);
  }
  EXPECT_EQ(replay.ledger_snapshot(), recorded_ledger);
  EXPECT_EQ(cassette->remaining(), 0u);
  EXPECT_THROW(replay.complete(req("m", "u1")), CassetteMissError);
  EXPECT_THROW(replay.complete(req("m", "never recorded")), CassetteMissError);
}

TEST(Cassette, ConcurrentRecordingWritesInTicketOrderWithoutGaps) {
  testsupport::TempDir dir;
  const auto path = dir.str("c.jsonl");
  Gateway g(no_wait(1), 4);
  g.register_backend("m", std::make_shared<FunctionBackend>([](const ChatRequest& r) {
                       if (r.user == "fail") throw Error("rejected");
                       return r.user;
                     }));
  g.attach_recorder(std::make_shared<CassetteRecorder>(path));
  auto out = parallel_map<int>(30, 4, [&](std::size_t i) {
    try {
      g.complete(req("m", i % 10 == 3 ? "fail" : "q" + std::to_string(i)));
      return 1;
    } catch (const Error&) {
      return 0;
    }
  });
  int ok = 0;
  for (int v : out) ok += v;
  const auto lines = testsupport::file_lines(path);
  ASSERT_EQ(static_cast<int>(lines.size()), ok);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    EXPECT_EQ(json::parse(lines[i])["ordinal"].get<std::size_t>(), i);
  }
}

TEST(Cassette, SecretsNeverReachTheCassette) {
  testsupport::TempDir dir;
  const auto path = dir.str("c.jsonl");
  ::setenv("AGENTPROBE_TEST_SECRET", "sk-do-not-store", 1);
  Gateway g(no_wait(1), 1);
  g.register_backend("m", std::make_shared<FunctionBackend>([](const ChatRequest&) { return "x"; }));
  g.attach_recorder(std::make_shared<CassetteRecorder>(path));
  g.complete(req("m", "hello"));
  for (const auto& line : testsupport::file_lines(path)) {
    EXPECT_EQ(line.find("sk-do-not-store"), std::string::npos);
  }
}

TEST(HttpBackend, MissingKeyIsConfigError) {
  ::unsetenv("AGENTPROBE_TEST_MISSING_KEY");
  HttpChatBackend::Options o;
  o.base_url = "http://127.0.0.1:9";
  o.model = "m";
  o.api_key_env = "AGENTPROBE_TEST_MISSING_KEY";
  HttpChatBackend b(o);
  EXPECT_THROW(b.complete(req("x", "hi")), ConfigError);
}

TEST(HttpBackend, ConnectionFailureIsTransportError) {
  HttpChatBackend::Options o;
  o.base_url = "http://127.0.0.1:9";
  o.model = "m";
  o.timeout_seconds = 2;
  HttpChatBackend b(o);
  EXPECT_THROW(b.complete(req("x", "hi")), TransportError);
}

TEST(HashEmbedder, BagOfWordsBucketsUnitNorm) {
  HashEmbedder e;
  std::vector<std::string> texts{"a A a", "b", ""};
  auto v = e.embed(texts);
  ASSERT_EQ(v.size(), 3u);
  ASSERT_EQ(v[0].size(), 256u);
  EXPECT_DOUBLE_EQ(v[0][fnv1a64("a") % 256], 1.0);
  EXPECT_DOUBLE_EQ(v[2][fnv1a64("") % 256], 1.0);
  for (const auto& vec : v) {
    double n = 0.0;
    for (double x : vec) n += x * x;
    EXPECT_NEAR(std::sqrt(n), 1.0, 1e-12);
  }
}
