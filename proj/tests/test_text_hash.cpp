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
#include <stdexcept>

#include "agentprobe/hash.hpp"
#include "agentprobe/json_util.hpp"
#include "agentprobe/parallel.hpp"
#include "agentprobe/text.hpp"

using namespace agentprobe;

TEST(Tokenize, LowercasesAndSplitsOnPunctuation) {
  EXPECT_EQ(tokenize("How many AUDIO inputs, 3.5mm?"),
            (std::vector<std::string>{"how", "many", "audio", "inputs", "3", "5mm"}));
}

TEST(Tokenize, KeepsUtf8InsideWords) {
  EXPECT_EQ(tokenize("café 2–15 words"),
            (std::vector<std::string>{"café", "2–15", "words"}));
}

TEST(Tokenize, EmptyAndSeparatorOnly) {
  EXPECT_TRUE(tokenize("").empty());
  EXPECT_TRUE(tokenize(" ,.!? ").empty());
}

TEST(Hash, Fnv1aReferenceVectors) {
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(fnv1a64("foobar"), 0x85944171f73967e8ULL);
}

TEST(Hash, Sha256ReferenceVectors) {
  EXPECT_EQ(sha256_hex(""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  EXPECT_EQ(sha256_hex("abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(JsonUtil, ExtractsObjectFromProseAndFences) {
  auto j = extract_json_object("Sure!\n```json\n{\"score\": 4, \"reason\": \"ok\"}\n```\n");
  ASSERT_TRUE(j.has_value());
  EXPECT_EQ((*j)["score"], 4);
  EXPECT_FALSE(extract_json_object("no object here").has_value());
}

TEST(JsonUtil, StringMemberPicksFirstStringKey) {
  json j{{"reason", "r"}, {"score", 3}};
  EXPECT_EQ(string_member(j, {"reasoning", "reason"}), "r");
  EXPECT_FALSE(string_member(j, {"score"}).has_value());
}

TEST(JsonUtil, Trim) {
  EXPECT_EQ(trim("  a b \n"), "a b");
  EXPECT_EQ(trim(" \t"), "");
}

TEST(ParallelMap, ResultsInIndexOrder) {
  for (int workers : {1, 3, 8}) {
    auto out = parallel_map<int>(100, workers, [](std::size_t i) { return static_cast<int>(i * i); });
    for (std::size_t i = 0; i < out.size(); ++i) EXPECT_EQ(out[i], static_cast<int>(i * i));
  }
}

TEST(ParallelMap, RethrowsAfterJoin) {
  std::atomic<int> calls{0};
  EXPECT_THROW(parallel_map<int>(50, 4,
                                 [&](std::size_t i) {
                                   ++calls;
                                   if (i == 7) throw std::runtime_error("boom");
                                   return 0;
                                 }),
               std::runtime_error);
  EXPECT_GE(calls.load(), 1);
}
