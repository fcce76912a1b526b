// Copyright 2026 The Faultline Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "faultline/gateway.hpp"

#include <atomic>
#include <chrono>
#include <fstream>
#include <thread>
#include <vector>

#include <gtest/gtest.h>

#include "faultline/error.hpp"
#include "faultline/text.hpp"
#include "test_support.hpp"

namespace faultline {
namespace {

CompletionRequest sample_request() {
  CompletionRequest r;
  r.system_prompt = "a  b";
  r.user_prompt = "\nc\n";
  r.model_id = "m1";
  return r;
}

TEST(GatewayTest, CanonicalFormIsSortedAndWhitespaceCollapsed) {
  EXPECT_EQ(canonical_request(sample_request()),
            R"({"max_tokens":4096,"system":"a b","temperature":0.7,"top_p":0.9,"user":"c"})");
  DigestOptions opts{.include_temperature = false, .include_model_id = true};
  EXPECT_EQ(canonical_request(sample_request(), opts),
            R"({"max_tokens":4096,"model_id":"m1","system":"a b","top_p":0.9,"user":"c"})");
}

TEST(GatewayTest, DigestIgnoresModelAndWhitespaceButNotKnobs) {
  CompletionRequest a = sample_request();
  CompletionRequest b = a;
  b.model_id = "other";
  b.user_prompt = "c";
  EXPECT_EQ(request_digest(a), request_digest(b));
  EXPECT_EQ(request_digest(a), text::sha256_hex(canonical_request(a)));
  EXPECT_EQ(request_digest(a).size(), 64u);
  b.temperature = 0.3;
  EXPECT_NE(request_digest(a), request_digest(b));
  EXPECT_EQ(request_digest(a, {.include_temperature = false}),
            request_digest(b, {.include_temperature = false}));
}

TEST(GatewayTest, ValidateRejectsOutOfRangeKnobs) {
  CompletionRequest r;
  EXPECT_NO_THROW(r.validate());
  r.temperature = 2.5;
  EXPECT_THROW(r.validate(), std::invalid_argument);
  r = {};
  r.top_p = 0.0;
  EXPECT_THROW(r.validate(), std::invalid_argument);
  r = {};
  r.max_tokens = 0;
  EXPECT_THROW(r.validate(), std::invalid_argument);
}

TEST(GatewayTest, FixtureStoreRoundTrip) {
  testing::TempDir dir;
  FixtureStore store(dir.path() / "nested");
  EXPECT_TRUE(store.digests().empty());
  EXPECT_FALSE(store.find("abc"));
  store.put({"bbb", "second", {3, 4}});
  store.put({"aaa", "first", {1, 2}});
  EXPECT_EQ(store.digests(), (std::vector<std::string>{"aaa", "bbb"}));
  auto f = store.find("bbb");
  ASSERT_TRUE(f);
  EXPECT_EQ(f->response_text, "second");
  EXPECT_EQ(f->usage, (TokenUsage{3, 4}));
  std::ofstream(dir.path() / "nested" / "bad.json") << "{";
  EXPECT_THROW(store.find("bad"), ParseError);
}

TEST(GatewayTest, RecordThenReplay) {
  testing::TempDir dir;
  FixtureStore store(dir.path());
  auto inner = ScriptedProvider::constant("hello", {5, 6});
  RecordingProvider rec(inner, store);
  auto resp = rec.complete(sample_request());
  EXPECT_EQ(resp.text, "hello");
  EXPECT_EQ(rec.write_failures(), 0u);
  ASSERT_EQ(store.digests().size(), 1u);
  EXPECT_EQ(store.digests()[0], request_digest(sample_request()));

  ReplayProvider replay(store);
  auto again = replay.complete(sample_request());
  EXPECT_EQ(again.text, "hello");
  EXPECT_EQ(again.usage, (TokenUsage{5, 6}));

  CompletionRequest other = sample_request();
  other.user_prompt = "different";
  try {
    replay.complete(other);
    FAIL() << "expected a fixture miss";
  } catch (const FixtureMissError& e) {
    EXPECT_EQ(e.digest(), request_digest(other));
  }
}

TEST(GatewayTest, ScriptedSequenceRepeatsLastReply) {
  auto p = ScriptedProvider::sequence({"a", "b"});
  CompletionRequest r;
  EXPECT_EQ(p->complete(r).text, "a");
  EXPECT_EQ(p->complete(r).text, "b");
  EXPECT_EQ(p->complete(r).text, "b");
  EXPECT_EQ(p->calls(), 3u);
}

TEST(GatewayTest, MeteredCountsCallsFailuresAndMisses) {
  testing::TempDir dir;
  auto replay = std::make_shared<ReplayProvider>(FixtureStore(dir.path()));
  MeteredProvider metered(replay);
  EXPECT_THROW(metered.complete(sample_request()), FixtureMissError);
  auto s = metered.snapshot();
  EXPECT_EQ(s.calls, 1u);
  EXPECT_EQ(s.failures, 1u);
  EXPECT_EQ(s.fixture_misses, 1u);
  ASSERT_EQ(s.missing_digests.size(), 1u);
  EXPECT_EQ(s.request_digests, s.missing_digests);

  MeteredProvider ok(ScriptedProvider::constant("x", {2, 3}));
  ok.complete(sample_request());
  ok.complete(sample_request());
  EXPECT_EQ(ok.snapshot().usage, (TokenUsage{4, 6}));
  EXPECT_EQ(ok.snapshot().failures, 0u);
}

TEST(GatewayTest, InFlightLimiterBoundsConcurrency) {
  std::atomic<int> active{0};
  std::atomic<int> peak{0};
  auto slow = std::make_shared<ScriptedProvider>(
      [&](const CompletionRequest&, std::size_t) {
        int now = ++active;
        int prev = peak.load();
        while (now > prev && !peak.compare_exchange_weak(prev, now)) {
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(20));
        --active;
        return CompletionResponse{"ok", {}};
      });
  InFlightLimiter limiter(slow, 2);
  std::vector<std::jthread> threads;
  for (int i = 0; i < 6; ++i) {
    threads.emplace_back([&] { limiter.complete(CompletionRequest{}); });
  }
  threads.clear();
  EXPECT_LE(peak.load(), 2);
  EXPECT_EQ(slow->calls(), 6u);
  EXPECT_THROW(InFlightLimiter(slow, 0), std::invalid_argument);
}

}  // namespace
}  // namespace faultline
