// Copyright 2026 The qbridge Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "qbridge/broker.hpp"

#include <map>
#include <random>
#include <set>
#include <thread>

#include <gtest/gtest.h>

namespace qbridge {
namespace {

BrokerError::Code error_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const BrokerError& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected BrokerError";
  return BrokerError::Code::Unavailable;
}

TEST(BrokerTest, CreateTopicStartsEmpty) {
  Broker b;
  b.create_topic("qbridge-in");
  EXPECT_TRUE(b.has_topic("qbridge-in"));
  EXPECT_EQ(b.topic_size("qbridge-in"), 0u);
}

TEST(BrokerTest, DuplicateTopicRejected) {
  Broker b;
  b.create_topic("qbridge-in");
  EXPECT_EQ(error_of([&] { b.create_topic("qbridge-in"); }), BrokerError::Code::DuplicateTopic);
}

TEST(BrokerTest, TopicNameCharset) {
  Broker b;
  EXPECT_EQ(error_of([&] { b.create_topic("bad topic!"); }), BrokerError::Code::InvalidName);
  EXPECT_EQ(error_of([&] { b.create_topic(""); }), BrokerError::Code::InvalidName);
  EXPECT_EQ(error_of([&] { b.create_topic(std::string(129, 'a')); }), BrokerError::Code::InvalidName);
  EXPECT_NO_THROW(b.create_topic(std::string(128, 'a')));
  EXPECT_NO_THROW(b.create_topic("topic-Ab9._-"));
}

TEST(BrokerTest, ProduceReturnsConsecutiveOffsets) {
  Broker b;
  b.create_topic("t");
  EXPECT_EQ(b.produce("t", "a"), 0);
  EXPECT_EQ(b.produce("t", "b"), 1);
}

TEST(BrokerTest, ProduceToMissingTopic) {
  Broker b;
  EXPECT_EQ(error_of([&] { b.produce("missing", "x"); }), BrokerError::Code::UnknownTopic);
}

TEST(BrokerTest, EmptyPayloadRejected) {
  Broker b;
  b.create_topic("t");
  EXPECT_EQ(error_of([&] { b.produce("t", ""); }), BrokerError::Code::EmptyPayload);
}

TEST(BrokerTest, ConsumeReplaysFromCommitted) {
  Broker b;
  b.create_topic("t");
  for (auto p : {"m0", "m1", "m2"}) b.produce("t", p);
  const Subscription sub{"t", "g"};
  auto all = b.consume(sub, 10, Millis(0));
  ASSERT_EQ(all.size(), 3u);
  for (int i = 0; i < 3; ++i) EXPECT_EQ(all[static_cast<std::size_t>(i)].offset, i);

  b.commit(sub, 1);
  auto rest = b.consume(sub, 10, Millis(0));
  ASSERT_EQ(rest.size(), 1u);
  EXPECT_EQ(rest[0].offset, 2);
  EXPECT_EQ(rest[0].payload, "m2");
}

TEST(BrokerTest, ConsumeRespectsMax) {
  Broker b;
  b.create_topic("t");
  for (int i = 0; i < 5; ++i) b.produce("t", std::to_string(i));
  EXPECT_EQ(b.consume({"t", "g"}, 2, Millis(0)).size(), 2u);
}

TEST(BrokerTest, ConsumeTimesOutEmpty) {
  Broker b;
  b.create_topic("t");
  const auto start = Clock::now();
  EXPECT_TRUE(b.consume({"t", "g"}, 10, Millis(10)).empty());
  EXPECT_GE(Clock::now() - start, Millis(9));
}

TEST(BrokerTest, ConsumeWakesOnProduce) {
  Broker b;
  b.create_topic("t");
  std::jthread producer([&] {
    std::this_thread::sleep_for(Millis(20));
    b.produce("t", "late");
  });
  const auto got = b.consume({"t", "g"}, 10, Millis(5'000));
  ASSERT_EQ(got.size(), 1u);
  EXPECT_EQ(got[0].payload, "late");
}

TEST(BrokerTest, ConsumeMissingTopic) {
  Broker b;
  EXPECT_EQ(error_of([&] { b.consume({"nope", "g"}, 1, Millis(0)); }), BrokerError::Code::UnknownTopic);
}

TEST(BrokerTest, CommitNeverDecreases) {
  Broker b;
  b.create_topic("t");
  const Subscription sub{"t", "g"};
  EXPECT_EQ(b.committed_offset(sub), -1);
  b.commit(sub, 3);
  b.commit(sub, 3);
  EXPECT_EQ(error_of([&] { b.commit(sub, 2); }), BrokerError::Code::OffsetRegression);
  EXPECT_EQ(b.committed_offset(sub), 3);
}

TEST(BrokerTest, GroupsShareOffsetPerTopicAndGroup) {
  Broker b;
  b.create_topic("t");
  b.create_topic("u");
  b.commit({"t", "g"}, 4);
  EXPECT_EQ(b.committed_offset({"t", "g"}), 4);
  EXPECT_EQ(b.committed_offset({"t", "other"}), -1);
  EXPECT_EQ(b.committed_offset({"u", "g"}), -1);
}

// Order preservation: every producer's own messages appear in the order sent,
// and the log's offsets are exactly 0..N-1.
TEST(BrokerPropertyTest, ConcurrentProducersKeepOffsetsConsecutive) {
  constexpr int kProducers = 4;
  constexpr int kPerProducer = 2'500;
  Broker b;
  b.create_topic("t");
  {
    std::vector<std::jthread> producers;
    for (int p = 0; p < kProducers; ++p) {
      producers.emplace_back([&b, p] {
        for (int i = 0; i < kPerProducer; ++i) b.produce("t", std::to_string(p) + ":" + std::to_string(i));
      });
    }
  }
  const auto log = b.read_all("t");
  ASSERT_EQ(log.size(), static_cast<std::size_t>(kProducers * kPerProducer));
  std::map<int, int> nextSeq;
  for (std::size_t i = 0; i < log.size(); ++i) {
    EXPECT_EQ(log[i].offset, static_cast<std::int64_t>(i));
    const auto colon = log[i].payload.find(':');
    const int producer = std::stoi(log[i].payload.substr(0, colon));
    const int seq = std::stoi(log[i].payload.substr(colon + 1));
    EXPECT_EQ(seq, nextSeq[producer]++) << "producer " << producer << " reordered";
  }
}

TEST(BrokerPropertyTest, UncommittedMessagesAreRedelivered) {
  std::mt19937 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    Broker b;
    b.create_topic("t");
    const int n = 1 + static_cast<int>(rng() % 20);
    for (int i = 0; i < n; ++i) b.produce("t", "m" + std::to_string(i));
    const Subscription sub{"t", "g"};
    const int committed = static_cast<int>(rng() % static_cast<unsigned>(n + 1)) - 1;
    if (committed >= 0) b.commit(sub, committed);

    const auto first = b.consume(sub, 100, Millis(0));
    const auto again = b.consume(sub, 100, Millis(0));
    ASSERT_EQ(first.size(), static_cast<std::size_t>(n - 1 - committed));
    ASSERT_EQ(first.size(), again.size());
    for (std::size_t i = 0; i < first.size(); ++i) {
      EXPECT_EQ(first[i].offset, committed + 1 + static_cast<std::int64_t>(i));
      EXPECT_EQ(first[i].payload, again[i].payload);
    }
  }
}

TEST(BrokerPropertyTest, PayloadRoundTripIsByteExact) {
  std::mt19937 rng(11);
  Broker b;
  b.create_topic("t");
  std::vector<std::string> sent;
  for (int i = 0; i < 500; ++i) {
    std::string payload(1 + rng() % 300, '\0');
    for (auto& c : payload) c = static_cast<char>(rng() % 256);
    if (payload == std::string(payload.size(), '\0')) payload[0] = 'x';
    sent.push_back(payload);
    b.produce("t", payload);
  }
  sent.push_back("{\"emoji\":\"\xF0\x9F\x98\x80\",\"nul\":\"\\u0000\"}");
  b.produce("t", sent.back());
  const auto got = b.consume({"t", "g"}, sent.size(), Millis(0));
  ASSERT_EQ(got.size(), sent.size());
  for (std::size_t i = 0; i < sent.size(); ++i) EXPECT_EQ(got[i].payload, sent[i]);
}

}  // namespace
}  // namespace qbridge
