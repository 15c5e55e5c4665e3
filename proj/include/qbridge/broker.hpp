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

#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "qbridge/timeutil.hpp"

namespace qbridge {

struct Message {
  std::int64_t offset = 0;
  std::string payload;
  std::chrono::steady_clock::time_point producedAt;
};

/// A consumer group's view of one topic. Handles with the same
/// (topic, group) pair share a single committed offset held by the broker.
struct Subscription {
  std::string topic;
  std::string group;
};

class BrokerError : public std::runtime_error {
 public:
  enum class Code { DuplicateTopic, InvalidName, UnknownTopic, OffsetRegression, EmptyPayload, Unavailable };

  BrokerError(Code code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Code code() const noexcept { return code_; }

 private:
  Code code_;
};

std::string_view to_string(BrokerError::Code code);

/// Validates the topic-name charset [a-zA-Z0-9._-] and 1..128 length.
bool is_valid_topic_name(std::string_view name);

/// Producer/consumer surface shared by the embedded broker and its HTTP client.
class MessageBus {
 public:
  virtual ~MessageBus() = default;

  virtual void create_topic(const std::string& name) = 0;
  virtual bool has_topic(const std::string& name) = 0;
  virtual std::int64_t produce(const std::string& topic, std::string payload) = 0;
  virtual std::vector<Message> consume(const Subscription& sub, std::size_t maxMessages, Millis timeout) = 0;
  virtual void commit(const Subscription& sub, std::int64_t offset) = 0;
  virtual std::int64_t committed_offset(const Subscription& sub) = 0;
};

/// In-process, append-only, single-partition topic log.
///
/// Produce is linearizable per topic. Consumers block on a per-topic condition
/// variable, so a waiting consumer never holds the topic registry lock.
class Broker final : public MessageBus {
 public:
  Broker() = default;
  Broker(const Broker&) = delete;
  Broker& operator=(const Broker&) = delete;

  void create_topic(const std::string& name) override;
  bool has_topic(const std::string& name) override;
  std::int64_t produce(const std::string& topic, std::string payload) override;
  std::vector<Message> consume(const Subscription& sub, std::size_t maxMessages, Millis timeout) override;
  void commit(const Subscription& sub, std::int64_t offset) override;
  std::int64_t committed_offset(const Subscription& sub) override;

  std::size_t topic_size(const std::string& name);
  /// Snapshot of the whole log, for inspection in tests and tooling.
  std::vector<Message> read_all(const std::string& name);
  std::vector<std::string> topic_names();

 private:
  struct TopicLog {
    std::mutex mu;
    std::condition_variable cv;
    std::vector<Message> log;
  };
  struct GroupState {
    std::mutex mu;
    std::int64_t committed = -1;
  };

  TopicLog& topic_or_throw(const std::string& name);
  GroupState& group_state(const Subscription& sub);

  std::shared_mutex registry_mu_;
  std::map<std::string, std::unique_ptr<TopicLog>> topics_;
  std::mutex groups_mu_;
  std::map<std::pair<std::string, std::string>, std::unique_ptr<GroupState>> groups_;
};

}  // namespace qbridge
