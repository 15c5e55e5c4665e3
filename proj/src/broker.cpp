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

#include <algorithm>

namespace qbridge {

std::string_view to_string(BrokerError::Code code) {
  switch (code) {
    case BrokerError::Code::DuplicateTopic: return "DuplicateTopic";
    case BrokerError::Code::InvalidName: return "InvalidName";
    case BrokerError::Code::UnknownTopic: return "UnknownTopic";
    case BrokerError::Code::OffsetRegression: return "OffsetRegression";
    case BrokerError::Code::EmptyPayload: return "EmptyPayload";
    case BrokerError::Code::Unavailable: return "Unavailable";
  }
  return "Unknown";
}

bool is_valid_topic_name(std::string_view name) {
  if (name.empty() || name.size() > 128) return false;
  return std::all_of(name.begin(), name.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '.' ||
           c == '_' || c == '-';
  });
}

void Broker::create_topic(const std::string& name) {
  if (!is_valid_topic_name(name)) {
    throw BrokerError(BrokerError::Code::InvalidName, "invalid topic name '" + name + "'");
  }
  std::unique_lock lock(registry_mu_);
  auto [it, inserted] = topics_.try_emplace(name, nullptr);
  if (!inserted) {
    throw BrokerError(BrokerError::Code::DuplicateTopic, "topic '" + name + "' already exists");
  }
  it->second = std::make_unique<TopicLog>();
}

bool Broker::has_topic(const std::string& name) {
  std::shared_lock lock(registry_mu_);
  return topics_.count(name) != 0;
}

Broker::TopicLog& Broker::topic_or_throw(const std::string& name) {
  std::shared_lock lock(registry_mu_);
  auto it = topics_.find(name);
  if (it == topics_.end()) {
    throw BrokerError(BrokerError::Code::UnknownTopic, "unknown topic '" + name + "'");
  }
  // Topics are never removed, so the reference outlives the registry lock.
  return *it->second;
}

Broker::GroupState& Broker::group_state(const Subscription& sub) {
  std::lock_guard lock(groups_mu_);
  auto& slot = groups_[{sub.topic, sub.group}];
  if (!slot) slot = std::make_unique<GroupState>();
  return *slot;
}

std::int64_t Broker::produce(const std::string& topic, std::string payload) {
  if (payload.empty()) {
    throw BrokerError(BrokerError::Code::EmptyPayload, "empty payload for topic '" + topic + "'");
  }
  auto& t = topic_or_throw(topic);
  std::int64_t offset = 0;
  {
    std::lock_guard lock(t.mu);
    offset = static_cast<std::int64_t>(t.log.size());
    t.log.push_back(Message{offset, std::move(payload), std::chrono::steady_clock::now()});
  }
  t.cv.notify_all();
  return offset;
}

std::vector<Message> Broker::consume(const Subscription& sub, std::size_t maxMessages, Millis timeout) {
  if (maxMessages == 0) maxMessages = 1;
  auto& t = topic_or_throw(sub.topic);
  const std::int64_t from = committed_offset(sub) + 1;

  std::unique_lock lock(t.mu);
  t.cv.wait_for(lock, timeout, [&] { return static_cast<std::int64_t>(t.log.size()) > from; });
  std::vector<Message> out;
  for (auto i = from; i < static_cast<std::int64_t>(t.log.size()) && out.size() < maxMessages; ++i) {
    out.push_back(t.log[static_cast<std::size_t>(i)]);
  }
  return out;
}

void Broker::commit(const Subscription& sub, std::int64_t offset) {
  topic_or_throw(sub.topic);
  auto& g = group_state(sub);
  std::lock_guard lock(g.mu);
  if (offset < g.committed) {
    throw BrokerError(BrokerError::Code::OffsetRegression,
                      "commit " + std::to_string(offset) + " below committed offset " +
                          std::to_string(g.committed) + " for group '" + sub.group + "'");
  }
  g.committed = offset;
}

std::int64_t Broker::committed_offset(const Subscription& sub) {
  auto& g = group_state(sub);
  std::lock_guard lock(g.mu);
  return g.committed;
}

std::size_t Broker::topic_size(const std::string& name) {
  auto& t = topic_or_throw(name);
  std::lock_guard lock(t.mu);
  return t.log.size();
}

std::vector<Message> Broker::read_all(const std::string& name) {
  auto& t = topic_or_throw(name);
  std::lock_guard lock(t.mu);
  return t.log;
}

std::vector<std::string> Broker::topic_names() {
  std::shared_lock lock(registry_mu_);
  std::vector<std::string> names;
  names.reserve(topics_.size());
  for (const auto& [name, _] : topics_) names.push_back(name);
  return names;
}

}  // namespace qbridge
