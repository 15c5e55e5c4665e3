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

// Test doubles for the bus, provider and function invoker seams.

#pragma once

#include <atomic>
#include <functional>
#include <mutex>
#include <vector>

#include "qbridge/broker.hpp"
#include "qbridge/gateway.hpp"
#include "qbridge/provider.hpp"

namespace qbridge::testing {

/// Delegates to a real broker; produce to `failTopic` throws while `failing` is set.
class FlakyBus : public MessageBus {
 public:
  explicit FlakyBus(MessageBus& inner) : inner_(inner) {}

  std::atomic<bool> failing{false};
  std::string failTopic;  // empty: every topic
  std::atomic<int> produceAttempts{0};

  void create_topic(const std::string& name) override { inner_.create_topic(name); }
  bool has_topic(const std::string& name) override { return inner_.has_topic(name); }
  std::int64_t produce(const std::string& topic, std::string payload) override {
    ++produceAttempts;
    if (failing && (failTopic.empty() || failTopic == topic)) {
      throw BrokerError(BrokerError::Code::Unavailable, "broker is down");
    }
    return inner_.produce(topic, std::move(payload));
  }
  std::vector<Message> consume(const Subscription& sub, std::size_t max, Millis timeout) override {
    return inner_.consume(sub, max, timeout);
  }
  void commit(const Subscription& sub, std::int64_t offset) override { inner_.commit(sub, offset); }
  std::int64_t committed_offset(const Subscription& sub) override { return inner_.committed_offset(sub); }

 private:
  MessageBus& inner_;
};

/// Delegates to a real provider and records cancels.
class RecordingProvider : public provider::QuantumProvider {
 public:
  explicit RecordingProvider(provider::QuantumProvider& inner) : inner_(inner) {}

  std::vector<std::string> cancelled;
  std::atomic<int> submits{0};

  std::vector<provider::Device> devices() override { return inner_.devices(); }
  std::string submit(const std::string& device, const qsim::CircuitSpec& c, std::int64_t shots,
                     std::optional<qsim::NoiseModel> noise) override {
    ++submits;
    return inner_.submit(device, c, shots, noise);
  }
  provider::JobState job_status(const std::string& id) override { return inner_.job_status(id); }
  std::optional<TimePoint> queue_info(const std::string& id) override { return inner_.queue_info(id); }
  provider::ProviderJob wait_for_result(const std::string& id, Millis timeout) override {
    return inner_.wait_for_result(id, timeout);
  }
  provider::CancelOutcome cancel(const std::string& id) override {
    cancelled.push_back(id);
    return inner_.cancel(id);
  }
  provider::ProviderJob get_job(const std::string& id) override { return inner_.get_job(id); }

 private:
  provider::QuantumProvider& inner_;
};

/// Counts calls and answers with a scripted reply.
class ScriptedInvoker : public gateway::FunctionInvoker {
 public:
  using Script = std::function<gateway::HttpReply(const config::InvocationRequest&)>;
  explicit ScriptedInvoker(Script script) : script_(std::move(script)) {}

  std::atomic<int> calls{0};
  std::vector<config::InvocationRequest> requests;

  gateway::HttpReply invoke(const config::InvocationRequest& request) override {
    ++calls;
    {
      std::lock_guard lock(mu_);
      requests.push_back(request);
    }
    return script_(request);
  }

 private:
  Script script_;
  std::mutex mu_;
};

}  // namespace qbridge::testing
