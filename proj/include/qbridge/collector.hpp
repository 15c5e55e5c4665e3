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

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "qbridge/broker.hpp"
#include "qbridge/provider.hpp"
#include "qbridge/timeutil.hpp"
#include "qbridge/wire.hpp"

namespace qbridge::collector {

enum class PollDecision { Finalize, Wait, ReEnqueue };

std::string_view to_string(PollDecision decision);

/// Final state -> FINALIZE. Otherwise simulators and real jobs without an
/// estimate WAIT; real jobs WAIT when (estimate - now) <= threshold and
/// RE_ENQUEUE when it is larger.
PollDecision decide_poll_action(provider::JobState state, bool isSimulator, std::optional<TimePoint> estimatedCompletionAt,
                                TimePoint now, Millis threshold);

struct CollectorConfig {
  Millis waitThreshold{30'000};
  int workerCount = 4;
  int maxAttempts = 100;
  std::optional<Millis> waitTimeout;  // defaults to 2 x waitThreshold
  std::size_t queueCapacity = 1024;

  Millis effective_wait_timeout() const { return waitTimeout.value_or(waitThreshold * 2); }
  /// Throws std::invalid_argument unless every setting is positive.
  void validate() const;
};

inline constexpr std::string_view kCollectorGroup = "collector";
inline constexpr std::string_view kPollBudgetExhausted = "poll budget exhausted";

/// Bounded multi-producer / multi-consumer queue shared by the main loop and workers.
template <typename T>
class WorkQueue {
 public:
  explicit WorkQueue(std::size_t capacity) : capacity_(capacity) {}

  /// Blocks while full. Returns false once closed.
  bool push(T item) {
    std::unique_lock lock(mu_);
    not_full_.wait(lock, [&] { return closed_ || items_.size() < capacity_; });
    if (closed_) return false;
    items_.push_back(std::move(item));
    not_empty_.notify_one();
    return true;
  }

  /// Blocks while empty. Returns nullopt once closed and drained.
  std::optional<T> pop() {
    std::unique_lock lock(mu_);
    not_empty_.wait(lock, [&] { return closed_ || !items_.empty(); });
    if (items_.empty()) return std::nullopt;
    T item = std::move(items_.front());
    items_.pop_front();
    not_full_.notify_one();
    return item;
  }

  void close() {
    std::lock_guard lock(mu_);
    closed_ = true;
    items_.clear();
    not_empty_.notify_all();
    not_full_.notify_all();
  }

  std::size_t size() const {
    std::lock_guard lock(mu_);
    return items_.size();
  }

 private:
  const std::size_t capacity_;
  mutable std::mutex mu_;
  std::condition_variable not_empty_;
  std::condition_variable not_full_;
  std::deque<T> items_;
  bool closed_ = false;
};

struct CollectorStats {
  std::uint64_t consumed = 0;
  std::uint64_t skipped = 0;
  std::uint64_t reenqueued = 0;
  std::uint64_t published = 0;
  std::uint64_t dropped = 0;
};

/// Results collector: one consumer of the input topic feeding a pool of poll workers.
///
/// Events that come back with an estimatedCompletionAt are held by the consumer
/// until the estimate is within waitThreshold, then handed to a worker, which
/// re-queries the provider before deciding.
class Collector {
 public:
  Collector(MessageBus& bus, provider::QuantumProvider& provider, std::string inputTopic, CollectorConfig config);
  ~Collector();
  Collector(const Collector&) = delete;
  Collector& operator=(const Collector&) = delete;

  void start();
  void stop();
  bool running() const noexcept { return running_.load(); }

  /// Drives one submission to a ResultEvent or a re-enqueued SubmissionEvent.
  void worker_process(const SubmissionEvent& event);

  /// Up to three attempts; a topic that stays unavailable drops the event.
  bool publish_result(const ResultEvent& event, const std::string& topic);

  CollectorStats stats() const;
  const CollectorConfig& config() const noexcept { return config_; }

 private:
  struct Deferred {
    TimePoint due;
    SubmissionEvent event;
  };

  void main_loop(std::stop_token stop);
  void worker_loop();
  void publish_error(const SubmissionEvent& event, const std::string& message);
  void reenqueue(const SubmissionEvent& event, std::optional<TimePoint> estimate);

  MessageBus& bus_;
  provider::QuantumProvider& provider_;
  std::string inputTopic_;
  CollectorConfig config_;

  WorkQueue<SubmissionEvent> queue_;
  std::vector<Deferred> deferred_;  // min-heap on due, owned by the main loop
  std::jthread consumer_;
  std::vector<std::thread> workers_;
  std::atomic<bool> running_{false};
  std::atomic<bool> stopping_{false};

  mutable std::mutex stats_mu_;
  CollectorStats stats_;
};

}  // namespace qbridge::collector
