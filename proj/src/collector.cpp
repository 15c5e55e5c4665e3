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

#include "qbridge/collector.hpp"

#include <algorithm>
#include <stdexcept>

#include <spdlog/spdlog.h>

namespace qbridge::collector {

using provider::JobState;
using provider::ProviderError;

namespace {

constexpr Millis kConsumeSlice{100};
constexpr int kPublishAttempts = 3;
constexpr Millis kPublishBackoff{50};
constexpr Millis kWaitSlice{250};

bool later_due(const auto& a, const auto& b) { return a.due > b.due; }

}  // namespace

std::string_view to_string(PollDecision decision) {
  switch (decision) {
    case PollDecision::Finalize: return "FINALIZE";
    case PollDecision::Wait: return "WAIT";
    case PollDecision::ReEnqueue: return "RE_ENQUEUE";
  }
  return "WAIT";
}

PollDecision decide_poll_action(JobState state, bool isSimulator, std::optional<TimePoint> estimatedCompletionAt,
                                TimePoint now, Millis threshold) {
  if (provider::is_final(state)) return PollDecision::Finalize;
  if (isSimulator) return PollDecision::Wait;
  if (!estimatedCompletionAt) return PollDecision::Wait;
  return (*estimatedCompletionAt - now) <= threshold ? PollDecision::Wait : PollDecision::ReEnqueue;
}

void CollectorConfig::validate() const {
  if (waitThreshold.count() <= 0) throw std::invalid_argument("waitThreshold must be positive");
  if (workerCount <= 0) throw std::invalid_argument("workerCount must be positive");
  if (maxAttempts <= 0) throw std::invalid_argument("maxAttempts must be positive");
  if (effective_wait_timeout().count() <= 0) throw std::invalid_argument("waitTimeout must be positive");
  if (queueCapacity == 0) throw std::invalid_argument("queueCapacity must be positive");
}

Collector::Collector(MessageBus& bus, provider::QuantumProvider& provider, std::string inputTopic,
                     CollectorConfig config)
    : bus_(bus),
      provider_(provider),
      inputTopic_(std::move(inputTopic)),
      config_(config),
      queue_(config.queueCapacity) {
  config_.validate();
}

Collector::~Collector() { stop(); }

void Collector::start() {
  if (running_.exchange(true)) return;
  for (int i = 0; i < config_.workerCount; ++i) workers_.emplace_back([this] { worker_loop(); });
  consumer_ = std::jthread([this](std::stop_token st) { main_loop(st); });
  spdlog::info("collector: consuming '{}' with {} workers, threshold {} ms", inputTopic_, config_.workerCount,
               config_.waitThreshold.count());
}

void Collector::stop() {
  if (!running_.exchange(false)) return;
  stopping_ = true;
  consumer_.request_stop();
  if (consumer_.joinable()) consumer_.join();
  queue_.close();
  for (auto& w : workers_) w.join();
  workers_.clear();
  stopping_ = false;
}

CollectorStats Collector::stats() const {
  std::lock_guard lock(stats_mu_);
  return stats_;
}

void Collector::main_loop(std::stop_token stop) {
  const Subscription sub{inputTopic_, std::string(kCollectorGroup)};
  while (!stop.stop_requested()) {
    // Release held events whose estimate is now within the threshold.
    const auto now = Clock::now();
    while (!deferred_.empty() && deferred_.front().due <= now) {
      std::pop_heap(deferred_.begin(), deferred_.end(), later_due<Deferred, Deferred>);
      auto item = std::move(deferred_.back());
      deferred_.pop_back();
      if (!queue_.push(std::move(item.event))) return;
    }

    Millis slice = kConsumeSlice;
    if (!deferred_.empty()) {
      const auto until_due = std::chrono::duration_cast<Millis>(deferred_.front().due - now) + Millis(1);
      slice = std::clamp(until_due, Millis(1), kConsumeSlice);
    }

    std::vector<Message> batch;
    try {
      batch = bus_.consume(sub, 64, slice);
    } catch (const std::exception& e) {
      spdlog::error("collector: consume from '{}' failed: {}", inputTopic_, e.what());
      std::this_thread::sleep_for(kConsumeSlice);
      continue;
    }

    for (const auto& msg : batch) {
      try {
        auto event = parse_submission_event(msg.payload);
        {
          std::lock_guard lock(stats_mu_);
          ++stats_.consumed;
        }
        if (event.estimatedCompletionAt && *event.estimatedCompletionAt - config_.waitThreshold > Clock::now()) {
          deferred_.push_back({*event.estimatedCompletionAt - config_.waitThreshold, std::move(event)});
          std::push_heap(deferred_.begin(), deferred_.end(), later_due<Deferred, Deferred>);
        } else if (!queue_.push(std::move(event))) {
          return;
        }
      } catch (const WireError& e) {
        spdlog::warn("collector: skipping malformed event at offset {}: {}", msg.offset, e.what());
        std::lock_guard lock(stats_mu_);
        ++stats_.skipped;
      }
      try {
        bus_.commit(sub, msg.offset);
      } catch (const std::exception& e) {
        spdlog::error("collector: commit of offset {} failed: {}", msg.offset, e.what());
      }
    }
  }
}

void Collector::worker_loop() {
  while (auto item = queue_.pop()) worker_process(*item);
}

void Collector::worker_process(const SubmissionEvent& event) {
  if (event.attempt > config_.maxAttempts) {
    publish_error(event, std::string(kPollBudgetExhausted) + " after " + std::to_string(config_.maxAttempts) +
                             " attempts for provider job '" + event.providerJobId + "'");
    return;
  }
  try {
    JobState state;
    try {
      state = provider_.job_status(event.providerJobId);
    } catch (const ProviderError& e) {
      if (e.code() != ProviderError::Code::UnknownJob) throw;
      publish_error(event, "provider job '" + event.providerJobId + "' does not exist");
      return;
    }

    const bool isSimulator = event.backendType != BackendType::Real;
    const auto estimate = isSimulator ? std::nullopt : provider_.queue_info(event.providerJobId);
    const auto decision = decide_poll_action(state, isSimulator, estimate, Clock::now(), config_.waitThreshold);

    provider::ProviderJob job;
    switch (decision) {
      case PollDecision::ReEnqueue:
        reenqueue(event, estimate);
        return;
      case PollDecision::Finalize:
        job = provider_.get_job(event.providerJobId);
        break;
      case PollDecision::Wait: {
        // Waits in slices so that stop() is not held up by a long waitTimeout.
        const auto deadline = std::chrono::steady_clock::now() + config_.effective_wait_timeout();
        for (;;) {
          const auto left = std::chrono::duration_cast<Millis>(deadline - std::chrono::steady_clock::now());
          try {
            job = provider_.wait_for_result(event.providerJobId, std::clamp(left, Millis(1), kWaitSlice));
            break;
          } catch (const ProviderError& e) {
            if (e.code() != ProviderError::Code::WaitTimeout) throw;
          }
          if (stopping_.load()) return;
          if (std::chrono::steady_clock::now() >= deadline) {
            reenqueue(event, provider_.queue_info(event.providerJobId));
            return;
          }
        }
        break;
      }
    }

    ResultEvent result;
    result.clientId = event.clientId;
    result.processJobId = event.processJobId;
    result.providerJobId = event.providerJobId;
    result.backendName = event.backendName;
    result.completedAt = wire_precision(Clock::now());
    result.attempt = event.attempt;
    switch (job.state) {
      case JobState::Done:
        result.status = ResultStatus::Done;
        result.counts = job.counts.value_or(qsim::Counts{});
        break;
      case JobState::Cancelled:
        result.status = ResultStatus::Cancelled;
        break;
      default:
        result.status = ResultStatus::Error;
        result.errorMessage = job.errorMessage.value_or("provider job ended in state " +
                                                        std::string(provider::to_string(job.state)));
        break;
    }
    publish_result(result, event.outputTopic);
  } catch (const std::exception& e) {
    publish_error(event, std::string("polling failed for provider job '") + event.providerJobId + "': " + e.what());
  }
}

void Collector::reenqueue(const SubmissionEvent& event, std::optional<TimePoint> estimate) {
  SubmissionEvent next = event;
  next.estimatedCompletionAt = estimate ? std::optional(wire_precision(*estimate)) : std::nullopt;
  next.attempt = event.attempt + 1;
  try {
    bus_.produce(inputTopic_, serialize(next));
  } catch (const std::exception& e) {
    publish_error(event, std::string("cannot re-enqueue submission: ") + e.what());
    return;
  }
  std::lock_guard lock(stats_mu_);
  ++stats_.reenqueued;
}

void Collector::publish_error(const SubmissionEvent& event, const std::string& message) {
  ResultEvent result;
  result.clientId = event.clientId;
  result.processJobId = event.processJobId;
  result.providerJobId = event.providerJobId;
  result.backendName = event.backendName;
  result.status = ResultStatus::Error;
  result.errorMessage = message;
  result.completedAt = wire_precision(Clock::now());
  result.attempt = event.attempt;
  publish_result(result, event.outputTopic);
}

bool Collector::publish_result(const ResultEvent& event, const std::string& topic) {
  const std::string payload = serialize(event);
  for (int attempt = 1; attempt <= kPublishAttempts; ++attempt) {
    try {
      bus_.produce(topic, payload);
      std::lock_guard lock(stats_mu_);
      ++stats_.published;
      return true;
    } catch (const std::exception& e) {
      spdlog::warn("collector: publish to '{}' failed (attempt {}/{}): {}", topic, attempt, kPublishAttempts,
                   e.what());
      if (attempt < kPublishAttempts) std::this_thread::sleep_for(kPublishBackoff * attempt);
    }
  }
  spdlog::error("collector: ALERT dropping result for {}/{} after {} failed publishes to '{}'", event.clientId,
                event.processJobId, kPublishAttempts, topic);
  std::lock_guard lock(stats_mu_);
  ++stats_.dropped;
  return false;
}

}  // namespace qbridge::collector
