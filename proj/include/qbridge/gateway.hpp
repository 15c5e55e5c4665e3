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
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "qbridge/broker.hpp"
#include "qbridge/config_store.hpp"
#include "qbridge/http_service.hpp"
#include "qbridge/qsim.hpp"
#include "qbridge/timeutil.hpp"
#include "qbridge/wire.hpp"

namespace qbridge::gateway {

class GatewayError : public std::runtime_error {
 public:
  enum class Code {
    BadRequest,
    UnknownSession,
    UnknownAlgorithm,
    FunctionUnreachable,
    FunctionRejected,
    UnknownJob,
    WrongClient,
    BrokerFailure,
  };

  GatewayError(Code code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Code code() const noexcept { return code_; }

 private:
  Code code_;
};

std::string_view to_string(GatewayError::Code code);
int http_status(GatewayError::Code code);

struct ClientSession {
  std::string clientId;
  std::string outputTopic;
  TimePoint createdAt;
};

enum class JobStatus { Pending, Done, Error };
std::string_view to_string(JobStatus status);

struct JobRecord {
  std::string processJobId;
  std::string clientId;
  std::string algorithmId;
  JobStatus status = JobStatus::Pending;
  /// DONE: {"frequencies", "counts", "backendName"}; ERROR: {"errorMessage", "backendName"}.
  std::optional<nlohmann::json> resultPayload;
  TimePoint submittedAt;
  std::optional<TimePoint> completedAt;
};

nlohmann::json to_json(const JobRecord& record);

struct HttpReply {
  int status = 0;
  std::string body;
};

/// Performs a rendered invocation. Throws on transport failure.
class FunctionInvoker {
 public:
  virtual ~FunctionInvoker() = default;
  virtual HttpReply invoke(const config::InvocationRequest& request) = 0;
};

class HttpFunctionInvoker final : public FunctionInvoker {
 public:
  explicit HttpFunctionInvoker(std::chrono::seconds timeout = std::chrono::seconds(10)) : timeout_(timeout) {}
  HttpReply invoke(const config::InvocationRequest& request) override;

 private:
  std::chrono::seconds timeout_;
};

/// Turns raw counts into the display payload's "frequencies" object.
using PostProcessor = std::function<nlohmann::json(const qsim::Counts&)>;

/// Frequencies keyed by bitstring.
nlohmann::json bitstring_frequencies(const qsim::Counts& counts);
/// Frequencies keyed by decoded emoticon; keys with no glyph are summed into "undecodable".
nlohmann::json emoticon_frequencies(const qsim::Counts& counts);

/// One live-channel connection: finalized JobRecords queued as JSON text.
class LiveSubscriber {
 public:
  explicit LiveSubscriber(std::string clientId) : clientId_(std::move(clientId)) {}

  void push(std::string message);
  /// Next message, or nullopt on timeout or once closed.
  std::optional<std::string> pop(Millis timeout);
  void close();
  bool closed() const;
  const std::string& client_id() const noexcept { return clientId_; }

 private:
  std::string clientId_;
  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::deque<std::string> pending_;
  bool closed_ = false;
};

inline constexpr std::string_view kGatewayGroup = "gateway";

/// Client-facing backend: sessions with private output topics, config-driven
/// dispatch to function endpoints, and one result consumer per session.
class Gateway {
 public:
  Gateway(config::ConfigStore& config, MessageBus& bus, FunctionInvoker& invoker, std::string functionToken,
          std::uint64_t seed = std::random_device{}());
  ~Gateway();
  Gateway(const Gateway&) = delete;
  Gateway& operator=(const Gateway&) = delete;

  /// Result processing for `algorithmId`; others fall back to bitstring frequencies.
  void register_post_processor(const std::string& algorithmId, PostProcessor processor);

  ClientSession create_session();
  std::optional<ClientSession> find_session(const std::string& clientId) const;

  /// Looks up the config record before any network traffic, then invokes the function.
  std::string handle_submit(const std::string& clientId, const std::string& algorithmId, const nlohmann::json& params,
                            BackendType backendType, std::int64_t shots);

  JobRecord get_job(const std::string& clientId, const std::string& processJobId) const;
  std::vector<std::string> algorithms() const;

  /// Applies one output-topic payload for the given session. Returns true if it
  /// moved a record out of PENDING.
  bool apply_result(const std::string& clientId, std::string_view payload);

  std::shared_ptr<LiveSubscriber> subscribe(const std::string& clientId);
  void unsubscribe(const std::shared_ptr<LiveSubscriber>& subscriber);

  void stop();

 private:
  struct SessionState {
    ClientSession session;
    std::jthread consumer;
    std::vector<std::shared_ptr<LiveSubscriber>> subscribers;
  };

  void run_result_consumer(std::string clientId, std::string topic, std::stop_token stop);
  std::string random_hex(int digits);
  std::string new_uuid();
  void fail_record(const std::string& processJobId, const std::string& message);

  config::ConfigStore& config_;
  MessageBus& bus_;
  FunctionInvoker& invoker_;
  std::string functionToken_;

  std::mutex rng_mu_;
  std::mt19937_64 rng_;

  mutable std::mutex mu_;
  std::map<std::string, std::unique_ptr<SessionState>> sessions_;
  std::map<std::string, JobRecord> jobs_;
  std::map<std::string, PostProcessor> postProcessors_;
  std::atomic<bool> stopped_{false};
};

/// Exposes a broker on /broker/... so out-of-process components can share it.
/// Consumed batches are MessagePack arrays of {offset, payload: bin}.
void mount_broker_routes(httplib::Server& server, MessageBus& bus);

/// HTTP + server-sent-events front of a Gateway.
///
///   POST /api/sessions              -> {clientId, outputTopic}
///   POST /api/jobs                  -> {processJobId}   (clientId in body or X-Client-Id)
///   GET  /api/jobs/{id}?clientId=   -> JobRecord
///   GET  /api/algorithms            -> [ids]
///   GET  /api/stream?clientId=      -> text/event-stream, one JobRecord per event
///   GET  /api/health                -> component status
class GatewayServer : public HttpService {
 public:
  using HealthProbe = std::function<nlohmann::json()>;

  GatewayServer(Gateway& gateway, HealthProbe health, MessageBus* exposedBroker = nullptr);

 protected:
  void on_stop() override;

 private:
  Gateway& gateway_;
  std::atomic<bool> stopping_{false};
};

}  // namespace qbridge::gateway
