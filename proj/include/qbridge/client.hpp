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
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "qbridge/timeutil.hpp"

namespace qbridge::client {

/// Gateway call failure. status() is 0 when the gateway could not be reached.
class ClientError : public std::runtime_error {
 public:
  ClientError(int status, std::string code, const std::string& what)
      : std::runtime_error(what), status_(status), code_(std::move(code)) {}
  int status() const noexcept { return status_; }
  const std::string& code() const noexcept { return code_; }

 private:
  int status_;
  std::string code_;
};

struct Session {
  std::string clientId;
  std::string outputTopic;
};

/// Blocking wrapper over the gateway's /api routes.
class GatewayClient {
 public:
  explicit GatewayClient(std::string baseUrl);

  Session create_session();
  std::string submit(const std::string& clientId, const std::string& algorithmId, const nlohmann::json& params,
                     const std::string& backendType, std::int64_t shots);
  nlohmann::json get_job(const std::string& clientId, const std::string& processJobId);
  std::vector<std::string> algorithms();
  nlohmann::json health();

  const std::string& base_url() const noexcept { return baseUrl_; }

 private:
  std::string baseUrl_;
};

/// Reader for /api/stream on a background thread.
class LiveStream {
 public:
  LiveStream(std::string baseUrl, std::string clientId);
  ~LiveStream();
  LiveStream(const LiveStream&) = delete;
  LiveStream& operator=(const LiveStream&) = delete;

  /// True once the server greeting arrived.
  bool wait_connected(Millis timeout);
  /// Next JobRecord, or nullopt on timeout or after the stream ended.
  std::optional<nlohmann::json> next(Millis timeout);
  bool ended() const;
  void close();

 private:
  void run(std::string baseUrl, std::string clientId);
  void feed(std::string_view chunk);

  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::deque<nlohmann::json> records_;
  std::string buffer_;
  bool connected_ = false;
  bool ended_ = false;
  std::atomic<bool> stop_{false};
  std::thread thread_;
};

bool is_final_status(const nlohmann::json& record);

/// Waits for the job to leave PENDING: live channel first, polling GET /api/jobs
/// whenever the stream is missing or has ended. Returns nullopt on timeout.
std::optional<nlohmann::json> await_job(GatewayClient& gateway, LiveStream* stream, const std::string& clientId,
                                        const std::string& processJobId, Millis timeout);

struct LoadOptions {
  std::string gatewayUrl;
  int clients = 5;
  int jobsPerClient = 4;
  std::string algorithmId = "smile_super_position";
  nlohmann::json params = {{"emoticonA", ";)"}, {"emoticonB", ";("}};
  std::string backendType = "NOISELESS_SIM";
  std::int64_t shots = 1024;
  Millis timeout{60'000};
};

struct ClientReport {
  std::string clientId;
  int submitted = 0;
  int done = 0;
  int failed = 0;
  /// Records on this client's channel that belong to another client or to no job it submitted.
  int foreign = 0;
  std::vector<nlohmann::json> records;
  std::string error;
};

struct LoadReport {
  std::vector<ClientReport> clients;
  std::vector<double> latenciesMs;
  double elapsedMs = 0;
  int expected = 0;

  int submitted() const;
  int done() const;
  int failed() const;
  int foreign() const;
  bool segregated() const { return foreign() == 0; }
  bool complete() const { return done() == expected; }
  bool passed() const { return segregated() && complete(); }
  /// Nearest-rank percentile of latenciesMs, p in [0, 100].
  double percentile(double p) const;
};

LoadReport run_loadgen(const LoadOptions& options);
std::string format_report(const LoadReport& report);

}  // namespace qbridge::client
