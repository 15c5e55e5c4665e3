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

// HTTP clients for running the broker and the provider out of process.

#pragma once

#include <memory>
#include <mutex>
#include <string>

#include <httplib.h>

#include "qbridge/broker.hpp"
#include "qbridge/http_service.hpp"
#include "qbridge/provider.hpp"

namespace qbridge::remote {

/// MessageBus over the gateway's /broker routes.
class HttpBrokerClient final : public MessageBus {
 public:
  explicit HttpBrokerClient(std::string baseUrl);

  void create_topic(const std::string& name) override;
  bool has_topic(const std::string& name) override;
  std::int64_t produce(const std::string& topic, std::string payload) override;
  std::vector<Message> consume(const Subscription& sub, std::size_t maxMessages, Millis timeout) override;
  void commit(const Subscription& sub, std::int64_t offset) override;
  std::int64_t committed_offset(const Subscription& sub) override;

 private:
  std::string baseUrl_;
};

/// Provider endpoints:
///   GET /devices, POST /jobs, GET /jobs/{id}, GET /jobs/{id}/queue_info,
///   GET /jobs/{id}/result?timeoutMs=, DELETE /jobs/{id}
class ProviderServer : public HttpService {
 public:
  explicit ProviderServer(provider::QuantumProvider& provider);
};

class HttpProviderClient final : public provider::QuantumProvider {
 public:
  explicit HttpProviderClient(std::string baseUrl);

  std::vector<provider::Device> devices() override;
  std::string submit(const std::string& deviceName, const qsim::CircuitSpec& circuit, std::int64_t shots,
                     std::optional<qsim::NoiseModel> appliedNoise = std::nullopt) override;
  provider::JobState job_status(const std::string& providerJobId) override;
  std::optional<TimePoint> queue_info(const std::string& providerJobId) override;
  provider::ProviderJob wait_for_result(const std::string& providerJobId, Millis timeout) override;
  provider::CancelOutcome cancel(const std::string& providerJobId) override;
  provider::ProviderJob get_job(const std::string& providerJobId) override;

 private:
  std::string baseUrl_;
};

}  // namespace qbridge::remote
