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

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <shared_mutex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "qbridge/broker.hpp"
#include "qbridge/http_service.hpp"
#include "qbridge/provider.hpp"
#include "qbridge/qsim.hpp"
#include "qbridge/wire.hpp"

namespace qbridge::functions {

class FunctionError : public std::runtime_error {
 public:
  enum class Code {
    Unauthorized,
    UnknownAlgorithm,
    DuplicateAlgorithm,
    BadRequest,
    BuildError,
    NoEligibleDevice,
    SubmitError,
    BrokerUnavailable,
  };

  FunctionError(Code code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Code code() const noexcept { return code_; }

 private:
  Code code_;
};

std::string_view to_string(FunctionError::Code code);
/// 401 / 404 / 422 / 502 by error class.
int http_status(FunctionError::Code code);

inline constexpr std::int64_t kDefaultShots = 1024;

struct ActionRequest {
  std::string algorithmId;
  nlohmann::json params = nlohmann::json::object();
  BackendType backendType = BackendType::NoiselessSim;
  std::string clientId;
  std::string processJobId;
  std::string outputTopic;
  std::int64_t shots = kDefaultShots;
};

/// HTTP body of POST /fn/{id}: every ActionRequest field except algorithmId.
nlohmann::json to_json(const ActionRequest& request);
ActionRequest parse_action_request(std::string algorithmId, std::string_view body);

struct ActionResponse {
  bool ok = false;
  std::optional<std::string> providerJobId;
  std::optional<std::string> backendName;
  std::optional<std::string> errorMessage;
  std::optional<FunctionError::Code> errorCode;  // not serialized; the HTTP status carries it

  static ActionResponse success(std::string providerJobId, std::string backendName);
  static ActionResponse failure(FunctionError::Code code, std::string message);
};

nlohmann::json to_json(const ActionResponse& response);
ActionResponse parse_action_response(std::string_view body);

/// Builds the circuit for one algorithm from its raw request parameters.
using CircuitBuilder = std::function<qsim::CircuitSpec(const nlohmann::json& params)>;

/// The emoticon demo: params {"emoticonA": "..", "emoticonB": ".."}.
CircuitBuilder smile_super_position_builder();
inline constexpr std::string_view kSmileSuperPosition = "smile_super_position";

struct BackendSelection {
  provider::Device device;
  std::optional<qsim::NoiseModel> appliedNoise;
};

/// REAL: least-busy real device fitting the circuit (its own noise applies on the device).
/// NOISELESS_SIM: the least-busy simulator, no noise.
/// NOISY_SIM: the simulator plus the readout profile of the least-busy real device.
BackendSelection select_backend(provider::QuantumProvider& provider, BackendType backendType, int requiredQubits);

/// Result of an HTTP-shaped call into the runtime.
struct HandlerResult {
  int status = 200;
  ActionResponse response;
};

/// Algorithm registry plus the action that turns a request into a provider job
/// and a SubmissionEvent. Handlers are stateless; the registry is read-mostly.
class FunctionRuntime {
 public:
  FunctionRuntime(provider::QuantumProvider& provider, MessageBus& bus, std::string inputTopic,
                  std::string bearerToken);

  void register_algorithm(const std::string& id, CircuitBuilder builder);
  bool has_algorithm(const std::string& id) const;
  std::vector<std::string> algorithms() const;

  /// Submits first, then publishes. A failed publish cancels the provider job
  /// (best effort) and reports BrokerUnavailable.
  ActionResponse invoke(const ActionRequest& request);

  /// Authorization check, body parsing and invoke, mapped to an HTTP status.
  HandlerResult handle(const std::string& algorithmId, std::string_view authorization, std::string_view body);

  const std::string& input_topic() const noexcept { return inputTopic_; }

 private:
  provider::QuantumProvider& provider_;
  MessageBus& bus_;
  std::string inputTopic_;
  std::string bearerToken_;
  mutable std::shared_mutex registry_mu_;
  std::map<std::string, CircuitBuilder> registry_;
};

/// POST /fn/{algorithmId} over HTTP.
class FunctionServer : public HttpService {
 public:
  explicit FunctionServer(FunctionRuntime& runtime);
};

}  // namespace qbridge::functions
