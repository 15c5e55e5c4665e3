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

#include "qbridge/functions.hpp"

#include <algorithm>
#include <mutex>

#include <spdlog/spdlog.h>

namespace qbridge::functions {

using nlohmann::json;

std::string_view to_string(FunctionError::Code code) {
  switch (code) {
    case FunctionError::Code::Unauthorized: return "Unauthorized";
    case FunctionError::Code::UnknownAlgorithm: return "UnknownAlgorithm";
    case FunctionError::Code::DuplicateAlgorithm: return "DuplicateAlgorithm";
    case FunctionError::Code::BadRequest: return "BadRequest";
    case FunctionError::Code::BuildError: return "BuildError";
    case FunctionError::Code::NoEligibleDevice: return "NoEligibleDevice";
    case FunctionError::Code::SubmitError: return "SubmitError";
    case FunctionError::Code::BrokerUnavailable: return "BrokerUnavailable";
  }
  return "Unknown";
}

int http_status(FunctionError::Code code) {
  switch (code) {
    case FunctionError::Code::Unauthorized: return 401;
    case FunctionError::Code::UnknownAlgorithm: return 404;
    case FunctionError::Code::DuplicateAlgorithm:
    case FunctionError::Code::BadRequest:
    case FunctionError::Code::BuildError:
    case FunctionError::Code::NoEligibleDevice: return 422;
    case FunctionError::Code::SubmitError:
    case FunctionError::Code::BrokerUnavailable: return 502;
  }
  return 500;
}

json to_json(const ActionRequest& r) {
  return json{{"params", r.params},
              {"backendType", to_string(r.backendType)},
              {"clientId", r.clientId},
              {"processJobId", r.processJobId},
              {"outputTopic", r.outputTopic},
              {"shots", r.shots}};
}

ActionRequest parse_action_request(std::string algorithmId, std::string_view body) {
  auto bad = [](const std::string& why) { return FunctionError(FunctionError::Code::BadRequest, why); };
  json doc = json::parse(body, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) throw bad("request body must be a JSON object");

  ActionRequest r;
  r.algorithmId = std::move(algorithmId);
  if (doc.contains("params")) {
    if (!doc["params"].is_object()) throw bad("'params' must be an object");
    r.params = doc["params"];
  }
  for (auto [field, slot] : {std::pair{"clientId", &r.clientId}, std::pair{"processJobId", &r.processJobId},
                             std::pair{"outputTopic", &r.outputTopic}}) {
    auto it = doc.find(field);
    if (it == doc.end() || !it->is_string() || it->get_ref<const std::string&>().empty()) {
      throw bad(std::string("'") + field + "' must be a non-empty string");
    }
    *slot = it->get<std::string>();
  }
  auto bt = doc.find("backendType");
  if (bt == doc.end() || !bt->is_string()) throw bad("'backendType' must be a string");
  try {
    r.backendType = backend_type_from_string(bt->get<std::string>());
  } catch (const WireError& e) {
    throw bad(e.what());
  }
  if (doc.contains("shots")) {
    if (!doc["shots"].is_number_integer() || doc["shots"].get<std::int64_t>() < 1) {
      throw bad("'shots' must be a positive integer");
    }
    r.shots = doc["shots"].get<std::int64_t>();
  }
  return r;
}

ActionResponse ActionResponse::success(std::string providerJobId, std::string backendName) {
  ActionResponse r;
  r.ok = true;
  r.providerJobId = std::move(providerJobId);
  r.backendName = std::move(backendName);
  return r;
}

ActionResponse ActionResponse::failure(FunctionError::Code code, std::string message) {
  ActionResponse r;
  r.ok = false;
  r.errorMessage = std::move(message);
  r.errorCode = code;
  return r;
}

json to_json(const ActionResponse& r) {
  json j{{"ok", r.ok}};
  if (r.ok) {
    j["providerJobId"] = r.providerJobId.value_or("");
    j["backendName"] = r.backendName.value_or("");
  } else {
    j["errorMessage"] = r.errorMessage.value_or("");
  }
  return j;
}

ActionResponse parse_action_response(std::string_view body) {
  json doc = json::parse(body, nullptr, false);
  if (doc.is_discarded() || !doc.is_object() || !doc.contains("ok") || !doc["ok"].is_boolean()) {
    throw WireError("action response is not a valid JSON object");
  }
  ActionResponse r;
  r.ok = doc["ok"].get<bool>();
  if (r.ok) {
    r.providerJobId = doc.value("providerJobId", "");
    r.backendName = doc.value("backendName", "");
  } else {
    r.errorMessage = doc.value("errorMessage", "");
  }
  return r;
}

CircuitBuilder smile_super_position_builder() {
  return [](const json& params) {
    auto text = [&](const char* key) {
      auto it = params.find(key);
      if (it == params.end() || !it->is_string()) {
        throw FunctionError(FunctionError::Code::BuildError, std::string("parameter '") + key + "' must be a string");
      }
      return it->get<std::string>();
    };
    const std::string a = qsim::encode_emoticon(text("emoticonA"));
    const std::string b = qsim::encode_emoticon(text("emoticonB"));
    return qsim::build_superposition_circuit(a, b);
  };
}

BackendSelection select_backend(provider::QuantumProvider& provider, BackendType backendType, int requiredQubits) {
  const auto fleet = provider.devices();
  std::vector<provider::Device> simulators;
  std::copy_if(fleet.begin(), fleet.end(), std::back_inserter(simulators),
               [](const provider::Device& d) { return d.isSimulator; });
  try {
    switch (backendType) {
      case BackendType::Real:
        return {provider::least_busy(fleet, requiredQubits, /*realOnly=*/true), std::nullopt};
      case BackendType::NoiselessSim:
        return {provider::least_busy(simulators, requiredQubits, false), std::nullopt};
      case BackendType::NoisySim: {
        const auto sim = provider::least_busy(simulators, requiredQubits, false);
        // Readout noise is per bit, so any real device's profile applies regardless of its width.
        const auto donor = provider::least_busy(fleet, 0, /*realOnly=*/true);
        return {sim, donor.noiseProfile};
      }
    }
  } catch (const provider::ProviderError& e) {
    throw FunctionError(FunctionError::Code::NoEligibleDevice, e.what());
  }
  throw FunctionError(FunctionError::Code::NoEligibleDevice, "unsupported backend type");
}

FunctionRuntime::FunctionRuntime(provider::QuantumProvider& provider, MessageBus& bus, std::string inputTopic,
                                 std::string bearerToken)
    : provider_(provider), bus_(bus), inputTopic_(std::move(inputTopic)), bearerToken_(std::move(bearerToken)) {}

void FunctionRuntime::register_algorithm(const std::string& id, CircuitBuilder builder) {
  std::unique_lock lock(registry_mu_);
  if (!registry_.emplace(id, std::move(builder)).second) {
    throw FunctionError(FunctionError::Code::DuplicateAlgorithm, "algorithm '" + id + "' is already registered");
  }
}

bool FunctionRuntime::has_algorithm(const std::string& id) const {
  std::shared_lock lock(registry_mu_);
  return registry_.count(id) != 0;
}

std::vector<std::string> FunctionRuntime::algorithms() const {
  std::shared_lock lock(registry_mu_);
  std::vector<std::string> ids;
  for (const auto& [id, _] : registry_) ids.push_back(id);
  return ids;
}

ActionResponse FunctionRuntime::invoke(const ActionRequest& request) {
  using Code = FunctionError::Code;
  CircuitBuilder builder;
  {
    std::shared_lock lock(registry_mu_);
    auto it = registry_.find(request.algorithmId);
    if (it == registry_.end()) {
      return ActionResponse::failure(Code::UnknownAlgorithm, "unknown algorithm '" + request.algorithmId + "'");
    }
    builder = it->second;
  }
  if (request.clientId.empty() || request.processJobId.empty() || request.outputTopic.empty()) {
    return ActionResponse::failure(Code::BadRequest, "clientId, processJobId and outputTopic are required");
  }
  if (request.shots < 1) return ActionResponse::failure(Code::BadRequest, "shots must be >= 1");

  qsim::CircuitSpec circuit;
  try {
    circuit = builder(request.params);
    qsim::validate(circuit);
  } catch (const FunctionError& e) {
    return ActionResponse::failure(Code::BuildError, e.what());
  } catch (const std::exception& e) {
    return ActionResponse::failure(Code::BuildError, std::string("cannot build circuit: ") + e.what());
  }

  BackendSelection selection;
  try {
    selection = select_backend(provider_, request.backendType, circuit.numQubits);
  } catch (const FunctionError& e) {
    return ActionResponse::failure(e.code(), e.what());
  } catch (const std::exception& e) {
    return ActionResponse::failure(Code::SubmitError, std::string("provider unavailable: ") + e.what());
  }

  std::string providerJobId;
  try {
    providerJobId = provider_.submit(selection.device.name, circuit, request.shots, selection.appliedNoise);
  } catch (const std::exception& e) {
    return ActionResponse::failure(Code::SubmitError, std::string("job submission failed: ") + e.what());
  }

  SubmissionEvent event;
  event.providerJobId = providerJobId;
  event.backendName = selection.device.name;
  event.backendType = request.backendType;
  event.clientId = request.clientId;
  event.processJobId = request.processJobId;
  event.outputTopic = request.outputTopic;
  event.submittedAt = wire_precision(Clock::now());
  event.attempt = 1;
  try {
    bus_.produce(inputTopic_, serialize(event));
  } catch (const std::exception& e) {
    try {
      provider_.cancel(providerJobId);
    } catch (const std::exception& cancelError) {
      spdlog::warn("functions: cancel of {} after failed publish also failed: {}", providerJobId, cancelError.what());
    }
    return ActionResponse::failure(Code::BrokerUnavailable, std::string("cannot publish submission: ") + e.what());
  }
  spdlog::debug("functions: {} -> {} on {} for {}/{}", request.algorithmId, providerJobId, selection.device.name,
                request.clientId, request.processJobId);
  return ActionResponse::success(providerJobId, selection.device.name);
}

HandlerResult FunctionRuntime::handle(const std::string& algorithmId, std::string_view authorization,
                                      std::string_view body) {
  auto fail = [](FunctionError::Code code, std::string msg) {
    return HandlerResult{http_status(code), ActionResponse::failure(code, std::move(msg))};
  };
  if (authorization != "Bearer " + bearerToken_ || bearerToken_.empty()) {
    return fail(FunctionError::Code::Unauthorized, "missing or invalid bearer token");
  }
  if (!has_algorithm(algorithmId)) {
    return fail(FunctionError::Code::UnknownAlgorithm, "unknown algorithm '" + algorithmId + "'");
  }
  ActionRequest request;
  try {
    request = parse_action_request(algorithmId, body);
  } catch (const FunctionError& e) {
    return fail(e.code(), e.what());
  }
  auto response = invoke(request);
  const int status = response.ok ? 200 : http_status(*response.errorCode);
  return {status, std::move(response)};
}

FunctionServer::FunctionServer(FunctionRuntime& runtime) {
  server().Post(R"(/fn/([^/]+))", [&runtime](const httplib::Request& req, httplib::Response& res) {
    const auto result = runtime.handle(req.matches[1], req.get_header_value("Authorization"), req.body);
    res.status = result.status;
    res.set_content(to_json(result.response).dump(), "application/json");
  });
}

}  // namespace qbridge::functions
