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
#include <filesystem>
#include <memory>
#include <set>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

#include "qbridge/broker.hpp"
#include "qbridge/collector.hpp"
#include "qbridge/config_store.hpp"
#include "qbridge/functions.hpp"
#include "qbridge/gateway.hpp"
#include "qbridge/provider.hpp"
#include "qbridge/remote.hpp"

namespace qbridge::cli {

/// Expanded in the dispatch config file to the functions service base URL.
inline constexpr std::string_view kFunctionsUrlVar = "${FUNCTIONS_URL}";

enum class Component { Gateway, Provider, Functions, Collector };

std::string_view to_string(Component c);
Component component_from_string(std::string_view text);

class StackConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct StackConfig {
  std::filesystem::path configPath;
  std::filesystem::path fleetPath;  // empty: built-in default fleet
  std::string host = "127.0.0.1";
  int gatewayPort = 8080;
  int functionsPort = 8081;
  int providerPort = 8082;
  collector::CollectorConfig collector;
  std::uint64_t seed = 0;
  std::string functionToken = "qbridge-dev-token";
  std::string inputTopic = "qbridge-in";
  /// Route every inter-component call over HTTP even when co-hosted.
  bool detachedServices = false;
  std::set<Component> components{Component::Gateway, Component::Provider, Component::Functions, Component::Collector};
  /// Base URLs for components hosted elsewhere; default to host:port.
  std::string gatewayUrl;
  std::string providerUrl;
  std::string functionsUrl;

  /// Ports distinct (0 = pick a free one), referenced files present, collector settings positive.
  void validate() const;
};

/// Wires broker, provider (+device workers), functions, gateway and collector.
class Stack {
 public:
  explicit Stack(StackConfig config);
  ~Stack();
  Stack(const Stack&) = delete;
  Stack& operator=(const Stack&) = delete;

  void start();
  void stop();

  /// Component -> "up"/"down"/"remote".
  nlohmann::json health();

  std::string gateway_url() const;
  std::string functions_url() const;
  std::string provider_url() const;

  // Hosted components; null when the component runs elsewhere.
  Broker* broker() { return broker_.get(); }
  provider::Provider* provider() { return provider_.get(); }
  functions::FunctionRuntime* functions() { return functions_.get(); }
  gateway::Gateway* gateway() { return gateway_.get(); }
  collector::Collector* collector() { return collector_.get(); }
  config::ConfigStore* config_store() { return configStore_.get(); }
  MessageBus& bus();

  const StackConfig& config() const noexcept { return config_; }

 private:
  bool hosts(Component c) const { return config_.components.count(c) != 0; }
  provider::QuantumProvider& provider_handle();

  StackConfig config_;

  std::unique_ptr<Broker> broker_;
  std::unique_ptr<remote::HttpBrokerClient> remoteBus_;
  std::unique_ptr<provider::Provider> provider_;
  std::unique_ptr<remote::HttpProviderClient> remoteProvider_;
  std::unique_ptr<remote::ProviderServer> providerServer_;
  std::unique_ptr<functions::FunctionRuntime> functions_;
  std::unique_ptr<functions::FunctionServer> functionServer_;
  std::unique_ptr<config::ConfigStore> configStore_;
  std::unique_ptr<gateway::HttpFunctionInvoker> invoker_;
  std::unique_ptr<gateway::Gateway> gateway_;
  std::unique_ptr<gateway::GatewayServer> gatewayServer_;
  std::unique_ptr<collector::Collector> collector_;
  bool started_ = false;
};

}  // namespace qbridge::cli
