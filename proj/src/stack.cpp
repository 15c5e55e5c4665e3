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

#include "qbridge/stack.hpp"

#include <spdlog/spdlog.h>

namespace qbridge::cli {

using nlohmann::json;

namespace {

std::string replace_all(std::string text, std::string_view from, std::string_view to) {
  for (auto pos = text.find(from); pos != std::string::npos; pos = text.find(from, pos + to.size())) {
    text.replace(pos, from.size(), to);
  }
  return text;
}

}  // namespace

std::string_view to_string(Component c) {
  switch (c) {
    case Component::Gateway: return "gateway";
    case Component::Provider: return "provider";
    case Component::Functions: return "functions";
    case Component::Collector: return "collector";
  }
  return "gateway";
}

Component component_from_string(std::string_view text) {
  for (auto c : {Component::Gateway, Component::Provider, Component::Functions, Component::Collector}) {
    if (to_string(c) == text) return c;
  }
  throw StackConfigError("unknown component '" + std::string(text) + "'");
}

void StackConfig::validate() const {
  std::set<int> ports;
  auto claim = [&](Component c, int port, const char* flag) {
    if (!components.count(c)) return;
    if (port < 0 || port > 65535) throw StackConfigError(std::string(flag) + " is out of range");
    if (port != 0 && !ports.insert(port).second) throw StackConfigError("ports must be distinct (" + std::string(flag) + ")");
  };
  claim(Component::Gateway, gatewayPort, "--gateway-port");
  claim(Component::Functions, functionsPort, "--functions-port");
  claim(Component::Provider, providerPort, "--provider-port");

  if (components.count(Component::Gateway)) {
    if (configPath.empty()) throw StackConfigError("--config is required to run the gateway");
    if (!std::filesystem::exists(configPath)) throw StackConfigError("config file not found: " + configPath.string());
  }
  if (components.count(Component::Provider) && !fleetPath.empty() && !std::filesystem::exists(fleetPath)) {
    throw StackConfigError("fleet file not found: " + fleetPath.string());
  }
  try {
    collector.validate();
  } catch (const std::invalid_argument& e) {
    throw StackConfigError(std::string("collector settings: ") + e.what());
  }
}

Stack::Stack(StackConfig config) : config_(std::move(config)) { config_.validate(); }

Stack::~Stack() { stop(); }

std::string Stack::gateway_url() const {
  if (gatewayServer_) return gatewayServer_->base_url();
  if (!config_.gatewayUrl.empty()) return config_.gatewayUrl;
  return "http://" + config_.host + ":" + std::to_string(config_.gatewayPort);
}

std::string Stack::functions_url() const {
  if (functionServer_) return functionServer_->base_url();
  if (!config_.functionsUrl.empty()) return config_.functionsUrl;
  return "http://" + config_.host + ":" + std::to_string(config_.functionsPort);
}

std::string Stack::provider_url() const {
  if (providerServer_) return providerServer_->base_url();
  if (!config_.providerUrl.empty()) return config_.providerUrl;
  return "http://" + config_.host + ":" + std::to_string(config_.providerPort);
}

MessageBus& Stack::bus() {
  if (broker_ && !config_.detachedServices) return *broker_;
  if (!remoteBus_) remoteBus_ = std::make_unique<remote::HttpBrokerClient>(gateway_url());
  return *remoteBus_;
}

provider::QuantumProvider& Stack::provider_handle() {
  if (provider_ && !config_.detachedServices) return *provider_;
  if (!remoteProvider_) remoteProvider_ = std::make_unique<remote::HttpProviderClient>(provider_url());
  return *remoteProvider_;
}

void Stack::start() {
  if (started_) return;
  started_ = true;
  try {
    if (hosts(Component::Gateway)) {
      broker_ = std::make_unique<Broker>();
      broker_->create_topic(config_.inputTopic);
    }

    if (hosts(Component::Provider)) {
      auto fleet = config_.fleetPath.empty() ? provider::default_fleet() : provider::load_fleet(config_.fleetPath);
      provider_ = std::make_unique<provider::Provider>(std::move(fleet), config_.seed);
      provider_->start();
      providerServer_ = std::make_unique<remote::ProviderServer>(*provider_);
      providerServer_->start(config_.host, config_.providerPort);
    }

    if (hosts(Component::Gateway)) {
      configStore_ = std::make_unique<config::ConfigStore>(config_.configPath, [this](std::string text) {
        return replace_all(std::move(text), kFunctionsUrlVar, functions_url());
      });
      invoker_ = std::make_unique<gateway::HttpFunctionInvoker>();
      gateway_ = std::make_unique<gateway::Gateway>(*configStore_, *broker_, *invoker_, config_.functionToken,
                                                    config_.seed ^ 0x5eed5eed5eed5eedULL);
      gateway_->register_post_processor(std::string(functions::kSmileSuperPosition), gateway::emoticon_frequencies);
      gatewayServer_ = std::make_unique<gateway::GatewayServer>(
          *gateway_, [this] { return health(); }, broker_.get());
      gatewayServer_->start(config_.host, config_.gatewayPort);
    }

    // After the gateway so that detached clients see its bound port.
    if (hosts(Component::Functions)) {
      functions_ = std::make_unique<functions::FunctionRuntime>(provider_handle(), bus(), config_.inputTopic,
                                                                config_.functionToken);
      functions_->register_algorithm(std::string(functions::kSmileSuperPosition),
                                     functions::smile_super_position_builder());
      functionServer_ = std::make_unique<functions::FunctionServer>(*functions_);
      functionServer_->start(config_.host, config_.functionsPort);
      if (configStore_) configStore_->reload();  // re-expands the functions URL
    }

    if (hosts(Component::Collector)) {
      collector_ = std::make_unique<collector::Collector>(bus(), provider_handle(), config_.inputTopic, config_.collector);
      collector_->start();
    }
  } catch (...) {
    stop();
    throw;
  }
}

void Stack::stop() {
  if (!started_) return;
  started_ = false;
  if (collector_) collector_->stop();
  if (gatewayServer_) gatewayServer_->stop();
  if (gateway_) gateway_->stop();
  if (functionServer_) functionServer_->stop();
  if (providerServer_) providerServer_->stop();
  if (provider_) provider_->stop();
}

json Stack::health() {
  json h = json::object();
  h["broker"] = broker_ ? "up" : "remote";
  h["gateway"] = gatewayServer_ ? "up" : "remote";
  h["provider"] = provider_ ? "up" : "remote";
  h["functions"] = functionServer_ ? "up" : "remote";
  h["collector"] = collector_ ? (collector_->running() ? "up" : "down") : "remote";
  return h;
}

}  // namespace qbridge::cli
