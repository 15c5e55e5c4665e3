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

// qbridge: boot the stack, submit a superposition job, or drive a load test.
//
//   qbridge run-all --config config/functions.json
//   qbridge serve provider --provider-port 9002
//   qbridge submit ';)' ';(' --backend NOISELESS_SIM --shots 1024
//   qbridge loadgen --clients 5 --jobs 4

#include <algorithm>
#include <csignal>
#include <cstdio>
#include <iostream>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "qbridge/client.hpp"
#include "qbridge/stack.hpp"

namespace {

using qbridge::Millis;
using nlohmann::json;

enum Exit : int { kOk = 0, kUsage = 1, kConfig = 2, kRuntime = 3 };

constexpr std::size_t kShownOutcomes = 8;

struct StackFlags {
  std::string config;
  std::string fleet;
  int gatewayPort = 8080;
  int functionsPort = 8081;
  int providerPort = 8082;
  double thresholdSec = 30.0;
  int workers = 4;
  int maxAttempts = 100;
  std::uint64_t seed = 0;
  bool detached = false;
  std::string gatewayUrl;
  std::string providerUrl;
  std::string functionsUrl;
  std::vector<std::string> components;
};

void add_stack_flags(CLI::App* cmd, StackFlags& f) {
  cmd->add_option("--config", f.config, "function dispatch config file");
  cmd->add_option("--fleet", f.fleet, "provider device fleet file (default: built-in fleet)");
  cmd->add_option("--gateway-port", f.gatewayPort, "gateway HTTP port (0 = any free port)");
  cmd->add_option("--functions-port", f.functionsPort, "functions HTTP port (0 = any free port)");
  cmd->add_option("--provider-port", f.providerPort, "provider HTTP port (0 = any free port)");
  cmd->add_option("--threshold", f.thresholdSec, "collector wait threshold in seconds");
  cmd->add_option("--workers", f.workers, "collector poll workers");
  cmd->add_option("--max-attempts", f.maxAttempts, "collector re-enqueue budget per job");
  cmd->add_option("--seed", f.seed, "seed for ids, topics and shot sampling");
  cmd->add_flag("--detached-services", f.detached, "route all inter-component calls over HTTP");
}

qbridge::cli::StackConfig to_stack_config(const StackFlags& f) {
  qbridge::cli::StackConfig cfg;
  cfg.configPath = f.config;
  cfg.fleetPath = f.fleet;
  cfg.gatewayPort = f.gatewayPort;
  cfg.functionsPort = f.functionsPort;
  cfg.providerPort = f.providerPort;
  cfg.collector.waitThreshold = std::chrono::duration_cast<Millis>(std::chrono::duration<double>(f.thresholdSec));
  cfg.collector.workerCount = f.workers;
  cfg.collector.maxAttempts = f.maxAttempts;
  cfg.seed = f.seed;
  cfg.detachedServices = f.detached;
  cfg.gatewayUrl = f.gatewayUrl;
  cfg.providerUrl = f.providerUrl;
  cfg.functionsUrl = f.functionsUrl;
  if (!f.components.empty()) {
    cfg.components.clear();
    for (const auto& c : f.components) cfg.components.insert(qbridge::cli::component_from_string(c));
  }
  return cfg;
}

int serve(const StackFlags& flags) {
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  // Block before any thread starts so every thread inherits the mask.
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  std::unique_ptr<qbridge::cli::Stack> stack;
  try {
    stack = std::make_unique<qbridge::cli::Stack>(to_stack_config(flags));
  } catch (const std::exception& e) {
    std::cerr << "qbridge: " << e.what() << "\n";
    return kConfig;
  }
  try {
    stack->start();
  } catch (const qbridge::config::ConfigError& e) {
    std::cerr << "qbridge: config: " << e.what() << "\n";
    return kConfig;
  } catch (const qbridge::provider::ProviderError& e) {
    std::cerr << "qbridge: fleet: " << e.what() << "\n";
    return e.code() == qbridge::provider::ProviderError::Code::InvalidFleet ? kConfig : kRuntime;
  } catch (const std::exception& e) {
    std::cerr << "qbridge: " << e.what() << "\n";
    return kRuntime;
  }

  std::string line = "qbridge ready";
  const auto& hosted = stack->config().components;
  using qbridge::cli::Component;
  if (hosted.count(Component::Gateway)) line += " gateway=" + stack->gateway_url();
  if (hosted.count(Component::Functions)) line += " functions=" + stack->functions_url();
  if (hosted.count(Component::Provider)) line += " provider=" + stack->provider_url();
  if (hosted.count(Component::Collector)) line += " collector=up";
  std::cout << line << std::endl;

  int sig = 0;
  sigwait(&signals, &sig);
  spdlog::info("received signal {}, shutting down", sig);
  stack->stop();
  return kOk;
}

bool is_two_characters(const std::string& text) {
  try {
    qbridge::qsim::encode_emoticon(text);
    return true;
  } catch (const qbridge::qsim::EmoticonError& e) {
    // Characters outside the 8-bit range are still two characters; the function reports them.
    return e.code() == qbridge::qsim::EmoticonError::Code::NonEncodableCharacter;
  }
}

struct SubmitFlags {
  std::string gatewayUrl = "http://127.0.0.1:8080";
  std::string emoticonA;
  std::string emoticonB;
  std::string backend = "NOISELESS_SIM";
  std::int64_t shots = qbridge::functions::kDefaultShots;
  double timeoutSec = 120;
};

int submit(const SubmitFlags& f) {
  using namespace qbridge::client;
  for (const auto* text : {&f.emoticonA, &f.emoticonB}) {
    if (!is_two_characters(*text)) {
      std::cerr << "qbridge submit: emoticon '" << *text << "' must be exactly two characters\n";
      return kUsage;
    }
  }
  try {
    qbridge::backend_type_from_string(f.backend);
  } catch (const std::exception&) {
    std::cerr << "qbridge submit: --backend must be REAL, NOISELESS_SIM or NOISY_SIM\n";
    return kUsage;
  }
  try {
    GatewayClient gateway(f.gatewayUrl);
    const auto session = gateway.create_session();
    LiveStream stream(f.gatewayUrl, session.clientId);
    stream.wait_connected(Millis(5'000));
    const auto id = gateway.submit(session.clientId, "smile_super_position",
                                   json{{"emoticonA", f.emoticonA}, {"emoticonB", f.emoticonB}}, f.backend, f.shots);
    std::cout << "submitted " << id << " for client " << session.clientId << std::endl;
    const auto timeout = std::chrono::duration_cast<Millis>(std::chrono::duration<double>(f.timeoutSec));
    const auto record = await_job(gateway, &stream, session.clientId, id, timeout);
    if (!record) {
      std::cerr << "qbridge submit: no result within " << f.timeoutSec << " s\n";
      return kRuntime;
    }
    const auto& payload = record->value("resultPayload", json::object());
    if (record->value("status", "") != "DONE") {
      std::cerr << "qbridge submit: job failed: " << payload.value("errorMessage", "unknown error") << "\n";
      return kRuntime;
    }
    std::cout << "backend " << payload.value("backendName", "?") << "\n";
    std::vector<std::pair<std::int64_t, std::string>> ranked;
    const auto counts = payload.value("counts", json::object());
    for (const auto& [bits, n] : counts.items()) ranked.emplace_back(n.get<std::int64_t>(), bits);
    std::sort(ranked.rbegin(), ranked.rend());
    std::int64_t rest = 0;
    for (std::size_t i = 0; i < ranked.size(); ++i) {
      const auto& [n, bits] = ranked[i];
      if (i >= kShownOutcomes) {
        rest += n;
        continue;
      }
      std::string label = "?";
      try {
        label = qbridge::qsim::decode_emoticon(bits);
      } catch (const qbridge::qsim::EmoticonError&) {
      }
      std::printf("%s  %-4s %7.2f%%  (%lld)\n", bits.c_str(), label.c_str(), 100.0 * static_cast<double>(n) / static_cast<double>(f.shots),
                  static_cast<long long>(n));
    }
    if (rest > 0) {
      std::printf("%zu other outcomes %7.2f%%  (%lld)\n", ranked.size() - kShownOutcomes,
                  100.0 * static_cast<double>(rest) / static_cast<double>(f.shots), static_cast<long long>(rest));
    }
    return kOk;
  } catch (const ClientError& e) {
    std::cerr << "qbridge submit: " << e.what() << "\n";
    return e.status() >= 400 && e.status() < 500 && e.status() != 404 ? kUsage : kRuntime;
  } catch (const std::exception& e) {
    std::cerr << "qbridge submit: " << e.what() << "\n";
    return kRuntime;
  }
}

int loadgen(qbridge::client::LoadOptions options, double timeoutSec) {
  options.timeout = std::chrono::duration_cast<Millis>(std::chrono::duration<double>(timeoutSec));
  try {
    const auto report = qbridge::client::run_loadgen(options);
    std::cout << qbridge::client::format_report(report);
    return report.passed() ? kOk : kRuntime;
  } catch (const std::invalid_argument& e) {
    std::cerr << "qbridge loadgen: " << e.what() << "\n";
    return kUsage;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qbridge: serverless classical/quantum integration stack"};
  app.require_subcommand(1);
  std::string logLevel = "info";
  app.add_option("--log-level", logLevel, "trace, debug, info, warn, error, off");

  StackFlags runFlags;
  auto* runAll = app.add_subcommand("run-all", "run every component in this process");
  add_stack_flags(runAll, runFlags);

  StackFlags serveFlags;
  auto* serveCmd = app.add_subcommand("serve", "run selected components; the rest are reached over HTTP");
  add_stack_flags(serveCmd, serveFlags);
  serveCmd->add_option("components", serveFlags.components, "gateway, provider, functions, collector")->required();
  serveCmd->add_option("--gateway-url", serveFlags.gatewayUrl, "remote gateway (and broker) base URL");
  serveCmd->add_option("--provider-url", serveFlags.providerUrl, "remote provider base URL");
  serveCmd->add_option("--functions-url", serveFlags.functionsUrl, "remote functions base URL");

  SubmitFlags submitFlags;
  auto* submitCmd = app.add_subcommand("submit", "submit two emoticons and print the superposition result");
  submitCmd->add_option("emoticonA", submitFlags.emoticonA, "first two-character emoticon")->required();
  submitCmd->add_option("emoticonB", submitFlags.emoticonB, "second two-character emoticon")->required();
  submitCmd->add_option("--gateway-url", submitFlags.gatewayUrl, "gateway base URL");
  submitCmd->add_option("--backend", submitFlags.backend, "REAL, NOISELESS_SIM or NOISY_SIM");
  submitCmd->add_option("--shots", submitFlags.shots, "measurement shots")->check(CLI::PositiveNumber);
  submitCmd->add_option("--timeout", submitFlags.timeoutSec, "seconds to wait for the result");

  qbridge::client::LoadOptions loadOptions;
  loadOptions.gatewayUrl = "http://127.0.0.1:8080";
  double loadTimeoutSec = 60;
  auto* loadCmd = app.add_subcommand("loadgen", "run concurrent clients and verify result segregation");
  loadCmd->add_option("--gateway-url", loadOptions.gatewayUrl, "gateway base URL");
  loadCmd->add_option("--clients", loadOptions.clients, "concurrent clients")->check(CLI::PositiveNumber);
  loadCmd->add_option("--jobs", loadOptions.jobsPerClient, "jobs per client")->check(CLI::PositiveNumber);
  loadCmd->add_option("--backend", loadOptions.backendType, "REAL, NOISELESS_SIM or NOISY_SIM");
  loadCmd->add_option("--shots", loadOptions.shots, "measurement shots")->check(CLI::PositiveNumber);
  loadCmd->add_option("--timeout", loadTimeoutSec, "seconds to wait for all results");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }
  spdlog::set_level(spdlog::level::from_str(logLevel));

  if (*runAll) return serve(runFlags);
  if (*serveCmd) {
    try {
      for (const auto& c : serveFlags.components) qbridge::cli::component_from_string(c);
    } catch (const std::exception& e) {
      std::cerr << "qbridge serve: " << e.what() << "\n";
      return kUsage;
    }
    return serve(serveFlags);
  }
  if (*submitCmd) return submit(submitFlags);
  if (*loadCmd) return loadgen(loadOptions, loadTimeoutSec);
  return kUsage;
}
