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

#include "qbridge/remote.hpp"

#include <nlohmann/json.hpp>

namespace qbridge::remote {

using nlohmann::json;
using provider::ProviderError;

namespace {

std::unique_ptr<httplib::Client> client_for(const std::string& baseUrl, Millis readTimeout = Millis(10'000)) {
  auto client = std::make_unique<httplib::Client>(baseUrl);
  client->set_connection_timeout(std::chrono::seconds(5));
  client->set_read_timeout(std::chrono::duration_cast<std::chrono::seconds>(readTimeout) + std::chrono::seconds(5));
  return client;
}

json body_of(const httplib::Result& res) {
  if (res->body.empty()) return json::object();
  return json::parse(res->body, nullptr, false);
}

// ----- broker -----

BrokerError::Code broker_code(const std::string& name) {
  for (auto code : {BrokerError::Code::DuplicateTopic, BrokerError::Code::InvalidName, BrokerError::Code::UnknownTopic,
                    BrokerError::Code::OffsetRegression, BrokerError::Code::EmptyPayload}) {
    if (to_string(code) == name) return code;
  }
  return BrokerError::Code::Unavailable;
}

json broker_checked(const httplib::Result& res, const std::string& what) {
  if (!res) {
    throw BrokerError(BrokerError::Code::Unavailable, what + ": broker unreachable (" + httplib::to_string(res.error()) + ")");
  }
  auto body = body_of(res);
  if (res->status >= 300) {
    const auto code = body.is_object() ? body.value("error", "") : "";
    const auto message = body.is_object() ? body.value("message", res->body) : res->body;
    throw BrokerError(broker_code(code), message);
  }
  return body;
}

// ----- provider -----

ProviderError::Code provider_code(const std::string& name) {
  static const std::map<std::string, ProviderError::Code> kCodes = {
      {"UnknownDevice", ProviderError::Code::UnknownDevice},   {"CircuitTooWide", ProviderError::Code::CircuitTooWide},
      {"UnknownJob", ProviderError::Code::UnknownJob},         {"WaitTimeout", ProviderError::Code::WaitTimeout},
      {"NoEligibleDevice", ProviderError::Code::NoEligibleDevice}, {"InvalidFleet", ProviderError::Code::InvalidFleet},
  };
  auto it = kCodes.find(name);
  return it == kCodes.end() ? ProviderError::Code::Unavailable : it->second;
}

std::string_view provider_code_name(ProviderError::Code code) {
  switch (code) {
    case ProviderError::Code::UnknownDevice: return "UnknownDevice";
    case ProviderError::Code::CircuitTooWide: return "CircuitTooWide";
    case ProviderError::Code::UnknownJob: return "UnknownJob";
    case ProviderError::Code::WaitTimeout: return "WaitTimeout";
    case ProviderError::Code::NoEligibleDevice: return "NoEligibleDevice";
    case ProviderError::Code::InvalidFleet: return "InvalidFleet";
    case ProviderError::Code::Unavailable: return "Unavailable";
  }
  return "Unavailable";
}

int provider_status(ProviderError::Code code) {
  switch (code) {
    case ProviderError::Code::UnknownDevice:
    case ProviderError::Code::UnknownJob: return 404;
    case ProviderError::Code::WaitTimeout: return 408;
    case ProviderError::Code::Unavailable: return 503;
    default: return 422;
  }
}

json provider_checked(const httplib::Result& res, const std::string& what) {
  if (!res) {
    throw ProviderError(ProviderError::Code::Unavailable,
                        what + ": provider unreachable (" + httplib::to_string(res.error()) + ")");
  }
  auto body = body_of(res);
  if (res->status >= 300) {
    const auto code = body.is_object() ? body.value("error", "") : "";
    const auto message = body.is_object() ? body.value("message", res->body) : res->body;
    throw ProviderError(provider_code(code), message);
  }
  return body;
}

void reply(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

}  // namespace

HttpBrokerClient::HttpBrokerClient(std::string baseUrl) : baseUrl_(std::move(baseUrl)) {}

void HttpBrokerClient::create_topic(const std::string& name) {
  auto c = client_for(baseUrl_);
  broker_checked(c->Post("/broker/topics", json{{"name", name}}.dump(), "application/json"), "create_topic");
}

bool HttpBrokerClient::has_topic(const std::string& name) {
  auto c = client_for(baseUrl_);
  auto res = c->Get("/broker/topics/" + name);
  if (res && res->status == 404) return false;
  broker_checked(res, "has_topic");
  return true;
}

std::int64_t HttpBrokerClient::produce(const std::string& topic, std::string payload) {
  auto c = client_for(baseUrl_);
  auto body = broker_checked(c->Post("/broker/topics/" + topic + "/messages", payload, "application/json"), "produce");
  return body.at("offset").get<std::int64_t>();
}

std::vector<Message> HttpBrokerClient::consume(const Subscription& sub, std::size_t maxMessages, Millis timeout) {
  auto c = client_for(baseUrl_, timeout);
  httplib::Params params{{"group", sub.group},
                         {"max", std::to_string(maxMessages)},
                         {"timeoutMs", std::to_string(timeout.count())}};
  auto res = c->Get("/broker/topics/" + sub.topic + "/messages", params, httplib::Headers{});
  if (!res || res->status >= 300) broker_checked(res, "consume");
  // MessagePack keeps payloads byte-exact; JSON strings would require UTF-8.
  const auto body = json::from_msgpack(res->body, true, false);
  if (!body.is_array()) throw BrokerError(BrokerError::Code::Unavailable, "consume: unreadable response");
  std::vector<Message> out;
  for (const auto& m : body) {
    const auto& bytes = m.at("payload").get_binary();
    out.push_back(Message{m.at("offset").get<std::int64_t>(), std::string(bytes.begin(), bytes.end()),
                          std::chrono::steady_clock::now()});
  }
  return out;
}

void HttpBrokerClient::commit(const Subscription& sub, std::int64_t offset) {
  auto c = client_for(baseUrl_);
  broker_checked(c->Post("/broker/topics/" + sub.topic + "/commit", json{{"group", sub.group}, {"offset", offset}}.dump(),
                         "application/json"),
                 "commit");
}

std::int64_t HttpBrokerClient::committed_offset(const Subscription& sub) {
  auto c = client_for(baseUrl_);
  httplib::Params params{{"group", sub.group}};
  auto body = broker_checked(c->Get("/broker/topics/" + sub.topic + "/committed", params, httplib::Headers{}),
                             "committed_offset");
  return body.at("offset").get<std::int64_t>();
}

ProviderServer::ProviderServer(provider::QuantumProvider& provider) {
  auto guarded = [](auto&& body) {
    return [body](const httplib::Request& req, httplib::Response& res) {
      try {
        body(req, res);
      } catch (const ProviderError& e) {
        reply(res, provider_status(e.code()), json{{"error", provider_code_name(e.code())}, {"message", e.what()}});
      } catch (const std::exception& e) {
        reply(res, 400, json{{"error", "BadRequest"}, {"message", e.what()}});
      }
    };
  };
  auto& srv = server();
  srv.Get("/devices", guarded([&provider](const httplib::Request&, httplib::Response& res) {
            reply(res, 200, provider.devices());
          }));
  srv.Post("/jobs", guarded([&provider](const httplib::Request& req, httplib::Response& res) {
             const auto body = json::parse(req.body);
             std::optional<qsim::NoiseModel> noise;
             if (body.contains("appliedReadoutFlipProb")) {
               noise = qsim::NoiseModel{body["appliedReadoutFlipProb"].get<double>()};
             }
             const auto id = provider.submit(body.at("deviceName").get<std::string>(),
                                             body.at("circuit").get<qsim::CircuitSpec>(),
                                             body.at("shots").get<std::int64_t>(), noise);
             reply(res, 201, json{{"providerJobId", id}});
           }));
  srv.Get(R"(/jobs/([^/]+))", guarded([&provider](const httplib::Request& req, httplib::Response& res) {
            reply(res, 200, provider.get_job(req.matches[1]));
          }));
  srv.Get(R"(/jobs/([^/]+)/queue_info)", guarded([&provider](const httplib::Request& req, httplib::Response& res) {
            const auto estimate = provider.queue_info(req.matches[1]);
            reply(res, 200,
                  estimate ? json{{"estimatedCompletionAt", format_timestamp(*estimate)}} : json::object());
          }));
  srv.Get(R"(/jobs/([^/]+)/result)", guarded([&provider](const httplib::Request& req, httplib::Response& res) {
            const Millis timeout(std::stol(req.has_param("timeoutMs") ? req.get_param_value("timeoutMs") : "0"));
            reply(res, 200, provider.wait_for_result(req.matches[1], timeout));
          }));
  srv.Delete(R"(/jobs/([^/]+))", guarded([&provider](const httplib::Request& req, httplib::Response& res) {
               const auto outcome = provider.cancel(req.matches[1]);
               reply(res, 200,
                     json{{"outcome", outcome == provider::CancelOutcome::Cancelled ? "CANCELLED" : "ALREADY_STARTED"}});
             }));
}

HttpProviderClient::HttpProviderClient(std::string baseUrl) : baseUrl_(std::move(baseUrl)) {}

std::vector<provider::Device> HttpProviderClient::devices() {
  auto c = client_for(baseUrl_);
  return provider_checked(c->Get("/devices"), "devices").get<std::vector<provider::Device>>();
}

std::string HttpProviderClient::submit(const std::string& deviceName, const qsim::CircuitSpec& circuit,
                                       std::int64_t shots, std::optional<qsim::NoiseModel> appliedNoise) {
  json body{{"deviceName", deviceName}, {"circuit", circuit}, {"shots", shots}};
  if (appliedNoise) body["appliedReadoutFlipProb"] = appliedNoise->readoutFlipProb;
  auto c = client_for(baseUrl_);
  return provider_checked(c->Post("/jobs", body.dump(), "application/json"), "submit")
      .at("providerJobId")
      .get<std::string>();
}

provider::JobState HttpProviderClient::job_status(const std::string& providerJobId) {
  return get_job(providerJobId).state;
}

std::optional<TimePoint> HttpProviderClient::queue_info(const std::string& providerJobId) {
  auto c = client_for(baseUrl_);
  const auto body = provider_checked(c->Get("/jobs/" + providerJobId + "/queue_info"), "queue_info");
  if (!body.contains("estimatedCompletionAt")) return std::nullopt;
  return parse_timestamp(body["estimatedCompletionAt"].get<std::string>());
}

provider::ProviderJob HttpProviderClient::wait_for_result(const std::string& providerJobId, Millis timeout) {
  auto c = client_for(baseUrl_, timeout);
  httplib::Params params{{"timeoutMs", std::to_string(timeout.count())}};
  return provider_checked(c->Get("/jobs/" + providerJobId + "/result", params, httplib::Headers{}), "wait_for_result")
      .get<provider::ProviderJob>();
}

provider::CancelOutcome HttpProviderClient::cancel(const std::string& providerJobId) {
  auto c = client_for(baseUrl_);
  const auto body = provider_checked(c->Delete("/jobs/" + providerJobId), "cancel");
  return body.value("outcome", "") == "CANCELLED" ? provider::CancelOutcome::Cancelled
                                                  : provider::CancelOutcome::AlreadyStarted;
}

provider::ProviderJob HttpProviderClient::get_job(const std::string& providerJobId) {
  auto c = client_for(baseUrl_);
  return provider_checked(c->Get("/jobs/" + providerJobId), "get_job").get<provider::ProviderJob>();
}

}  // namespace qbridge::remote
