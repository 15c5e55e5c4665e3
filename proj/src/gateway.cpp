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

#include "qbridge/gateway.hpp"

#include <cstdio>

#include <spdlog/spdlog.h>

#include "qbridge/functions.hpp"

namespace qbridge::gateway {

using nlohmann::json;

namespace {

constexpr Millis kConsumeSlice{100};

}  // namespace

std::string_view to_string(GatewayError::Code code) {
  switch (code) {
    case GatewayError::Code::BadRequest: return "BadRequest";
    case GatewayError::Code::UnknownSession: return "UnknownSession";
    case GatewayError::Code::UnknownAlgorithm: return "UnknownAlgorithm";
    case GatewayError::Code::FunctionUnreachable: return "FunctionUnreachable";
    case GatewayError::Code::FunctionRejected: return "FunctionRejected";
    case GatewayError::Code::UnknownJob: return "UnknownJob";
    case GatewayError::Code::WrongClient: return "WrongClient";
    case GatewayError::Code::BrokerFailure: return "BrokerFailure";
  }
  return "Unknown";
}

int http_status(GatewayError::Code code) {
  switch (code) {
    case GatewayError::Code::BadRequest: return 400;
    case GatewayError::Code::UnknownSession: return 404;
    case GatewayError::Code::UnknownAlgorithm: return 404;
    case GatewayError::Code::FunctionUnreachable: return 502;
    case GatewayError::Code::FunctionRejected: return 422;
    case GatewayError::Code::UnknownJob: return 404;
    case GatewayError::Code::WrongClient: return 403;
    case GatewayError::Code::BrokerFailure: return 503;
  }
  return 500;
}

std::string_view to_string(JobStatus status) {
  switch (status) {
    case JobStatus::Pending: return "PENDING";
    case JobStatus::Done: return "DONE";
    case JobStatus::Error: return "ERROR";
  }
  return "ERROR";
}

json to_json(const JobRecord& r) {
  json j{{"processJobId", r.processJobId},
         {"clientId", r.clientId},
         {"algorithmId", r.algorithmId},
         {"status", to_string(r.status)},
         {"submittedAt", format_timestamp(r.submittedAt)}};
  if (r.resultPayload) j["resultPayload"] = *r.resultPayload;
  if (r.completedAt) j["completedAt"] = format_timestamp(*r.completedAt);
  return j;
}

HttpReply HttpFunctionInvoker::invoke(const config::InvocationRequest& request) {
  const auto scheme_end = request.url.find("://");
  const auto path_start = request.url.find('/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
  const std::string origin = request.url.substr(0, path_start);
  const std::string path = path_start == std::string::npos ? "/" : request.url.substr(path_start);

  httplib::Client client(origin);
  client.set_connection_timeout(timeout_);
  client.set_read_timeout(timeout_);
  httplib::Headers headers;
  std::string content_type = "application/json";
  for (const auto& [k, v] : request.headers) {
    if (k == "Content-Type") {
      content_type = v;
    } else {
      headers.emplace(k, v);
    }
  }
  auto res = client.Post(path, headers, request.body, content_type);
  if (!res) {
    throw GatewayError(GatewayError::Code::FunctionUnreachable,
                       "function endpoint " + request.url + " unreachable: " + httplib::to_string(res.error()));
  }
  return {res->status, res->body};
}

json bitstring_frequencies(const qsim::Counts& counts) {
  std::int64_t total = 0;
  for (const auto& [_, n] : counts) total += n;
  json freq = json::object();
  for (const auto& [key, n] : counts) freq[key] = total ? static_cast<double>(n) / static_cast<double>(total) : 0.0;
  return freq;
}

json emoticon_frequencies(const qsim::Counts& counts) {
  qsim::Counts decodable;
  std::int64_t total = 0;
  std::int64_t undecodable = 0;
  for (const auto& [key, n] : counts) {
    total += n;
    try {
      qsim::decode_emoticon(key);
      decodable[key] = n;
    } catch (const qsim::EmoticonError&) {
      undecodable += n;
    }
  }
  json freq = json::object();
  if (total == 0) return freq;
  for (const auto& [key, n] : decodable) {
    const auto text = qsim::decode_emoticon(key);
    freq[text] = freq.value(text, 0.0) + static_cast<double>(n) / static_cast<double>(total);
  }
  if (undecodable) freq["undecodable"] = static_cast<double>(undecodable) / static_cast<double>(total);
  return freq;
}

void LiveSubscriber::push(std::string message) {
  {
    std::lock_guard lock(mu_);
    if (closed_) return;
    pending_.push_back(std::move(message));
  }
  cv_.notify_one();
}

std::optional<std::string> LiveSubscriber::pop(Millis timeout) {
  std::unique_lock lock(mu_);
  cv_.wait_for(lock, timeout, [&] { return closed_ || !pending_.empty(); });
  if (pending_.empty()) return std::nullopt;
  auto msg = std::move(pending_.front());
  pending_.pop_front();
  return msg;
}

void LiveSubscriber::close() {
  {
    std::lock_guard lock(mu_);
    closed_ = true;
  }
  cv_.notify_all();
}

bool LiveSubscriber::closed() const {
  std::lock_guard lock(mu_);
  return closed_;
}

Gateway::Gateway(config::ConfigStore& config, MessageBus& bus, FunctionInvoker& invoker, std::string functionToken,
                 std::uint64_t seed)
    : config_(config), bus_(bus), invoker_(invoker), functionToken_(std::move(functionToken)), rng_(seed) {}

Gateway::~Gateway() { stop(); }

void Gateway::stop() {
  if (stopped_.exchange(true)) return;
  std::vector<std::jthread> consumers;
  {
    std::lock_guard lock(mu_);
    for (auto& [_, state] : sessions_) {
      state->consumer.request_stop();
      consumers.push_back(std::move(state->consumer));
      for (auto& sub : state->subscribers) sub->close();
    }
  }
  consumers.clear();
}

void Gateway::register_post_processor(const std::string& algorithmId, PostProcessor processor) {
  std::lock_guard lock(mu_);
  postProcessors_[algorithmId] = std::move(processor);
}

std::string Gateway::random_hex(int digits) {
  std::lock_guard lock(rng_mu_);
  std::string out;
  static constexpr char kHex[] = "0123456789abcdef";
  for (int i = 0; i < digits; ++i) out.push_back(kHex[rng_() & 0xF]);
  return out;
}

std::string Gateway::new_uuid() {
  std::string hex = random_hex(32);
  hex[12] = '4';
  hex[16] = "89ab"[hex[16] % 4];
  return hex.substr(0, 8) + "-" + hex.substr(8, 4) + "-" + hex.substr(12, 4) + "-" + hex.substr(16, 4) + "-" +
         hex.substr(20);
}

ClientSession Gateway::create_session() {
  if (stopped_) throw GatewayError(GatewayError::Code::BrokerFailure, "gateway is shutting down");
  ClientSession session;
  session.createdAt = wire_precision(Clock::now());
  for (int attempt = 0;; ++attempt) {
    session.outputTopic = "topic-" + random_hex(8);
    try {
      bus_.create_topic(session.outputTopic);
      break;
    } catch (const BrokerError& e) {
      if (e.code() != BrokerError::Code::DuplicateTopic || attempt > 16) {
        throw GatewayError(GatewayError::Code::BrokerFailure, std::string("cannot create output topic: ") + e.what());
      }
    } catch (const std::exception& e) {
      throw GatewayError(GatewayError::Code::BrokerFailure, std::string("cannot create output topic: ") + e.what());
    }
  }
  session.clientId = new_uuid();

  auto state = std::make_unique<SessionState>();
  state->session = session;
  auto* raw = state.get();
  {
    std::lock_guard lock(mu_);
    sessions_.emplace(session.clientId, std::move(state));
    raw->consumer = std::jthread(
        [this, id = session.clientId, topic = session.outputTopic](std::stop_token st) {
          run_result_consumer(id, topic, st);
        });
  }
  spdlog::info("gateway: session {} listening on {}", session.clientId, session.outputTopic);
  return session;
}

std::optional<ClientSession> Gateway::find_session(const std::string& clientId) const {
  std::lock_guard lock(mu_);
  auto it = sessions_.find(clientId);
  if (it == sessions_.end()) return std::nullopt;
  return it->second->session;
}

std::vector<std::string> Gateway::algorithms() const {
  std::vector<std::string> ids;
  for (const auto& [id, _] : config_.snapshot()->records()) ids.push_back(id);
  return ids;
}

void Gateway::fail_record(const std::string& processJobId, const std::string& message) {
  std::lock_guard lock(mu_);
  auto it = jobs_.find(processJobId);
  if (it == jobs_.end() || it->second.status != JobStatus::Pending) return;
  it->second.status = JobStatus::Error;
  it->second.resultPayload = json{{"errorMessage", message}};
  it->second.completedAt = wire_precision(Clock::now());
}

std::string Gateway::handle_submit(const std::string& clientId, const std::string& algorithmId, const json& params,
                                   BackendType backendType, std::int64_t shots) {
  const auto session = find_session(clientId);
  if (!session) throw GatewayError(GatewayError::Code::UnknownSession, "unknown session '" + clientId + "'");
  if (shots < 1) throw GatewayError(GatewayError::Code::BadRequest, "shots must be >= 1");

  config::FunctionConfig cfg;
  try {
    cfg = config_.get(algorithmId);
  } catch (const config::ConfigError& e) {
    throw GatewayError(GatewayError::Code::UnknownAlgorithm, e.what());
  }

  const std::string processJobId = new_uuid();
  functions::ActionRequest action;
  action.algorithmId = algorithmId;
  action.params = params.is_null() ? json::object() : params;
  action.backendType = backendType;
  action.clientId = session->clientId;
  action.processJobId = processJobId;
  action.outputTopic = session->outputTopic;
  action.shots = shots;
  const auto invocation = config::render_invocation(cfg, functions::to_json(action).dump(), functionToken_);

  // The record exists before the call so that a fast result cannot overtake it.
  {
    std::lock_guard lock(mu_);
    jobs_[processJobId] = JobRecord{processJobId, clientId, algorithmId, JobStatus::Pending, std::nullopt,
                                    wire_precision(Clock::now()), std::nullopt};
  }

  HttpReply reply;
  try {
    reply = invoker_.invoke(invocation);
  } catch (const std::exception& e) {
    fail_record(processJobId, e.what());
    throw GatewayError(GatewayError::Code::FunctionUnreachable, e.what());
  }

  std::string message;
  try {
    const auto response = functions::parse_action_response(reply.body);
    if (response.ok && reply.status == 200) return processJobId;
    message = response.errorMessage.value_or("function returned HTTP " + std::to_string(reply.status));
  } catch (const WireError&) {
    message = "function returned HTTP " + std::to_string(reply.status) + " with an unreadable body";
  }
  fail_record(processJobId, message);
  throw GatewayError(GatewayError::Code::FunctionRejected, message);
}

JobRecord Gateway::get_job(const std::string& clientId, const std::string& processJobId) const {
  std::lock_guard lock(mu_);
  auto it = jobs_.find(processJobId);
  if (it == jobs_.end()) throw GatewayError(GatewayError::Code::UnknownJob, "unknown job '" + processJobId + "'");
  if (it->second.clientId != clientId) {
    throw GatewayError(GatewayError::Code::WrongClient, "job '" + processJobId + "' belongs to another session");
  }
  return it->second;
}

bool Gateway::apply_result(const std::string& clientId, std::string_view payload) {
  ResultEvent event;
  try {
    event = parse_result_event(payload);
  } catch (const WireError& e) {
    spdlog::warn("gateway: skipping malformed result for session {}: {}", clientId, e.what());
    return false;
  }
  if (event.clientId != clientId) {
    spdlog::error("gateway: result for client {} arrived on the topic of {}; dropped", event.clientId, clientId);
    return false;
  }

  std::vector<std::shared_ptr<LiveSubscriber>> targets;
  std::string message;
  {
    std::lock_guard lock(mu_);
    auto it = jobs_.find(event.processJobId);
    if (it == jobs_.end() || it->second.clientId != clientId) {
      spdlog::warn("gateway: result for unknown job {} on session {}", event.processJobId, clientId);
      return false;
    }
    auto& record = it->second;
    if (record.status != JobStatus::Pending) return false;  // redelivery

    json result{{"backendName", event.backendName}, {"providerJobId", event.providerJobId}};
    if (event.status == ResultStatus::Done) {
      const auto& counts = *event.counts;
      auto pp = postProcessors_.find(record.algorithmId);
      try {
        result["frequencies"] = pp != postProcessors_.end() ? pp->second(counts) : bitstring_frequencies(counts);
      } catch (const std::exception& e) {
        spdlog::warn("gateway: post-processing {} failed: {}", record.processJobId, e.what());
        result["frequencies"] = bitstring_frequencies(counts);
      }
      result["counts"] = counts;
      record.status = JobStatus::Done;
    } else {
      result["errorMessage"] = event.status == ResultStatus::Cancelled ? "provider job was cancelled"
                                                                       : event.errorMessage.value_or("unknown error");
      record.status = JobStatus::Error;
    }
    record.resultPayload = std::move(result);
    record.completedAt = wire_precision(Clock::now());
    message = to_json(record).dump();
    auto session = sessions_.find(clientId);
    if (session != sessions_.end()) targets = session->second->subscribers;
  }
  for (auto& sub : targets) sub->push(message);
  return true;
}

void Gateway::run_result_consumer(std::string clientId, std::string topic, std::stop_token stop) {
  const Subscription sub{topic, std::string(kGatewayGroup)};
  while (!stop.stop_requested()) {
    std::vector<Message> batch;
    try {
      batch = bus_.consume(sub, 32, kConsumeSlice);
    } catch (const std::exception& e) {
      spdlog::error("gateway: consume from {} failed: {}", topic, e.what());
      std::this_thread::sleep_for(kConsumeSlice);
      continue;
    }
    for (const auto& msg : batch) {
      apply_result(clientId, msg.payload);
      try {
        bus_.commit(sub, msg.offset);
      } catch (const std::exception& e) {
        spdlog::error("gateway: commit on {} failed: {}", topic, e.what());
      }
    }
  }
}

std::shared_ptr<LiveSubscriber> Gateway::subscribe(const std::string& clientId) {
  std::lock_guard lock(mu_);
  auto it = sessions_.find(clientId);
  if (it == sessions_.end()) throw GatewayError(GatewayError::Code::UnknownSession, "unknown session '" + clientId + "'");
  auto sub = std::make_shared<LiveSubscriber>(clientId);
  if (stopped_) sub->close();
  it->second->subscribers.push_back(sub);
  return sub;
}

void Gateway::unsubscribe(const std::shared_ptr<LiveSubscriber>& subscriber) {
  subscriber->close();
  std::lock_guard lock(mu_);
  auto it = sessions_.find(subscriber->client_id());
  if (it == sessions_.end()) return;
  std::erase(it->second->subscribers, subscriber);
}

// ---------------------------------------------------------------------------
// HTTP

namespace {

void reply_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void reply_error(httplib::Response& res, int status, std::string_view code, const std::string& message) {
  reply_json(res, status, json{{"error", code}, {"message", message}});
}

std::string client_of(const httplib::Request& req, const json* body = nullptr) {
  if (body && body->contains("clientId") && (*body)["clientId"].is_string()) return (*body)["clientId"];
  if (req.has_header("X-Client-Id")) return req.get_header_value("X-Client-Id");
  return req.get_param_value("clientId");
}

int broker_status(BrokerError::Code code) {
  switch (code) {
    case BrokerError::Code::DuplicateTopic: return 409;
    case BrokerError::Code::UnknownTopic: return 404;
    case BrokerError::Code::Unavailable: return 503;
    default: return 422;
  }
}

}  // namespace

void mount_broker_routes(httplib::Server& server, MessageBus& bus) {
  auto guarded = [](auto&& body) {
    return [body](const httplib::Request& req, httplib::Response& res) {
      try {
        body(req, res);
      } catch (const BrokerError& e) {
        reply_error(res, broker_status(e.code()), to_string(e.code()), e.what());
      } catch (const std::exception& e) {
        reply_error(res, 400, "BadRequest", e.what());
      }
    };
  };

  server.Post("/broker/topics", guarded([&bus](const httplib::Request& req, httplib::Response& res) {
                const auto body = json::parse(req.body);
                bus.create_topic(body.at("name").get<std::string>());
                reply_json(res, 201, json{{"name", body["name"]}});
              }));
  server.Get(R"(/broker/topics/([^/]+))", guarded([&bus](const httplib::Request& req, httplib::Response& res) {
               if (!bus.has_topic(req.matches[1])) {
                 reply_error(res, 404, "UnknownTopic", "unknown topic '" + std::string(req.matches[1]) + "'");
                 return;
               }
               reply_json(res, 200, json{{"name", std::string(req.matches[1])}});
             }));
  server.Post(R"(/broker/topics/([^/]+)/messages)",
              guarded([&bus](const httplib::Request& req, httplib::Response& res) {
                const auto offset = bus.produce(req.matches[1], req.body);
                reply_json(res, 200, json{{"offset", offset}});
              }));
  server.Get(R"(/broker/topics/([^/]+)/messages)",
             guarded([&bus](const httplib::Request& req, httplib::Response& res) {
               const Subscription sub{req.matches[1], req.get_param_value("group")};
               const auto max = std::stoul(req.has_param("max") ? req.get_param_value("max") : "64");
               const Millis timeout(std::stol(req.has_param("timeoutMs") ? req.get_param_value("timeoutMs") : "0"));
               json out = json::array();
               for (const auto& m : bus.consume(sub, max, timeout)) {
                 out.push_back(json{{"offset", m.offset},
                                    {"payload", json::binary(std::vector<std::uint8_t>(m.payload.begin(), m.payload.end()))}});
               }
               const auto packed = json::to_msgpack(out);
               res.status = 200;
               res.set_content(std::string(packed.begin(), packed.end()), "application/msgpack");
             }));
  server.Post(R"(/broker/topics/([^/]+)/commit)", guarded([&bus](const httplib::Request& req, httplib::Response& res) {
                const auto body = json::parse(req.body);
                bus.commit(Subscription{req.matches[1], body.at("group").get<std::string>()},
                           body.at("offset").get<std::int64_t>());
                reply_json(res, 200, json::object());
              }));
  server.Get(R"(/broker/topics/([^/]+)/committed)",
             guarded([&bus](const httplib::Request& req, httplib::Response& res) {
               reply_json(res, 200,
                          json{{"offset", bus.committed_offset(Subscription{req.matches[1], req.get_param_value("group")})}});
             }));
}

GatewayServer::GatewayServer(Gateway& gateway, HealthProbe health, MessageBus* exposedBroker) : gateway_(gateway) {
  auto& srv = server();
  auto guarded = [](auto&& body) {
    return [body](const httplib::Request& req, httplib::Response& res) {
      try {
        body(req, res);
      } catch (const GatewayError& e) {
        reply_error(res, http_status(e.code()), to_string(e.code()), e.what());
      } catch (const json::exception& e) {
        reply_error(res, 400, "BadRequest", e.what());
      } catch (const WireError& e) {
        reply_error(res, 400, "BadRequest", e.what());
      } catch (const std::exception& e) {
        reply_error(res, 500, "Internal", e.what());
      }
    };
  };

  srv.Post("/api/sessions", guarded([this](const httplib::Request&, httplib::Response& res) {
             const auto s = gateway_.create_session();
             reply_json(res, 200, json{{"clientId", s.clientId}, {"outputTopic", s.outputTopic}});
           }));

  srv.Post("/api/jobs", guarded([this](const httplib::Request& req, httplib::Response& res) {
             const auto body = json::parse(req.body);
             if (!body.is_object()) throw GatewayError(GatewayError::Code::BadRequest, "body must be a JSON object");
             const auto algorithmId = body.at("algorithmId").get<std::string>();
             const auto backendType = backend_type_from_string(body.value("backendType", "NOISELESS_SIM"));
             const auto shots = body.value("shots", functions::kDefaultShots);
             const auto id = gateway_.handle_submit(client_of(req, &body), algorithmId,
                                                    body.value("params", json::object()), backendType, shots);
             reply_json(res, 200, json{{"processJobId", id}});
           }));

  srv.Get(R"(/api/jobs/([^/]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
            reply_json(res, 200, to_json(gateway_.get_job(client_of(req), req.matches[1])));
          }));

  srv.Get("/api/algorithms", guarded([this](const httplib::Request&, httplib::Response& res) {
            reply_json(res, 200, gateway_.algorithms());
          }));

  srv.Get("/api/health", guarded([health](const httplib::Request&, httplib::Response& res) {
            reply_json(res, 200, health ? health() : json{{"gateway", "up"}});
          }));

  srv.Get("/api/stream", guarded([this](const httplib::Request& req, httplib::Response& res) {
            auto sub = gateway_.subscribe(client_of(req));
            res.set_header("Cache-Control", "no-cache");
            auto greeted = std::make_shared<bool>(false);
            res.set_chunked_content_provider(
                "text/event-stream",
                [this, sub, greeted](std::size_t, httplib::DataSink& sink) {
                  if (!*greeted) {
                    *greeted = true;
                    static constexpr std::string_view kHello = ": connected\n\n";
                    return sink.write(kHello.data(), kHello.size());
                  }
                  if (stopping_ || sub->closed()) {
                    sink.done();
                    return true;
                  }
                  const auto msg = sub->pop(Millis(250));
                  const std::string chunk = msg ? "data: " + *msg + "\n\n" : std::string(": keepalive\n\n");
                  return sink.write(chunk.data(), chunk.size());
                },
                [this, sub](bool) { gateway_.unsubscribe(sub); });
          }));

  if (exposedBroker) mount_broker_routes(srv, *exposedBroker);
}

void GatewayServer::on_stop() { stopping_ = true; }

}  // namespace qbridge::gateway
