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

#include "qbridge/client.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>

#include <httplib.h>

namespace qbridge::client {

using nlohmann::json;

namespace {

constexpr Millis kPollInterval{500};

httplib::Client make_client(const std::string& baseUrl) {
  httplib::Client c(baseUrl);
  c.set_connection_timeout(std::chrono::seconds(5));
  c.set_read_timeout(std::chrono::seconds(15));
  return c;
}

json checked(const httplib::Result& res, const std::string& what) {
  if (!res) throw ClientError(0, "Unreachable", what + ": gateway unreachable (" + httplib::to_string(res.error()) + ")");
  auto body = json::parse(res->body, nullptr, false);
  if (res->status >= 300) {
    const bool structured = body.is_object() && body.contains("error");
    throw ClientError(res->status, structured ? body["error"].get<std::string>() : "HttpError",
                      what + ": " + (structured ? body.value("message", res->body) : res->body));
  }
  if (body.is_discarded()) throw ClientError(res->status, "BadResponse", what + ": response is not JSON");
  return body;
}

}  // namespace

GatewayClient::GatewayClient(std::string baseUrl) : baseUrl_(std::move(baseUrl)) {}

Session GatewayClient::create_session() {
  auto c = make_client(baseUrl_);
  const auto body = checked(c.Post("/api/sessions", "", "application/json"), "create session");
  return Session{body.at("clientId").get<std::string>(), body.at("outputTopic").get<std::string>()};
}

std::string GatewayClient::submit(const std::string& clientId, const std::string& algorithmId, const json& params,
                                  const std::string& backendType, std::int64_t shots) {
  const json request{{"clientId", clientId},
                     {"algorithmId", algorithmId},
                     {"params", params},
                     {"backendType", backendType},
                     {"shots", shots}};
  auto c = make_client(baseUrl_);
  return checked(c.Post("/api/jobs", request.dump(), "application/json"), "submit")
      .at("processJobId")
      .get<std::string>();
}

json GatewayClient::get_job(const std::string& clientId, const std::string& processJobId) {
  auto c = make_client(baseUrl_);
  return checked(c.Get("/api/jobs/" + processJobId, httplib::Headers{{"X-Client-Id", clientId}}), "get job");
}

std::vector<std::string> GatewayClient::algorithms() {
  auto c = make_client(baseUrl_);
  return checked(c.Get("/api/algorithms"), "list algorithms").get<std::vector<std::string>>();
}

json GatewayClient::health() {
  auto c = make_client(baseUrl_);
  return checked(c.Get("/api/health"), "health");
}

LiveStream::LiveStream(std::string baseUrl, std::string clientId)
    : thread_([this, baseUrl = std::move(baseUrl), clientId = std::move(clientId)] { run(baseUrl, clientId); }) {}

LiveStream::~LiveStream() { close(); }

void LiveStream::run(std::string baseUrl, std::string clientId) {
  auto c = make_client(baseUrl);
  c.Get("/api/stream?clientId=" + clientId, [this](const char* data, std::size_t len) {
    feed(std::string_view(data, len));
    return !stop_.load();
  });
  std::lock_guard lock(mu_);
  ended_ = true;
  cv_.notify_all();
}

void LiveStream::feed(std::string_view chunk) {
  std::lock_guard lock(mu_);
  buffer_.append(chunk);
  for (auto end = buffer_.find("\n\n"); end != std::string::npos; end = buffer_.find("\n\n")) {
    const std::string event = buffer_.substr(0, end);
    buffer_.erase(0, end + 2);
    if (event.rfind(": connected", 0) == 0) {
      connected_ = true;
    } else if (event.rfind("data: ", 0) == 0) {
      auto record = json::parse(event.substr(6), nullptr, false);
      if (!record.is_discarded()) records_.push_back(std::move(record));
    }
  }
  cv_.notify_all();
}

bool LiveStream::wait_connected(Millis timeout) {
  std::unique_lock lock(mu_);
  cv_.wait_for(lock, timeout, [this] { return connected_ || ended_; });
  return connected_;
}

std::optional<json> LiveStream::next(Millis timeout) {
  std::unique_lock lock(mu_);
  cv_.wait_for(lock, timeout, [this] { return !records_.empty() || ended_; });
  if (records_.empty()) return std::nullopt;
  auto record = std::move(records_.front());
  records_.pop_front();
  return record;
}

bool LiveStream::ended() const {
  std::lock_guard lock(mu_);
  return ended_ && records_.empty();
}

void LiveStream::close() {
  stop_ = true;
  if (thread_.joinable()) thread_.join();
}

bool is_final_status(const json& record) {
  const auto status = record.value("status", "");
  return status == "DONE" || status == "ERROR";
}

std::optional<json> await_job(GatewayClient& gateway, LiveStream* stream, const std::string& clientId,
                              const std::string& processJobId, Millis timeout) {
  const auto deadline = Clock::now() + timeout;
  auto nextPoll = Clock::now();
  while (Clock::now() < deadline) {
    if (stream && !stream->ended()) {
      if (auto record = stream->next(kPollInterval)) {
        if (record->value("processJobId", "") == processJobId && is_final_status(*record)) return record;
        continue;
      }
    } else if (Clock::now() < nextPoll) {
      std::this_thread::sleep_until(std::min(nextPoll, deadline));
      continue;
    }
    // Covers both a dropped stream and a result finalized before the stream connected.
    if (Clock::now() >= nextPoll) {
      auto record = gateway.get_job(clientId, processJobId);
      if (is_final_status(record)) return record;
      nextPoll = Clock::now() + kPollInterval;
    }
  }
  return std::nullopt;
}

int LoadReport::submitted() const {
  int n = 0;
  for (const auto& c : clients) n += c.submitted;
  return n;
}

int LoadReport::done() const {
  int n = 0;
  for (const auto& c : clients) n += c.done;
  return n;
}

int LoadReport::failed() const {
  int n = 0;
  for (const auto& c : clients) n += c.failed;
  return n;
}

int LoadReport::foreign() const {
  int n = 0;
  for (const auto& c : clients) n += c.foreign;
  return n;
}

double LoadReport::percentile(double p) const {
  if (latenciesMs.empty()) return 0;
  auto sorted = latenciesMs;
  std::sort(sorted.begin(), sorted.end());
  const auto rank = static_cast<std::size_t>(std::ceil(p / 100.0 * static_cast<double>(sorted.size())));
  return sorted[std::clamp<std::size_t>(rank, 1, sorted.size()) - 1];
}

namespace {

void drive_client(const LoadOptions& options, TimePoint deadline, ClientReport& report,
                  std::vector<double>& latencies) {
  try {
    GatewayClient gateway(options.gatewayUrl);
    const auto session = gateway.create_session();
    report.clientId = session.clientId;
    LiveStream stream(options.gatewayUrl, session.clientId);
    if (!stream.wait_connected(Millis(5'000))) throw ClientError(0, "Unreachable", "live channel did not connect");

    std::map<std::string, TimePoint> pending;
    std::set<std::string> mine;
    for (int j = 0; j < options.jobsPerClient; ++j) {
      const auto start = Clock::now();
      const auto id = gateway.submit(session.clientId, options.algorithmId, options.params, options.backendType,
                                     options.shots);
      ++report.submitted;
      pending.emplace(id, start);
      mine.insert(id);
    }

    auto settle = [&](const json& record) {
      auto it = pending.find(record.value("processJobId", ""));
      if (it == pending.end() || !is_final_status(record)) return;
      latencies.push_back(std::chrono::duration<double, std::milli>(Clock::now() - it->second).count());
      (record["status"] == "DONE" ? report.done : report.failed)++;
      report.records.push_back(record);
      pending.erase(it);
    };

    while (!pending.empty() && Clock::now() < deadline) {
      if (!stream.ended()) {
        auto record = stream.next(Millis(250));
        if (!record) continue;
        if (record->value("clientId", "") != session.clientId || !mine.count(record->value("processJobId", ""))) {
          ++report.foreign;
          continue;
        }
        settle(*record);
      } else {
        std::vector<std::string> ids;
        for (const auto& entry : pending) ids.push_back(entry.first);
        for (const auto& id : ids) settle(gateway.get_job(session.clientId, id));
        std::this_thread::sleep_for(kPollInterval);
      }
    }
    if (!pending.empty()) {
      report.error = std::to_string(pending.size()) + " job(s) still pending at timeout";
    }
  } catch (const std::exception& e) {
    report.error = e.what();
  }
}

}  // namespace

LoadReport run_loadgen(const LoadOptions& options) {
  if (options.clients < 1 || options.jobsPerClient < 1) {
    throw std::invalid_argument("clients and jobs per client must be positive");
  }
  LoadReport report;
  report.expected = options.clients * options.jobsPerClient;
  report.clients.resize(static_cast<std::size_t>(options.clients));
  std::vector<std::vector<double>> latencies(report.clients.size());

  const auto start = Clock::now();
  const auto deadline = start + options.timeout;
  {
    std::vector<std::jthread> drivers;
    for (std::size_t i = 0; i < report.clients.size(); ++i) {
      drivers.emplace_back([&, i] { drive_client(options, deadline, report.clients[i], latencies[i]); });
    }
  }
  report.elapsedMs = std::chrono::duration<double, std::milli>(Clock::now() - start).count();
  for (const auto& l : latencies) report.latenciesMs.insert(report.latenciesMs.end(), l.begin(), l.end());
  return report;
}

std::string format_report(const LoadReport& report) {
  std::string out;
  char line[256];
  std::snprintf(line, sizeof line, "%-38s %9s %6s %6s %8s  %s\n", "client", "submitted", "done", "error", "foreign",
                "note");
  out += line;
  for (const auto& c : report.clients) {
    std::snprintf(line, sizeof line, "%-38s %9d %6d %6d %8d  %s\n", c.clientId.empty() ? "-" : c.clientId.c_str(),
                  c.submitted, c.done, c.failed, c.foreign, c.error.c_str());
    out += line;
  }
  std::snprintf(line, sizeof line, "results %d/%d done, %d error, elapsed %.0f ms\n", report.done(), report.expected,
                report.failed(), report.elapsedMs);
  out += line;
  std::snprintf(line, sizeof line, "latency ms p50 %.0f  p90 %.0f  p99 %.0f  max %.0f\n", report.percentile(50),
                report.percentile(90), report.percentile(99), report.percentile(100));
  out += line;
  out += std::string("segregation ") + (report.segregated() ? "PASS" : "FAIL") + ", completeness " +
         (report.complete() ? "PASS" : "FAIL") + "\n";
  return out;
}

}  // namespace qbridge::client
