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

// Release acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails.

#include <complex>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iterator>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <spdlog/spdlog.h>

#include "../oracles.hpp"
#include "../test_support.hpp"
#include "qbridge/client.hpp"
#include "qbridge/collector.hpp"
#include "qbridge/functions.hpp"
#include "qbridge/stack.hpp"

namespace qbridge::acceptance {
namespace {

using nlohmann::json;
using testing::wait_until;

const std::filesystem::path kSource = QBRIDGE_SOURCE_DIR;

// Tolerances.
constexpr std::int64_t kShots = 4096;
constexpr std::int64_t kCountTolerance = 192;
constexpr auto kSuperpositionBudget = std::chrono::seconds(10);
constexpr double kAmplitudeTol = 1e-12;
constexpr auto kLoadgenBudget = std::chrono::seconds(60);

struct Outcome {
  bool pass = false;
  std::string detail;
};

Outcome fail(std::string why) { return {false, std::move(why)}; }

cli::StackConfig stack_config() {
  cli::StackConfig c;
  c.configPath = kSource / "config/functions.json";
  c.fleetPath = kSource / "config/fleet.json";
  c.gatewayPort = c.functionsPort = c.providerPort = 0;
  c.seed = 2026;
  return c;
}

std::vector<ResultEvent> results_on(Broker& broker, const std::string& topic) {
  std::vector<ResultEvent> out;
  for (const auto& m : broker.read_all(topic)) out.push_back(parse_result_event(m.payload));
  return out;
}

// ---------------------------------------------------------------------------

Outcome superposition() {
  cli::Stack stack(stack_config());
  stack.start();
  client::GatewayClient gw(stack.gateway_url());

  auto run = [&](const std::string& a, const std::string& b, ResultEvent& out) -> std::optional<std::string> {
    const auto s = gw.create_session();
    const auto id = gw.submit(s.clientId, "smile_super_position", {{"emoticonA", a}, {"emoticonB", b}},
                              "NOISELESS_SIM", kShots);
    if (!wait_until([&] { return stack.broker()->topic_size(s.outputTopic) > 0; }, Millis(20'000))) {
      return "no ResultEvent for " + id;
    }
    out = results_on(*stack.broker(), s.outputTopic).front();
    if (out.status != ResultStatus::Done) return "job ended " + std::string(to_string(out.status));
    return std::nullopt;
  };

  const auto started = std::chrono::steady_clock::now();
  ResultEvent r;
  if (auto err = run(";)", ";(", r)) return fail(*err);
  const auto elapsed = std::chrono::steady_clock::now() - started;

  const auto wink = qsim::encode_emoticon(";)");
  const auto frown = qsim::encode_emoticon(";(");
  std::set<std::string> support;
  for (const auto& [bits, _] : *r.counts) support.insert(bits);
  if (support != std::set<std::string>{wink, frown}) return fail("support has " + std::to_string(support.size()) + " outcomes");
  const auto cw = r.counts->at(wink);
  const auto cf = r.counts->at(frown);
  if (std::llabs(cw - kShots / 2) > kCountTolerance || std::llabs(cf - kShots / 2) > kCountTolerance) {
    return fail("counts " + std::to_string(cw) + "/" + std::to_string(cf) + " outside 2048 +- 192");
  }
  if (elapsed >= kSuperpositionBudget) return fail("took " + std::to_string(elapsed.count() / 1'000'000) + " ms");

  ResultEvent same;
  if (auto err = run(";)", ";)", same)) return fail("degenerate: " + *err);
  if (same.counts->size() != 1 || same.counts->at(wink) != kShots) return fail("degenerate case is not a single outcome");

  const auto ms = std::chrono::duration_cast<Millis>(elapsed).count();
  return {true, "counts ;)=" + std::to_string(cw) + " ;(=" + std::to_string(cf) + ", " + std::to_string(ms) +
                    " ms, degenerate 4096/4096"};
}

Outcome simulator_oracle() {
  auto check = [](const std::string& a, const std::string& b) -> std::optional<std::string> {
    const auto circuit = qsim::build_superposition_circuit(a, b);
    qsim::Statevector state(circuit.numQubits);
    for (const auto& g : circuit.gates) {
      state.apply(g);
      if (std::abs(state.norm() - 1.0) >= kAmplitudeTol) return "norm drift on " + a + "/" + b;
    }
    const auto expected = oracle::two_basis_state(a, b);
    const auto actual = state.amplitudes();
    for (std::size_t i = 0; i < expected.size(); ++i) {
      if (std::abs(actual[i] - expected[i]) >= kAmplitudeTol) return "amplitude mismatch on " + a + "/" + b;
    }
    return std::nullopt;
  };
  std::size_t cases = 0;
  for (int n = 1; n <= 4; ++n) {
    const auto all = oracle::all_bitstrings(n);
    for (const auto& a : all) {
      for (const auto& b : all) {
        if (auto err = check(a, b)) return fail(*err);
        ++cases;
      }
    }
  }
  std::mt19937_64 rng(10);
  for (int n = 5; n <= 10; ++n) {
    for (int i = 0; i < 1000; ++i) {
      std::string a(static_cast<std::size_t>(n), '0');
      std::string b(static_cast<std::size_t>(n), '0');
      for (int q = 0; q < n; ++q) {
        a[static_cast<std::size_t>(q)] = rng() % 2 ? '1' : '0';
        b[static_cast<std::size_t>(q)] = rng() % 2 ? '1' : '0';
      }
      if (auto err = check(a, b)) return fail(*err);
      ++cases;
    }
  }
  return {true, std::to_string(cases) + " pairs within 1e-12"};
}

// Written independently of decide_poll_action.
collector::PollDecision expected_decision(provider::JobState s, bool sim, int estimate) {
  using provider::JobState;
  if (s == JobState::Done || s == JobState::Cancelled || s == JobState::Error) return collector::PollDecision::Finalize;
  if (!sim && estimate == 3) return collector::PollDecision::ReEnqueue;
  return collector::PollDecision::Wait;
}

std::optional<std::string> poll_grid() {
  using provider::JobState;
  const auto now = Clock::now();
  const Millis threshold(500);
  for (auto s : {JobState::Queued, JobState::Running, JobState::Done, JobState::Cancelled, JobState::Error}) {
    for (bool sim : {true, false}) {
      for (int e = 0; e < 4; ++e) {
        std::optional<TimePoint> est;
        if (e == 1) est = now + threshold - Millis(1);
        if (e == 2) est = now + threshold;
        if (e == 3) est = now + threshold + Millis(1);
        if (collector::decide_poll_action(s, sim, est, now, threshold) != expected_decision(s, sim, e)) {
          return "grid cell " + std::string(provider::to_string(s)) + (sim ? "/sim/" : "/real/") + std::to_string(e);
        }
      }
    }
  }
  return std::nullopt;
}

struct Pipeline {
  explicit Pipeline(std::vector<provider::Device> fleet, collector::CollectorConfig cfg)
      : provider(std::move(fleet), 5), runtime(provider, broker, "in", "tok"), collector(broker, provider, "in", cfg) {
    broker.create_topic("in");
    broker.create_topic("topic-out");
    runtime.register_algorithm("smile_super_position", functions::smile_super_position_builder());
    provider.start();
    collector.start();
  }

  functions::ActionResponse submit(BackendType type, const std::string& processJobId) {
    functions::ActionRequest r;
    r.algorithmId = "smile_super_position";
    r.params = {{"emoticonA", ";)"}, {"emoticonB", ";("}};
    r.backendType = type;
    r.clientId = "client";
    r.processJobId = processJobId;
    r.outputTopic = "topic-out";
    r.shots = 256;
    return runtime.invoke(r);
  }

  Broker broker;
  provider::Provider provider;
  functions::FunctionRuntime runtime;
  collector::Collector collector;
};

Outcome reenqueue() {
  if (auto err = poll_grid()) return fail(*err);
  collector::CollectorConfig cfg;
  cfg.waitThreshold = Millis(500);
  Pipeline p({provider::Device{"solo_real", 16, false, Millis(5'000), {0.0}, 0}}, cfg);
  if (!p.submit(BackendType::Real, "job-1").ok) return fail("submission rejected");

  bool observed = false;
  int maxAttempt = 0;
  if (!wait_until([&] { return p.broker.topic_size("topic-out") >= 1; }, Millis(20'000))) {
    return fail("no ResultEvent within 20 s");
  }
  for (const auto& m : p.broker.read_all("in")) {
    const auto e = parse_submission_event(m.payload);
    maxAttempt = std::max(maxAttempt, e.attempt);
    if (e.attempt >= 2 && e.estimatedCompletionAt) observed = true;
  }
  std::this_thread::sleep_for(Millis(1'000));
  const auto results = results_on(p.broker, "topic-out");
  p.collector.stop();
  if (!observed) return fail("no re-enqueued event with an estimate");
  if (results.size() != 1) return fail(std::to_string(results.size()) + " ResultEvents");
  if (results[0].status != ResultStatus::Done) return fail("job ended " + std::string(to_string(results[0].status)));
  return {true, "grid 40/40, max attempt " + std::to_string(maxAttempt) + ", one DONE result"};
}

Outcome readiness_priority() {
  collector::CollectorConfig cfg;
  cfg.workerCount = 1;
  cfg.waitThreshold = Millis(100);
  Pipeline p({provider::Device{"slow_real", 16, false, Millis(10'000), {0.0}, 0},
              provider::Device{"fast_sim", 20, true, Millis(0), {0.0}, 0}},
             cfg);
  if (!p.submit(BackendType::Real, "slow").ok) return fail("real submission rejected");
  if (!wait_until([&] { return p.broker.read_all("in").size() >= 2; }, Millis(5'000))) {
    return fail("real job was not re-enqueued");
  }
  if (!p.submit(BackendType::NoiselessSim, "fast").ok) return fail("sim submission rejected");
  if (!wait_until([&] { return p.broker.topic_size("topic-out") >= 1; }, Millis(5'000))) {
    return fail("no result within 5 s");
  }
  const auto first = results_on(p.broker, "topic-out").front();
  p.collector.stop();
  if (first.processJobId != "fast") return fail("first result was " + first.processJobId);
  return {true, "simulator result published first while the real job waits"};
}

Outcome segregation() {
  cli::Stack stack(stack_config());
  stack.start();
  client::LoadOptions opts;
  opts.gatewayUrl = stack.gateway_url();
  opts.clients = 5;
  opts.jobsPerClient = 4;
  opts.backendType = "NOISELESS_SIM";
  opts.timeout = std::chrono::duration_cast<Millis>(kLoadgenBudget);
  const auto started = std::chrono::steady_clock::now();
  const auto report = client::run_loadgen(opts);
  const auto elapsed = std::chrono::steady_clock::now() - started;

  int events = 0;
  int crossed = 0;
  for (const auto& c : report.clients) {
    const auto session = stack.gateway()->find_session(c.clientId);
    if (!session) return fail("missing session " + c.clientId);
    for (const auto& r : results_on(*stack.broker(), session->outputTopic)) {
      ++events;
      if (r.clientId != c.clientId) ++crossed;
    }
  }
  if (!report.passed()) return fail(client::format_report(report));
  if (events != 20) return fail(std::to_string(events) + " ResultEvents");
  if (crossed != 0) return fail(std::to_string(crossed) + " cross-client deliveries");
  if (elapsed >= kLoadgenBudget) return fail("exceeded 60 s");
  return {true, "20/20 on own topics, 0 crossed, " +
                    std::to_string(std::chrono::duration_cast<Millis>(elapsed).count()) + " ms"};
}

Outcome least_busy() {
  std::mt19937 rng(100);
  int agree = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 8);
    std::vector<provider::Device> fleet;
    std::vector<oracle::FleetEntry> entries;
    for (int i = 0; i < n; ++i) {
      provider::Device d;
      d.name = "dev" + std::to_string(rng() % 100);
      while (std::any_of(fleet.begin(), fleet.end(), [&](const auto& x) { return x.name == d.name; })) d.name += "x";
      d.numQubits = 1 + static_cast<int>(rng() % 20);
      d.isSimulator = rng() % 3 == 0;
      d.pendingJobs = static_cast<int>(rng() % 4);
      fleet.push_back(d);
      entries.push_back({d.name, d.numQubits, d.isSimulator, d.pendingJobs});
    }
    const int minQubits = 1 + static_cast<int>(rng() % 20);
    const bool realOnly = rng() % 2 == 0;
    const auto expected = oracle::least_busy(entries, minQubits, realOnly);
    std::optional<std::string> actual;
    try {
      actual = provider::least_busy(fleet, minQubits, realOnly).name;
    } catch (const provider::ProviderError&) {
    }
    if (actual == expected) ++agree;
  }
  if (agree != 100) return fail(std::to_string(agree) + "/100 agree");
  return {true, "100/100 agree with oracle"};
}

Outcome error_propagation() {
  // (a) non-encodable emoticon
  {
    Pipeline p({provider::Device{"sim", 20, true, Millis(0), {0.0}, 0}}, collector::CollectorConfig{});
    functions::ActionRequest r;
    r.algorithmId = "smile_super_position";
    r.params = {{"emoticonA", "\xF0\x9F\x99\x82"}, {"emoticonB", ";("}};
    r.backendType = BackendType::NoiselessSim;
    r.clientId = "c";
    r.processJobId = "p";
    r.outputTopic = "topic-out";
    const auto resp = p.runtime.invoke(r);
    if (resp.ok) return fail("(a) emoji accepted");
    if (p.broker.topic_size("in") != 0) return fail("(a) SubmissionEvent emitted");
  }
  // (b) tampered provider job id
  {
    Pipeline p({provider::Device{"sim", 20, true, Millis(0), {0.0}, 0}}, collector::CollectorConfig{});
    SubmissionEvent e;
    e.providerJobId = "qj-tampered";
    e.backendName = "sim";
    e.backendType = BackendType::NoiselessSim;
    e.clientId = "c";
    e.processJobId = "p";
    e.outputTopic = "topic-out";
    e.submittedAt = wire_precision(Clock::now());
    p.broker.produce("in", serialize(e));
    if (!wait_until([&] { return p.broker.topic_size("topic-out") == 1; })) return fail("(b) no ResultEvent");
    const auto r = results_on(p.broker, "topic-out").front();
    if (r.status != ResultStatus::Error || r.errorMessage->find("qj-tampered") == std::string::npos) {
      return fail("(b) result does not name the id");
    }
  }
  // (c) unknown algorithm
  {
    config::ConfigStore store(
        config::parse(json::array({testing::dispatch_record("smile_super_position", "http://fn.test/x")}).dump()));
    Broker broker;
    int calls = 0;
    struct CountingInvoker : gateway::FunctionInvoker {
      int* calls;
      gateway::HttpReply invoke(const config::InvocationRequest&) override {
        ++*calls;
        return {200, R"({"ok":true,"providerJobId":"x","backendName":"y"})"};
      }
    } invoker;
    invoker.calls = &calls;
    gateway::Gateway gw(store, broker, invoker, "tok", 1);
    const auto s = gw.create_session();
    try {
      gw.handle_submit(s.clientId, "no_such_algorithm", json::object(), BackendType::Real, 1);
      return fail("(c) unknown algorithm accepted");
    } catch (const gateway::GatewayError& e) {
      if (e.code() != gateway::GatewayError::Code::UnknownAlgorithm) return fail("(c) wrong error code");
    }
    if (calls != 0) return fail("(c) function invoked");
  }
  return {true, "(a) rejected without event, (b) ERROR names id, (c) rejected with 0 calls"};
}

Outcome broker_contract() {
  Broker broker;
  broker.create_topic("t");
  constexpr int kProducers = 4;
  constexpr int kPerProducer = 2500;
  {
    std::vector<std::jthread> producers;
    for (int p = 0; p < kProducers; ++p) {
      producers.emplace_back([&, p] {
        for (int i = 0; i < kPerProducer; ++i) broker.produce("t", std::to_string(p) + ":" + std::to_string(i));
      });
    }
  }
  const auto all = broker.read_all("t");
  if (all.size() != kProducers * kPerProducer) return fail("lost messages");
  std::vector<int> next(kProducers, 0);
  for (std::size_t i = 0; i < all.size(); ++i) {
    if (all[i].offset != static_cast<std::int64_t>(i)) return fail("offsets not consecutive");
    const auto colon = all[i].payload.find(':');
    const int p = std::stoi(all[i].payload.substr(0, colon));
    if (std::stoi(all[i].payload.substr(colon + 1)) != next[static_cast<std::size_t>(p)]++) return fail("order broken");
  }

  const Subscription sub{"t", "g"};
  const auto first = broker.consume(sub, 5, Millis(0));
  broker.commit(sub, first[1].offset);
  const auto again = broker.consume(sub, 5, Millis(0));
  if (again.empty() || again.front().offset != 2) return fail("uncommitted messages not redelivered");

  std::mt19937 rng(3);
  broker.create_topic("bin");
  std::vector<std::string> sent;
  for (int i = 0; i < 200; ++i) {
    std::string payload(1 + rng() % 300, '\0');
    for (auto& ch : payload) ch = static_cast<char>(rng() & 0xFF);
    sent.push_back(payload);
    broker.produce("bin", payload);
  }
  const auto back = broker.read_all("bin");
  for (std::size_t i = 0; i < sent.size(); ++i) {
    if (back[i].payload != sent[i]) return fail("payload bytes differ");
  }
  return {true, "10000 ordered, redelivery from offset 2, 200 binary payloads exact"};
}

Outcome extensibility() {
  // Algorithm ids may appear only in the function registry and the deployment wiring.
  for (const char* file : {"src/gateway.cpp", "src/collector.cpp", "include/qbridge/gateway.hpp",
                           "include/qbridge/collector.hpp"}) {
    std::ifstream in(kSource / file);
    const std::string text((std::istreambuf_iterator<char>(in)), {});
    if (text.empty()) return fail(std::string("cannot read ") + file);
    for (const char* id : {"smile_super_position", "kSmileSuperPosition", "bell_pair"}) {
      if (text.find(id) != std::string::npos) return fail(std::string(file) + " mentions " + id);
    }
  }

  testing::TempDir dir;
  auto records = json::parse(std::ifstream(kSource / "config/functions.json"));
  records.push_back(testing::dispatch_record("bell_pair", "${FUNCTIONS_URL}/fn/bell_pair"));
  auto cfg = stack_config();
  cfg.configPath = dir.write("functions.json", records.dump(2));
  cli::Stack stack(cfg);
  stack.start();
  stack.functions()->register_algorithm("bell_pair", [](const json&) {
    return qsim::CircuitSpec{2, {qsim::Gate::h(0), qsim::Gate::cnot(0, 1)}, true};
  });

  client::GatewayClient gw(stack.gateway_url());
  const auto s = gw.create_session();
  client::LiveStream stream(stack.gateway_url(), s.clientId);
  const auto id = gw.submit(s.clientId, "bell_pair", json::object(), "NOISELESS_SIM", 1000);
  const auto record = client::await_job(gw, &stream, s.clientId, id, Millis(20'000));
  if (!record || (*record)["status"] != "DONE") return fail("bell_pair did not complete");
  std::set<std::string> keys;
  for (const auto& [k, _] : (*record)["resultPayload"]["counts"].items()) keys.insert(k);
  if (keys != std::set<std::string>{"00", "11"}) return fail("bell_pair support is wrong");
  return {true, "bell_pair callable end to end; gateway and collector sources name no algorithm"};
}

}  // namespace
}  // namespace qbridge::acceptance

int main() {
  using namespace qbridge::acceptance;
  spdlog::set_level(spdlog::level::err);
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"superposition-correctness", superposition},
      {"simulator-oracle", simulator_oracle},
      {"re-enqueue-policy", reenqueue},
      {"readiness-priority", readiness_priority},
      {"segregation", segregation},
      {"least-busy-selection", least_busy},
      {"error-propagation", error_propagation},
      {"broker-contract", broker_contract},
      {"config-driven-extensibility", extensibility},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = fail(std::string("exception: ") + e.what());
    }
    if (!o.pass) ++failed;
    std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
