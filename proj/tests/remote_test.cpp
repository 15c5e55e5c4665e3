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

#include <gtest/gtest.h>

#include "qbridge/gateway.hpp"

namespace qbridge::remote {
namespace {

using provider::Device;
using provider::JobState;
using provider::ProviderError;

template <typename E, typename Code>
void expect_code(Code expected, auto&& fn) {
  try {
    fn();
    ADD_FAILURE() << "no exception";
  } catch (const E& e) {
    EXPECT_EQ(e.code(), expected) << e.what();
  }
}

class RemoteBrokerTest : public ::testing::Test {
 protected:
  RemoteBrokerTest() {
    gateway::mount_broker_routes(server_.server(), broker_);
    server_.start("127.0.0.1", 0);
  }

  Broker broker_;
  HttpService server_;
};

TEST_F(RemoteBrokerTest, SameContractAsLocal) {
  HttpBrokerClient bus(server_.base_url());
  bus.create_topic("t");
  EXPECT_TRUE(bus.has_topic("t"));
  EXPECT_FALSE(bus.has_topic("u"));
  const std::string binary("a\0b\n\xff", 5);
  EXPECT_EQ(bus.produce("t", binary), 0);
  EXPECT_EQ(bus.produce("t", "second"), 1);
  const Subscription sub{"t", "g"};
  auto batch = bus.consume(sub, 10, Millis(0));
  ASSERT_EQ(batch.size(), 2u);
  EXPECT_EQ(batch[0].payload, binary);
  EXPECT_EQ(batch[1].offset, 1);
  EXPECT_EQ(bus.committed_offset(sub), -1);
  bus.commit(sub, 0);
  EXPECT_EQ(bus.committed_offset(sub), 0);
  batch = bus.consume(sub, 10, Millis(0));
  ASSERT_EQ(batch.size(), 1u);
  EXPECT_EQ(batch[0].payload, "second");
  EXPECT_EQ(broker_.topic_size("t"), 2u);
}

TEST_F(RemoteBrokerTest, ErrorsMapToCodes) {
  HttpBrokerClient bus(server_.base_url());
  bus.create_topic("t");
  expect_code<BrokerError>(BrokerError::Code::DuplicateTopic, [&] { bus.create_topic("t"); });
  expect_code<BrokerError>(BrokerError::Code::InvalidName, [&] { bus.create_topic("bad name"); });
  expect_code<BrokerError>(BrokerError::Code::UnknownTopic, [&] { bus.produce("nope", "x"); });
  expect_code<BrokerError>(BrokerError::Code::EmptyPayload, [&] { bus.produce("t", ""); });
  bus.produce("t", "x");
  bus.produce("t", "y");
  bus.commit({"t", "g"}, 1);
  expect_code<BrokerError>(BrokerError::Code::OffsetRegression, [&] { bus.commit({"t", "g"}, 0); });

  HttpBrokerClient down("http://127.0.0.1:1");
  expect_code<BrokerError>(BrokerError::Code::Unavailable, [&] { down.produce("t", "x"); });
}

TEST_F(RemoteBrokerTest, LongPollReturnsOnProduce) {
  HttpBrokerClient bus(server_.base_url());
  bus.create_topic("t");
  std::jthread producer([&] {
    std::this_thread::sleep_for(Millis(100));
    broker_.produce("t", "late");
  });
  const auto start = Clock::now();
  const auto batch = bus.consume({"t", "g"}, 1, Millis(3'000));
  ASSERT_EQ(batch.size(), 1u);
  EXPECT_LT(Clock::now() - start, Millis(2'000));
}

class RemoteProviderTest : public ::testing::Test {
 protected:
  RemoteProviderTest()
      : provider_({Device{"real", 16, false, Millis(300), {0.0}, 0}, Device{"sim", 20, true, Millis(0), {0.0}, 0}}, 3),
        server_(provider_) {
    provider_.start();
    server_.start("127.0.0.1", 0);
  }

  provider::Provider provider_;
  ProviderServer server_;
};

TEST_F(RemoteProviderTest, SameContractAsLocal) {
  HttpProviderClient client(server_.base_url());
  const auto devices = client.devices();
  ASSERT_EQ(devices.size(), 2u);
  EXPECT_EQ(devices[0].name, "real");

  const auto circuit = qsim::build_superposition_circuit("0011101100101001", "0011101100101000");
  const auto simJob = client.submit("sim", circuit, 128);
  const auto result = client.wait_for_result(simJob, Millis(5'000));
  EXPECT_EQ(result.state, JobState::Done);
  std::int64_t total = 0;
  for (const auto& [_, n] : *result.counts) total += n;
  EXPECT_EQ(total, 128);
  EXPECT_FALSE(client.queue_info(simJob).has_value());

  const auto realJob = client.submit("real", circuit, 16, qsim::NoiseModel{0.1});
  EXPECT_TRUE(client.queue_info(realJob).has_value());
  expect_code<ProviderError>(ProviderError::Code::WaitTimeout, [&] { client.wait_for_result(realJob, Millis(1)); });
  EXPECT_EQ(client.wait_for_result(realJob, Millis(5'000)).state, JobState::Done);
  EXPECT_EQ(nlohmann::json(client.get_job(realJob)), nlohmann::json(provider_.get_job(realJob)));
  EXPECT_EQ(client.job_status(realJob), JobState::Done);
}

TEST_F(RemoteProviderTest, ErrorsAndCancel) {
  HttpProviderClient client(server_.base_url());
  const auto circuit = qsim::build_superposition_circuit("0011101100101001", "0011101100101000");
  expect_code<ProviderError>(ProviderError::Code::UnknownDevice, [&] { client.submit("ghost", circuit, 1); });
  expect_code<ProviderError>(ProviderError::Code::UnknownJob, [&] { client.job_status("qj-none"); });
  const qsim::CircuitSpec wide{17, {qsim::Gate::h(0)}, true};
  expect_code<ProviderError>(ProviderError::Code::CircuitTooWide, [&] { client.submit("real", wide, 1); });

  client.submit("real", circuit, 1);
  const auto queued = client.submit("real", circuit, 1);
  EXPECT_EQ(client.cancel(queued), provider::CancelOutcome::Cancelled);
  EXPECT_EQ(client.job_status(queued), JobState::Cancelled);

  HttpProviderClient down("http://127.0.0.1:1");
  expect_code<ProviderError>(ProviderError::Code::Unavailable, [&] { down.devices(); });
}

}  // namespace
}  // namespace qbridge::remote
