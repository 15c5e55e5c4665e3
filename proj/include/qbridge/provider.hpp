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

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "qbridge/qsim.hpp"
#include "qbridge/timeutil.hpp"

namespace qbridge::provider {

class ProviderError : public std::runtime_error {
 public:
  enum class Code {
    UnknownDevice,
    CircuitTooWide,
    UnknownJob,
    WaitTimeout,
    NoEligibleDevice,
    InvalidFleet,
    Unavailable,
  };

  ProviderError(Code code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Code code() const noexcept { return code_; }

 private:
  Code code_;
};

enum class JobState { Queued, Running, Done, Cancelled, Error };

std::string_view to_string(JobState state);
JobState job_state_from_string(std::string_view text);
inline bool is_final(JobState s) { return s == JobState::Done || s == JobState::Cancelled || s == JobState::Error; }

struct Device {
  std::string name;
  int numQubits = 1;
  bool isSimulator = false;
  Millis serviceTimePerJob{0};  // real devices only
  qsim::NoiseModel noiseProfile;
  int pendingJobs = 0;

  friend bool operator==(const Device&, const Device&) = default;
};

struct ProviderJob {
  std::string providerJobId;
  std::string deviceName;
  qsim::CircuitSpec circuit;
  std::int64_t shots = 0;
  JobState state = JobState::Queued;
  std::optional<qsim::Counts> counts;
  std::optional<std::string> errorMessage;
  std::optional<TimePoint> estimatedCompletionAt;
  /// Readout noise recorded at submission, e.g. a real device's profile borrowed by a noisy simulation.
  std::optional<qsim::NoiseModel> appliedNoise;
};

enum class CancelOutcome { Cancelled, AlreadyStarted };

/// Eligible = numQubits >= minQubits and (not realOnly or a real device).
/// Minimum pendingJobs wins; ties go to the lexicographically smallest name.
Device least_busy(std::span<const Device> devices, int minQubits, bool realOnly);

/// Default fleet: two real devices (5q/100 ms, 16q/250 ms, flip 0.02) and one 20q simulator.
std::vector<Device> default_fleet();
std::vector<Device> parse_fleet(const nlohmann::json& doc);
std::vector<Device> load_fleet(const std::filesystem::path& path);

void to_json(nlohmann::json& j, const Device& d);
void from_json(const nlohmann::json& j, Device& d);
void to_json(nlohmann::json& j, const ProviderJob& job);
void from_json(const nlohmann::json& j, ProviderJob& job);

/// Job-level surface of a quantum provider, implemented in-process by Provider and
/// remotely by HttpProviderClient.
class QuantumProvider {
 public:
  virtual ~QuantumProvider() = default;

  virtual std::vector<Device> devices() = 0;
  virtual std::string submit(const std::string& deviceName, const qsim::CircuitSpec& circuit, std::int64_t shots,
                             std::optional<qsim::NoiseModel> appliedNoise = std::nullopt) = 0;
  virtual JobState job_status(const std::string& providerJobId) = 0;
  virtual std::optional<TimePoint> queue_info(const std::string& providerJobId) = 0;
  virtual ProviderJob wait_for_result(const std::string& providerJobId, Millis timeout) = 0;
  virtual CancelOutcome cancel(const std::string& providerJobId) = 0;
  virtual ProviderJob get_job(const std::string& providerJobId) = 0;
};

/// Mock provider with one FIFO queue and one worker thread per device.
///
/// Real devices hold each job for serviceTimePerJob before executing it; simulators
/// execute immediately. Jobs stay QUEUED until start() launches the workers.
class Provider final : public QuantumProvider {
 public:
  explicit Provider(std::vector<Device> fleet, std::uint64_t seed = 0);
  ~Provider() override;
  Provider(const Provider&) = delete;
  Provider& operator=(const Provider&) = delete;

  void start();
  void stop();

  std::vector<Device> devices() override;
  std::string submit(const std::string& deviceName, const qsim::CircuitSpec& circuit, std::int64_t shots,
                     std::optional<qsim::NoiseModel> appliedNoise = std::nullopt) override;
  JobState job_status(const std::string& providerJobId) override;
  std::optional<TimePoint> queue_info(const std::string& providerJobId) override;
  ProviderJob wait_for_result(const std::string& providerJobId, Millis timeout) override;
  CancelOutcome cancel(const std::string& providerJobId) override;
  ProviderJob get_job(const std::string& providerJobId) override;

 private:
  struct DeviceSlot {
    Device spec;
    std::deque<std::string> fifo;
    int active = 0;  // queued + running
  };
  struct JobEntry {
    ProviderJob job;
    std::uint64_t seed = 0;
  };

  void device_worker(std::size_t slot_index, std::stop_token stop);
  JobEntry& job_or_throw(const std::string& id);
  void finish(JobEntry& entry, JobState state, std::optional<qsim::Counts> counts, std::optional<std::string> error);

  std::uint64_t seed_;
  std::uint64_t next_seq_ = 0;

  std::mutex mu_;
  std::condition_variable_any work_cv_;
  std::condition_variable final_cv_;
  std::vector<DeviceSlot> slots_;
  std::map<std::string, std::size_t> slot_by_name_;
  std::map<std::string, JobEntry> jobs_;
  std::vector<std::jthread> workers_;
};

}  // namespace qbridge::provider
