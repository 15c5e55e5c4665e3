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

#include "qbridge/provider.hpp"

#include <cstdio>
#include <fstream>
#include <set>

#include <spdlog/spdlog.h>

namespace qbridge::provider {

using nlohmann::json;

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::string job_id_for(std::uint64_t token) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "qj-%016llx", static_cast<unsigned long long>(token));
  return buf;
}

}  // namespace

std::string_view to_string(JobState state) {
  switch (state) {
    case JobState::Queued: return "QUEUED";
    case JobState::Running: return "RUNNING";
    case JobState::Done: return "DONE";
    case JobState::Cancelled: return "CANCELLED";
    case JobState::Error: return "ERROR";
  }
  return "ERROR";
}

JobState job_state_from_string(std::string_view text) {
  if (text == "QUEUED") return JobState::Queued;
  if (text == "RUNNING") return JobState::Running;
  if (text == "DONE") return JobState::Done;
  if (text == "CANCELLED") return JobState::Cancelled;
  if (text == "ERROR") return JobState::Error;
  throw std::invalid_argument("unknown job state '" + std::string(text) + "'");
}

Device least_busy(std::span<const Device> devices, int minQubits, bool realOnly) {
  const Device* best = nullptr;
  for (const auto& d : devices) {
    if (d.numQubits < minQubits || (realOnly && d.isSimulator)) continue;
    if (!best || d.pendingJobs < best->pendingJobs ||
        (d.pendingJobs == best->pendingJobs && d.name < best->name)) {
      best = &d;
    }
  }
  if (!best) {
    throw ProviderError(ProviderError::Code::NoEligibleDevice,
                        "no " + std::string(realOnly ? "real " : "") + "device with at least " +
                            std::to_string(minQubits) + " qubits");
  }
  return *best;
}

std::vector<Device> default_fleet() {
  return {
      Device{"mock_guadalupe", 16, false, Millis(250), {0.02}, 0},
      Device{"mock_quito", 5, false, Millis(100), {0.02}, 0},
      Device{"qasm_simulator", 20, true, Millis(0), {0.0}, 0},
  };
}

void to_json(json& j, const Device& d) {
  j = json{{"name", d.name},
           {"numQubits", d.numQubits},
           {"isSimulator", d.isSimulator},
           {"serviceTimeMs", d.serviceTimePerJob.count()},
           {"readoutFlipProb", d.noiseProfile.readoutFlipProb},
           {"pendingJobs", d.pendingJobs}};
}

void from_json(const json& j, Device& d) {
  d.name = j.at("name").get<std::string>();
  d.numQubits = j.at("numQubits").get<int>();
  d.isSimulator = j.value("isSimulator", false);
  d.serviceTimePerJob = Millis(j.value("serviceTimeMs", std::int64_t{0}));
  d.noiseProfile.readoutFlipProb = j.value("readoutFlipProb", 0.0);
  d.pendingJobs = j.value("pendingJobs", 0);
}

void to_json(json& j, const ProviderJob& job) {
  j = json{{"providerJobId", job.providerJobId},
           {"deviceName", job.deviceName},
           {"circuit", job.circuit},
           {"shots", job.shots},
           {"state", to_string(job.state)}};
  if (job.counts) j["counts"] = *job.counts;
  if (job.errorMessage) j["errorMessage"] = *job.errorMessage;
  if (job.estimatedCompletionAt) j["estimatedCompletionAt"] = format_timestamp(*job.estimatedCompletionAt);
  if (job.appliedNoise) j["appliedReadoutFlipProb"] = job.appliedNoise->readoutFlipProb;
}

void from_json(const json& j, ProviderJob& job) {
  job.providerJobId = j.at("providerJobId").get<std::string>();
  job.deviceName = j.at("deviceName").get<std::string>();
  job.circuit = j.at("circuit").get<qsim::CircuitSpec>();
  job.shots = j.at("shots").get<std::int64_t>();
  job.state = job_state_from_string(j.at("state").get<std::string>());
  job.counts.reset();
  job.errorMessage.reset();
  job.estimatedCompletionAt.reset();
  job.appliedNoise.reset();
  if (j.contains("counts")) job.counts = j["counts"].get<qsim::Counts>();
  if (j.contains("errorMessage")) job.errorMessage = j["errorMessage"].get<std::string>();
  if (j.contains("estimatedCompletionAt")) {
    job.estimatedCompletionAt = parse_timestamp(j["estimatedCompletionAt"].get<std::string>());
  }
  if (j.contains("appliedReadoutFlipProb")) job.appliedNoise = qsim::NoiseModel{j["appliedReadoutFlipProb"].get<double>()};
}

std::vector<Device> parse_fleet(const json& doc) {
  const json& list = doc.is_object() ? doc.at("devices") : doc;
  if (!list.is_array() || list.empty()) {
    throw ProviderError(ProviderError::Code::InvalidFleet, "fleet must list at least one device");
  }
  std::vector<Device> fleet;
  std::set<std::string> names;
  for (const auto& entry : list) {
    Device d;
    try {
      d = entry.get<Device>();
    } catch (const json::exception& e) {
      throw ProviderError(ProviderError::Code::InvalidFleet, std::string("malformed device entry: ") + e.what());
    }
    d.pendingJobs = 0;
    if (d.name.empty() || !names.insert(d.name).second) {
      throw ProviderError(ProviderError::Code::InvalidFleet, "device names must be unique and non-empty");
    }
    if (d.numQubits < 1 || d.numQubits > qsim::kMaxQubits) {
      throw ProviderError(ProviderError::Code::InvalidFleet, "device " + d.name + " has an invalid qubit count");
    }
    if (d.serviceTimePerJob.count() < 0) {
      throw ProviderError(ProviderError::Code::InvalidFleet, "device " + d.name + " has a negative service time");
    }
    try {
      qsim::validate(d.noiseProfile);
    } catch (const qsim::QsimError& e) {
      throw ProviderError(ProviderError::Code::InvalidFleet, "device " + d.name + ": " + e.what());
    }
    fleet.push_back(std::move(d));
  }
  return fleet;
}

std::vector<Device> load_fleet(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ProviderError(ProviderError::Code::InvalidFleet, "cannot open fleet file " + path.string());
  try {
    return parse_fleet(json::parse(in));
  } catch (const json::exception& e) {
    throw ProviderError(ProviderError::Code::InvalidFleet, "fleet file " + path.string() + ": " + e.what());
  }
}

Provider::Provider(std::vector<Device> fleet, std::uint64_t seed) : seed_(seed) {
  for (auto& d : fleet) {
    d.pendingJobs = 0;
    slot_by_name_[d.name] = slots_.size();
    slots_.push_back(DeviceSlot{std::move(d), {}, 0});
  }
}

Provider::~Provider() { stop(); }

void Provider::start() {
  std::lock_guard lock(mu_);
  if (!workers_.empty()) return;
  for (std::size_t i = 0; i < slots_.size(); ++i) {
    workers_.emplace_back([this, i](std::stop_token st) { device_worker(i, st); });
  }
}

void Provider::stop() {
  std::vector<std::jthread> workers;
  {
    std::lock_guard lock(mu_);
    workers.swap(workers_);
  }
  for (auto& w : workers) w.request_stop();
  work_cv_.notify_all();
  workers.clear();  // joins
}

std::vector<Device> Provider::devices() {
  std::lock_guard lock(mu_);
  std::vector<Device> out;
  out.reserve(slots_.size());
  for (const auto& s : slots_) {
    out.push_back(s.spec);
    out.back().pendingJobs = s.active;
  }
  return out;
}

std::string Provider::submit(const std::string& deviceName, const qsim::CircuitSpec& circuit, std::int64_t shots,
                             std::optional<qsim::NoiseModel> appliedNoise) {
  std::unique_lock lock(mu_);
  auto it = slot_by_name_.find(deviceName);
  if (it == slot_by_name_.end()) {
    throw ProviderError(ProviderError::Code::UnknownDevice, "unknown device '" + deviceName + "'");
  }
  auto& slot = slots_[it->second];
  if (circuit.numQubits > slot.spec.numQubits) {
    throw ProviderError(ProviderError::Code::CircuitTooWide,
                        "circuit needs " + std::to_string(circuit.numQubits) + " qubits, device '" + deviceName +
                            "' has " + std::to_string(slot.spec.numQubits));
  }

  const std::uint64_t token = splitmix64(seed_ + next_seq_++);
  JobEntry entry;
  entry.seed = splitmix64(token);
  entry.job.providerJobId = job_id_for(token);
  entry.job.deviceName = deviceName;
  entry.job.circuit = circuit;
  entry.job.shots = shots;
  entry.job.state = JobState::Queued;
  entry.job.appliedNoise = appliedNoise;
  if (!slot.spec.isSimulator) {
    entry.job.estimatedCompletionAt = Clock::now() + slot.spec.serviceTimePerJob * (slot.active + 1);
  }

  const std::string id = entry.job.providerJobId;
  jobs_.emplace(id, std::move(entry));
  slot.fifo.push_back(id);
  ++slot.active;
  lock.unlock();
  work_cv_.notify_all();
  return id;
}

Provider::JobEntry& Provider::job_or_throw(const std::string& id) {
  auto it = jobs_.find(id);
  if (it == jobs_.end()) throw ProviderError(ProviderError::Code::UnknownJob, "unknown provider job '" + id + "'");
  return it->second;
}

JobState Provider::job_status(const std::string& providerJobId) {
  std::lock_guard lock(mu_);
  return job_or_throw(providerJobId).job.state;
}

std::optional<TimePoint> Provider::queue_info(const std::string& providerJobId) {
  std::lock_guard lock(mu_);
  const auto& job = job_or_throw(providerJobId).job;
  if (is_final(job.state)) return std::nullopt;
  return job.estimatedCompletionAt;
}

ProviderJob Provider::get_job(const std::string& providerJobId) {
  std::lock_guard lock(mu_);
  return job_or_throw(providerJobId).job;
}

ProviderJob Provider::wait_for_result(const std::string& providerJobId, Millis timeout) {
  std::unique_lock lock(mu_);
  auto* entry = &job_or_throw(providerJobId);
  if (!final_cv_.wait_for(lock, timeout, [&] { return is_final(entry->job.state); })) {
    throw ProviderError(ProviderError::Code::WaitTimeout,
                        "job '" + providerJobId + "' not final after " + std::to_string(timeout.count()) + " ms");
  }
  return entry->job;
}

CancelOutcome Provider::cancel(const std::string& providerJobId) {
  std::unique_lock lock(mu_);
  auto& entry = job_or_throw(providerJobId);
  if (entry.job.state != JobState::Queued) return CancelOutcome::AlreadyStarted;
  auto& slot = slots_[slot_by_name_.at(entry.job.deviceName)];
  std::erase(slot.fifo, providerJobId);
  --slot.active;
  entry.job.state = JobState::Cancelled;
  entry.job.estimatedCompletionAt.reset();
  lock.unlock();
  final_cv_.notify_all();
  return CancelOutcome::Cancelled;
}

void Provider::finish(JobEntry& entry, JobState state, std::optional<qsim::Counts> counts,
                      std::optional<std::string> error) {
  entry.job.state = state;
  entry.job.counts = std::move(counts);
  entry.job.errorMessage = std::move(error);
  entry.job.estimatedCompletionAt.reset();
}

void Provider::device_worker(std::size_t slot_index, std::stop_token stop) {
  std::unique_lock lock(mu_);
  auto& slot = slots_[slot_index];
  while (!stop.stop_requested()) {
    if (!work_cv_.wait(lock, stop, [&] { return !slot.fifo.empty(); })) break;

    const std::string id = slot.fifo.front();
    slot.fifo.pop_front();
    auto& entry = jobs_.at(id);
    entry.job.state = JobState::Running;

    if (!slot.spec.isSimulator && slot.spec.serviceTimePerJob.count() > 0) {
      const auto deadline = std::chrono::steady_clock::now() + slot.spec.serviceTimePerJob;
      work_cv_.wait_until(lock, stop, deadline, [] { return false; });
      if (stop.stop_requested()) break;
    }

    const qsim::CircuitSpec circuit = entry.job.circuit;
    const std::int64_t shots = entry.job.shots;
    const std::uint64_t seed = entry.seed;
    std::optional<qsim::NoiseModel> noise = entry.job.appliedNoise;
    if (!slot.spec.isSimulator) noise = slot.spec.noiseProfile;

    lock.unlock();
    std::optional<qsim::Counts> counts;
    std::optional<std::string> error;
    try {
      counts = qsim::simulate(circuit, shots, seed, noise);
    } catch (const std::exception& e) {
      error = std::string("execution failed: ") + e.what();
      spdlog::warn("provider: job {} on {} failed: {}", id, slot.spec.name, e.what());
    }
    lock.lock();

    auto& done = jobs_.at(id);
    if (counts) {
      finish(done, JobState::Done, std::move(counts), std::nullopt);
    } else {
      finish(done, JobState::Error, std::nullopt, std::move(error));
    }
    --slot.active;
    final_cv_.notify_all();
  }
}

}  // namespace qbridge::provider
