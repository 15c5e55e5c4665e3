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

// Message schemas carried on the broker.

#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "qbridge/qsim.hpp"
#include "qbridge/timeutil.hpp"

namespace qbridge {

class WireError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class BackendType { Real, NoiselessSim, NoisySim };

std::string_view to_string(BackendType type);
BackendType backend_type_from_string(std::string_view text);

/// Published on the input topic once a provider job exists.
struct SubmissionEvent {
  std::string providerJobId;
  std::string backendName;
  BackendType backendType = BackendType::NoiselessSim;
  std::string clientId;
  std::string processJobId;
  std::string outputTopic;
  TimePoint submittedAt;
  std::optional<TimePoint> estimatedCompletionAt;
  int attempt = 1;

  friend bool operator==(const SubmissionEvent&, const SubmissionEvent&) = default;
};

enum class ResultStatus { Done, Cancelled, Error };

std::string_view to_string(ResultStatus status);
ResultStatus result_status_from_string(std::string_view text);

/// Published on a client's output topic; carries counts iff DONE and an
/// error message iff ERROR.
struct ResultEvent {
  std::string clientId;
  std::string processJobId;
  std::string providerJobId;
  std::string backendName;
  ResultStatus status = ResultStatus::Done;
  std::optional<qsim::Counts> counts;
  std::optional<std::string> errorMessage;
  TimePoint completedAt;
  int attempt = 1;

  friend bool operator==(const ResultEvent&, const ResultEvent&) = default;
};

nlohmann::json to_json(const SubmissionEvent& event);
nlohmann::json to_json(const ResultEvent& event);
std::string serialize(const SubmissionEvent& event);
std::string serialize(const ResultEvent& event);

/// Strict parsers: throw WireError on missing or ill-typed fields.
SubmissionEvent parse_submission_event(std::string_view payload);
ResultEvent parse_result_event(std::string_view payload);

}  // namespace qbridge
