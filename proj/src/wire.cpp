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

#include "qbridge/wire.hpp"

namespace qbridge {

using nlohmann::json;

namespace {

json parse_object(std::string_view payload, const char* what) {
  json doc = json::parse(payload, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded() || !doc.is_object()) throw WireError(std::string(what) + " is not a JSON object");
  return doc;
}

std::string get_string(const json& doc, const char* field, bool allowEmpty = false) {
  auto it = doc.find(field);
  if (it == doc.end() || !it->is_string()) throw WireError(std::string("field '") + field + "' must be a string");
  auto s = it->get<std::string>();
  if (!allowEmpty && s.empty()) throw WireError(std::string("field '") + field + "' must not be empty");
  return s;
}

int get_attempt(const json& doc) {
  auto it = doc.find("attempt");
  if (it == doc.end() || !it->is_number_integer() || it->get<int>() < 1) {
    throw WireError("field 'attempt' must be an integer >= 1");
  }
  return it->get<int>();
}

TimePoint get_time(const json& doc, const char* field) {
  try {
    return parse_timestamp(get_string(doc, field));
  } catch (const std::invalid_argument& e) {
    throw WireError(std::string("field '") + field + "': " + e.what());
  }
}

}  // namespace

std::string_view to_string(BackendType type) {
  switch (type) {
    case BackendType::Real: return "REAL";
    case BackendType::NoiselessSim: return "NOISELESS_SIM";
    case BackendType::NoisySim: return "NOISY_SIM";
  }
  return "REAL";
}

BackendType backend_type_from_string(std::string_view text) {
  if (text == "REAL") return BackendType::Real;
  if (text == "NOISELESS_SIM") return BackendType::NoiselessSim;
  if (text == "NOISY_SIM") return BackendType::NoisySim;
  throw WireError("unknown backend type '" + std::string(text) + "'");
}

std::string_view to_string(ResultStatus status) {
  switch (status) {
    case ResultStatus::Done: return "DONE";
    case ResultStatus::Cancelled: return "CANCELLED";
    case ResultStatus::Error: return "ERROR";
  }
  return "ERROR";
}

ResultStatus result_status_from_string(std::string_view text) {
  if (text == "DONE") return ResultStatus::Done;
  if (text == "CANCELLED") return ResultStatus::Cancelled;
  if (text == "ERROR") return ResultStatus::Error;
  throw WireError("unknown result status '" + std::string(text) + "'");
}

json to_json(const SubmissionEvent& e) {
  json j{{"providerJobId", e.providerJobId},
         {"backendName", e.backendName},
         {"backendType", to_string(e.backendType)},
         {"clientId", e.clientId},
         {"processJobId", e.processJobId},
         {"outputTopic", e.outputTopic},
         {"submittedAt", format_timestamp(e.submittedAt)},
         {"attempt", e.attempt}};
  if (e.estimatedCompletionAt) j["estimatedCompletionAt"] = format_timestamp(*e.estimatedCompletionAt);
  return j;
}

json to_json(const ResultEvent& e) {
  json j{{"clientId", e.clientId},
         {"processJobId", e.processJobId},
         {"providerJobId", e.providerJobId},
         {"backendName", e.backendName},
         {"status", to_string(e.status)},
         {"completedAt", format_timestamp(e.completedAt)},
         {"attempt", e.attempt}};
  if (e.counts) j["counts"] = *e.counts;
  if (e.errorMessage) j["errorMessage"] = *e.errorMessage;
  return j;
}

std::string serialize(const SubmissionEvent& event) { return to_json(event).dump(); }
std::string serialize(const ResultEvent& event) { return to_json(event).dump(); }

SubmissionEvent parse_submission_event(std::string_view payload) {
  const json doc = parse_object(payload, "submission event");
  SubmissionEvent e;
  e.providerJobId = get_string(doc, "providerJobId");
  e.backendName = get_string(doc, "backendName");
  e.backendType = backend_type_from_string(get_string(doc, "backendType"));
  e.clientId = get_string(doc, "clientId");
  e.processJobId = get_string(doc, "processJobId");
  e.outputTopic = get_string(doc, "outputTopic");
  e.submittedAt = get_time(doc, "submittedAt");
  if (doc.contains("estimatedCompletionAt")) e.estimatedCompletionAt = get_time(doc, "estimatedCompletionAt");
  e.attempt = get_attempt(doc);
  return e;
}

ResultEvent parse_result_event(std::string_view payload) {
  const json doc = parse_object(payload, "result event");
  ResultEvent e;
  e.clientId = get_string(doc, "clientId");
  e.processJobId = get_string(doc, "processJobId");
  e.providerJobId = get_string(doc, "providerJobId", /*allowEmpty=*/true);
  e.backendName = get_string(doc, "backendName", /*allowEmpty=*/true);
  e.status = result_status_from_string(get_string(doc, "status"));
  e.completedAt = get_time(doc, "completedAt");
  e.attempt = get_attempt(doc);
  if (doc.contains("counts")) {
    try {
      e.counts = doc["counts"].get<qsim::Counts>();
    } catch (const json::exception&) {
      throw WireError("field 'counts' must map bitstrings to integers");
    }
  }
  if (doc.contains("errorMessage")) e.errorMessage = get_string(doc, "errorMessage", true);
  if (e.counts.has_value() != (e.status == ResultStatus::Done)) {
    throw WireError("counts must be present exactly when status is DONE");
  }
  if (e.errorMessage.has_value() != (e.status == ResultStatus::Error)) {
    throw WireError("errorMessage must be present exactly when status is ERROR");
  }
  return e;
}

}  // namespace qbridge
