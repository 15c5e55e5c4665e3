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

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

namespace qbridge::config {

class ConfigError : public std::runtime_error {
 public:
  enum class Code { ParseError, ValidationError, UnknownAlgorithm };

  ConfigError(Code code, const std::string& what, std::string subject = {})
      : std::runtime_error(what), code_(code), subject_(std::move(subject)) {}
  Code code() const noexcept { return code_; }
  /// Offending field (ValidationError) or algorithm id (UnknownAlgorithm).
  const std::string& subject() const noexcept { return subject_; }

 private:
  Code code_;
  std::string subject_;
};

enum class HttpMethod { Post };
enum class BodyBinding { IncomingRequestBody };

/// Placeholder values stored in config records and substituted at render time.
inline constexpr std::string_view kAuthPlaceholder = "IAMBearerToken";
inline constexpr std::string_view kBodyPlaceholder = "incomingRequestBody";

using HeaderMap = std::map<std::string, std::string>;

/// One dispatch record. Serialized exactly as
///   {"_id", "functionHttpMethod", "functionBackendUrl",
///    "functionParams": {"body", "headers": {...}}}
struct FunctionConfig {
  std::string id;
  HttpMethod httpMethod = HttpMethod::Post;
  std::string backendUrl;
  HeaderMap headers;
  BodyBinding bodyBinding = BodyBinding::IncomingRequestBody;

  friend bool operator==(const FunctionConfig&, const FunctionConfig&) = default;
};

struct InvocationRequest {
  HttpMethod method = HttpMethod::Post;
  std::string url;
  HeaderMap headers;
  std::string body;
};

class ConfigSet {
 public:
  ConfigSet() = default;
  explicit ConfigSet(std::map<std::string, FunctionConfig> records) : records_(std::move(records)) {}

  const FunctionConfig& get(const std::string& id) const;
  bool contains(const std::string& id) const { return records_.count(id) != 0; }
  const std::map<std::string, FunctionConfig>& records() const noexcept { return records_; }
  std::size_t size() const noexcept { return records_.size(); }

  friend bool operator==(const ConfigSet&, const ConfigSet&) = default;

 private:
  std::map<std::string, FunctionConfig> records_;
};

/// True for "http://host[...]" and "https://host[...]".
bool is_absolute_url(std::string_view url);

FunctionConfig parse_record(const nlohmann::json& j, std::size_t index);
nlohmann::json to_json(const FunctionConfig& config);

ConfigSet parse(std::string_view text);
ConfigSet load(const std::filesystem::path& path);
std::string dump(const ConfigSet& set);
void save(const ConfigSet& set, const std::filesystem::path& path);

InvocationRequest render_invocation(const FunctionConfig& config, std::string requestBody,
                                    std::string_view authToken);

/// Cached config with whole-set atomic reload. Readers keep the snapshot they
/// obtained even if a reload happens concurrently.
class ConfigStore {
 public:
  /// Applied to the raw file text before parsing, e.g. to expand deployment URLs.
  using Preprocessor = std::function<std::string(std::string)>;

  explicit ConfigStore(std::filesystem::path path, Preprocessor preprocess = {});
  explicit ConfigStore(ConfigSet set);

  std::shared_ptr<const ConfigSet> snapshot() const;
  FunctionConfig get(const std::string& id) const { return snapshot()->get(id); }
  void reload();

 private:
  ConfigSet read() const;

  std::filesystem::path path_;
  Preprocessor preprocess_;
  mutable std::mutex mu_;
  std::shared_ptr<const ConfigSet> current_;
};

}  // namespace qbridge::config
