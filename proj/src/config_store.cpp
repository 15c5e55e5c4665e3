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

#include "qbridge/config_store.hpp"

#include <fstream>
#include <sstream>

namespace qbridge::config {

using nlohmann::json;

namespace {

[[noreturn]] void invalid(const std::string& record, const std::string& field, const std::string& why) {
  throw ConfigError(ConfigError::Code::ValidationError, "config record " + record + ": field '" + field + "' " + why,
                    field);
}

// `field` is the reported (possibly dotted) name; the key looked up is its last segment.
const json& require(const json& obj, const std::string& record, const std::string& field) {
  auto it = obj.find(field.substr(field.rfind('.') + 1));
  if (it == obj.end()) invalid(record, field, "is missing");
  return *it;
}

std::string require_string(const json& obj, const std::string& record, const std::string& field) {
  const auto& v = require(obj, record, field);
  if (!v.is_string() || v.get_ref<const std::string&>().empty()) invalid(record, field, "must be a non-empty string");
  return v.get<std::string>();
}

}  // namespace

const FunctionConfig& ConfigSet::get(const std::string& id) const {
  auto it = records_.find(id);
  if (it == records_.end()) {
    throw ConfigError(ConfigError::Code::UnknownAlgorithm, "unknown algorithm '" + id + "'", id);
  }
  return it->second;
}

bool is_absolute_url(std::string_view url) {
  for (std::string_view scheme : {"http://", "https://"}) {
    if (url.substr(0, scheme.size()) == scheme) {
      const auto rest = url.substr(scheme.size());
      const auto host = rest.substr(0, rest.find('/'));
      return !host.empty() && host.front() != ':';
    }
  }
  return false;
}

FunctionConfig parse_record(const json& j, std::size_t index) {
  std::string name = "#" + std::to_string(index);
  if (!j.is_object()) invalid(name, "_id", "belongs to a record that is not an object");

  FunctionConfig cfg;
  cfg.id = require_string(j, name, "_id");
  name = "'" + cfg.id + "'";

  if (require_string(j, name, "functionHttpMethod") != "POST") {
    invalid(name, "functionHttpMethod", "must be POST");
  }
  cfg.backendUrl = require_string(j, name, "functionBackendUrl");
  if (!is_absolute_url(cfg.backendUrl)) invalid(name, "functionBackendUrl", "must be an absolute http(s) URL");

  const auto& params = require(j, name, "functionParams");
  if (!params.is_object()) invalid(name, "functionParams", "must be an object");
  if (require_string(params, name, "functionParams.body") != kBodyPlaceholder) {
    invalid(name, "functionParams.body", "must be \"" + std::string(kBodyPlaceholder) + "\"");
  }
  const auto& headers = require(params, name, "functionParams.headers");
  if (!headers.is_object()) invalid(name, "functionParams.headers", "must be an object");
  for (const auto& [key, value] : headers.items()) {
    if (!value.is_string()) invalid(name, "functionParams.headers." + key, "must be a string");
    cfg.headers[key] = value.get<std::string>();
  }
  for (const char* key : {"Authorization", "Content-Type", "Accept"}) {
    if (!cfg.headers.count(key)) invalid(name, std::string("functionParams.headers.") + key, "is missing");
  }
  return cfg;
}

json to_json(const FunctionConfig& config) {
  return json{{"_id", config.id},
              {"functionHttpMethod", "POST"},
              {"functionBackendUrl", config.backendUrl},
              {"functionParams", {{"body", kBodyPlaceholder}, {"headers", config.headers}}}};
}

ConfigSet parse(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(ConfigError::Code::ParseError, std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_array()) throw ConfigError(ConfigError::Code::ParseError, "config must be a JSON array of records");
  if (doc.empty()) throw ConfigError(ConfigError::Code::ValidationError, "config contains no records");

  std::map<std::string, FunctionConfig> records;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    auto cfg = parse_record(doc[i], i);
    if (records.count(cfg.id)) invalid("'" + cfg.id + "'", "_id", "is duplicated");
    records.emplace(cfg.id, std::move(cfg));
  }
  return ConfigSet(std::move(records));
}

ConfigSet load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(ConfigError::Code::ParseError, "cannot open config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

std::string dump(const ConfigSet& set) {
  json doc = json::array();
  for (const auto& [_, cfg] : set.records()) doc.push_back(to_json(cfg));
  return doc.dump(2);
}

void save(const ConfigSet& set, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw ConfigError(ConfigError::Code::ParseError, "cannot write config file " + path.string());
  out << dump(set) << '\n';
}

InvocationRequest render_invocation(const FunctionConfig& config, std::string requestBody,
                                    std::string_view authToken) {
  if (requestBody.empty()) throw std::invalid_argument("request body must not be empty");
  InvocationRequest req;
  req.method = config.httpMethod;
  req.url = config.backendUrl;
  req.headers = config.headers;
  req.headers["Authorization"] = "Bearer " + std::string(authToken);
  req.body = std::move(requestBody);
  return req;
}

ConfigStore::ConfigStore(std::filesystem::path path, Preprocessor preprocess)
    : path_(std::move(path)), preprocess_(std::move(preprocess)) {
  current_ = std::make_shared<const ConfigSet>(read());
}

ConfigSet ConfigStore::read() const {
  if (!preprocess_) return load(path_);
  std::ifstream in(path_);
  if (!in) throw ConfigError(ConfigError::Code::ParseError, "cannot open config file " + path_.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(preprocess_(buf.str()));
}

ConfigStore::ConfigStore(ConfigSet set) : current_(std::make_shared<const ConfigSet>(std::move(set))) {}

std::shared_ptr<const ConfigSet> ConfigStore::snapshot() const {
  std::lock_guard lock(mu_);
  return current_;
}

void ConfigStore::reload() {
  if (path_.empty()) return;
  auto fresh = std::make_shared<const ConfigSet>(read());
  std::lock_guard lock(mu_);
  current_ = std::move(fresh);
}

}  // namespace qbridge::config
