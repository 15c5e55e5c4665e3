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

#include "qbridge/timeutil.hpp"

#include <cstdio>
#include <ctime>
#include <stdexcept>

namespace qbridge {

std::string format_timestamp(TimePoint tp) {
  const auto ms = std::chrono::duration_cast<Millis>(tp.time_since_epoch()).count();
  std::time_t secs = static_cast<std::time_t>(ms / 1000);
  int frac = static_cast<int>(ms % 1000);
  if (frac < 0) {
    frac += 1000;
    --secs;
  }
  std::tm utc{};
  gmtime_r(&secs, &utc);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ", utc.tm_year + 1900,
                utc.tm_mon + 1, utc.tm_mday, utc.tm_hour, utc.tm_min, utc.tm_sec, frac);
  return buf;
}

TimePoint parse_timestamp(std::string_view text) {
  std::tm utc{};
  int frac = 0;
  int consumed = 0;
  const std::string s(text);
  const int n = std::sscanf(s.c_str(), "%4d-%2d-%2dT%2d:%2d:%2d.%3dZ%n", &utc.tm_year, &utc.tm_mon,
                            &utc.tm_mday, &utc.tm_hour, &utc.tm_min, &utc.tm_sec, &frac, &consumed);
  if (n != 7 || consumed != static_cast<int>(s.size())) {
    throw std::invalid_argument("malformed timestamp: " + s);
  }
  utc.tm_year -= 1900;
  utc.tm_mon -= 1;
  const std::time_t secs = timegm(&utc);
  return TimePoint{} + std::chrono::seconds(secs) + Millis(frac);
}

}  // namespace qbridge
