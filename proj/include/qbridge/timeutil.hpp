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

#include <chrono>
#include <string>
#include <string_view>

namespace qbridge {

using Clock = std::chrono::system_clock;
using TimePoint = Clock::time_point;
using Millis = std::chrono::milliseconds;

/// Wall-clock timestamps travel on the wire as UTC ISO-8601 with millisecond
/// precision, e.g. "2026-10-16T11:02:03.123Z".
std::string format_timestamp(TimePoint tp);

/// Inverse of format_timestamp. Throws std::invalid_argument on malformed input.
TimePoint parse_timestamp(std::string_view text);

/// Truncates to the precision that survives a format/parse round trip.
inline TimePoint wire_precision(TimePoint tp) {
  return std::chrono::time_point_cast<Millis>(tp);
}

}  // namespace qbridge
