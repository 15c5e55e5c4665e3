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

// Reference computations written without any qbridge code, used to check it.

#pragma once

#include <algorithm>
#include <bitset>
#include <cmath>
#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace qbridge::oracle {

/// Basis index of a bitstring whose leftmost character is qubit 0 (the most significant bit).
inline std::size_t basis_index(const std::string& bits) {
  std::size_t index = 0;
  for (char c : bits) index = (index << 1) | static_cast<std::size_t>(c == '1');
  return index;
}

/// Exact target state: 1/sqrt(2) on |a> and |b>, or 1 on |a> when a == b.
inline std::vector<std::complex<double>> two_basis_state(const std::string& a, const std::string& b) {
  std::vector<std::complex<double>> psi(std::size_t{1} << a.size(), 0.0);
  if (a == b) {
    psi[basis_index(a)] = 1.0;
  } else {
    psi[basis_index(a)] = 1.0 / std::sqrt(2.0);
    psi[basis_index(b)] = 1.0 / std::sqrt(2.0);
  }
  return psi;
}

/// Bitstrings of the given length, counting up from all zeros.
inline std::vector<std::string> all_bitstrings(int length) {
  std::vector<std::string> out;
  for (std::size_t v = 0; v < (std::size_t{1} << length); ++v) {
    std::string s(static_cast<std::size_t>(length), '0');
    for (int i = 0; i < length; ++i) {
      if (v >> (length - 1 - i) & 1) s[static_cast<std::size_t>(i)] = '1';
    }
    out.push_back(s);
  }
  return out;
}

/// 8 bits per character, most significant first; every character must be < 256.
inline std::string latin1_bits(const std::u32string& text) {
  std::string out;
  for (char32_t c : text) out += std::bitset<8>(static_cast<unsigned long>(c)).to_string();
  return out;
}

struct FleetEntry {
  std::string name;
  int qubits = 0;
  bool simulator = false;
  int pending = 0;
};

/// Filter by eligibility, then sort by (pending, name) and take the first.
inline std::optional<std::string> least_busy(std::vector<FleetEntry> fleet, int minQubits, bool realOnly) {
  fleet.erase(std::remove_if(fleet.begin(), fleet.end(),
                             [&](const FleetEntry& e) { return e.qubits < minQubits || (realOnly && e.simulator); }),
              fleet.end());
  if (fleet.empty()) return std::nullopt;
  std::sort(fleet.begin(), fleet.end(), [](const FleetEntry& x, const FleetEntry& y) {
    return x.pending != y.pending ? x.pending < y.pending : x.name < y.name;
  });
  return fleet.front().name;
}

/// mean +- k * sigma for a binomial(n, p) count.
struct Band {
  double low;
  double high;
  bool contains(double v) const { return v >= low && v <= high; }
};

inline Band binomial_band(std::int64_t n, double p, double k) {
  const double mean = static_cast<double>(n) * p;
  const double sigma = std::sqrt(static_cast<double>(n) * p * (1 - p));
  return {mean - k * sigma, mean + k * sigma};
}

}  // namespace qbridge::oracle
