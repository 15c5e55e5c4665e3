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

#include <complex>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace qbridge::qsim {

/// Largest register the simulator accepts: 2^20 amplitudes.
inline constexpr int kMaxQubits = 20;

class QsimError : public std::runtime_error {
 public:
  enum class Code {
    IndexOutOfRange,
    CircuitTooLarge,
    LengthMismatch,
    InvalidBitstring,
    InvalidShots,
    InvalidNoise,
    MalformedCircuit,
  };

  QsimError(Code code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Code code() const noexcept { return code_; }

 private:
  Code code_;
};

enum class GateKind { X, H, CNOT };

struct Gate {
  GateKind kind = GateKind::X;
  int target = 0;
  int control = -1;  // CNOT only

  static Gate x(int q) { return {GateKind::X, q, -1}; }
  static Gate h(int q) { return {GateKind::H, q, -1}; }
  static Gate cnot(int control, int target) { return {GateKind::CNOT, target, control}; }

  friend bool operator==(const Gate&, const Gate&) = default;
};

struct CircuitSpec {
  int numQubits = 1;
  std::vector<Gate> gates;
  bool measureAll = true;

  friend bool operator==(const CircuitSpec&, const CircuitSpec&) = default;
};

/// Bitstring keyed histogram. Position i of each key is qubit i (leftmost = qubit 0).
using Counts = std::map<std::string, std::int64_t>;

struct NoiseModel {
  double readoutFlipProb = 0.0;

  friend bool operator==(const NoiseModel&, const NoiseModel&) = default;
};

void validate(const NoiseModel& noise);

/// Throws CircuitTooLarge, IndexOutOfRange or MalformedCircuit.
void validate(const CircuitSpec& circuit);

/// Dense amplitude vector over n qubits.
///
/// Basis index bit (n - 1 - q) holds qubit q, so writing an index in binary with
/// n digits yields the bitstring with qubit 0 leftmost.
class Statevector {
 public:
  using Amplitude = std::complex<double>;

  /// |0...0> on num_qubits qubits.
  explicit Statevector(int num_qubits);

  int num_qubits() const noexcept { return num_qubits_; }
  std::span<const Amplitude> amplitudes() const noexcept { return amps_; }
  std::span<Amplitude> mutable_amplitudes() noexcept { return amps_; }

  void apply(const Gate& gate);
  double norm() const;
  std::vector<double> probabilities() const;

  /// Basis index of a bitstring under the ordering above.
  static std::size_t index_of(std::string_view bits);
  static std::string bits_of(std::size_t index, int num_qubits);

 private:
  std::size_t mask_of(int qubit) const noexcept {
    return std::size_t{1} << static_cast<unsigned>(num_qubits_ - 1 - qubit);
  }
  void check_qubit(int qubit) const;

  int num_qubits_;
  std::vector<Amplitude> amps_;
};

Statevector apply_gate(Statevector state, const Gate& gate);

/// Exact final state of the circuit started from |0...0>.
Statevector evolve(const CircuitSpec& circuit);

/// Samples `shots` full-register measurements. Deterministic in all arguments.
Counts simulate(const CircuitSpec& circuit, std::int64_t shots, std::uint64_t seed,
                const std::optional<NoiseModel>& noise = std::nullopt);

/// Circuit whose ideal distribution is {a: .5, b: .5}, or {a: 1} when a == b.
CircuitSpec build_superposition_circuit(std::string_view bitsA, std::string_view bitsB);

// Wire format: {"numQubits": n, "gates": [["X", q] | ["H", q] | ["CNOT", c, t], ...]}
void to_json(nlohmann::json& j, const Gate& gate);
void from_json(const nlohmann::json& j, Gate& gate);
void to_json(nlohmann::json& j, const CircuitSpec& circuit);
void from_json(const nlohmann::json& j, CircuitSpec& circuit);

// ---------------------------------------------------------------------------
// Two-character emoticon encoding (8-bit Latin-1 per character).

class EmoticonError : public std::runtime_error {
 public:
  enum class Code { WrongLength, NonEncodableCharacter, InvalidUtf8, UndecodableKey };

  EmoticonError(Code code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Code code() const noexcept { return code_; }

 private:
  Code code_;
};

/// UTF-8 text of exactly two characters with code points <= 255 -> 16-bit string.
std::string encode_emoticon(std::string_view utf8);

/// 16-bit string -> UTF-8 text. C0/C1 control code points have no glyph and throw
/// UndecodableKey.
std::string decode_emoticon(std::string_view bits);

/// Bitstring counts -> emoticon frequencies (count / total shots).
std::map<std::string, double> decode_counts(const Counts& counts);

}  // namespace qbridge::qsim
