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

#include "qbridge/qsim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace qbridge::qsim {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;

// Independent stream for readout noise so that a zero flip probability leaves
// the measurement stream untouched.
constexpr std::uint64_t kNoiseStreamSalt = 0x9e3779b97f4a7c15ULL;

void check_bits(std::string_view bits) {
  if (bits.empty() || bits.size() > static_cast<std::size_t>(kMaxQubits)) {
    throw QsimError(QsimError::Code::InvalidBitstring,
                    "bitstring length must be in 1.." + std::to_string(kMaxQubits));
  }
  for (char c : bits) {
    if (c != '0' && c != '1') {
      throw QsimError(QsimError::Code::InvalidBitstring, "bitstring contains '" + std::string(1, c) + "'");
    }
  }
}

}  // namespace

void validate(const NoiseModel& noise) {
  if (!(noise.readoutFlipProb >= 0.0 && noise.readoutFlipProb <= 0.5)) {
    throw QsimError(QsimError::Code::InvalidNoise, "readoutFlipProb must lie in [0, 0.5]");
  }
}

void validate(const CircuitSpec& circuit) {
  if (circuit.numQubits > kMaxQubits) {
    throw QsimError(QsimError::Code::CircuitTooLarge, "circuit has " + std::to_string(circuit.numQubits) +
                                                          " qubits, limit is " + std::to_string(kMaxQubits));
  }
  if (circuit.numQubits < 1) {
    throw QsimError(QsimError::Code::MalformedCircuit, "circuit needs at least one qubit");
  }
  auto in_range = [&](int q) { return q >= 0 && q < circuit.numQubits; };
  for (std::size_t i = 0; i < circuit.gates.size(); ++i) {
    const auto& g = circuit.gates[i];
    if (!in_range(g.target) || (g.kind == GateKind::CNOT && !in_range(g.control))) {
      throw QsimError(QsimError::Code::IndexOutOfRange, "gate " + std::to_string(i) + " addresses a qubit outside 0.." +
                                                            std::to_string(circuit.numQubits - 1));
    }
    if (g.kind == GateKind::CNOT && g.control == g.target) {
      throw QsimError(QsimError::Code::MalformedCircuit, "gate " + std::to_string(i) + ": CNOT control equals target");
    }
  }
}

Statevector::Statevector(int num_qubits) : num_qubits_(num_qubits) {
  if (num_qubits > kMaxQubits) {
    throw QsimError(QsimError::Code::CircuitTooLarge, "statevector limited to " + std::to_string(kMaxQubits) + " qubits");
  }
  if (num_qubits < 1) throw QsimError(QsimError::Code::MalformedCircuit, "statevector needs at least one qubit");
  amps_.assign(std::size_t{1} << static_cast<unsigned>(num_qubits), Amplitude{0.0, 0.0});
  amps_[0] = 1.0;
}

void Statevector::check_qubit(int qubit) const {
  if (qubit < 0 || qubit >= num_qubits_) {
    throw QsimError(QsimError::Code::IndexOutOfRange,
                    "qubit " + std::to_string(qubit) + " out of range for " + std::to_string(num_qubits_) + " qubits");
  }
}

void Statevector::apply(const Gate& gate) {
  check_qubit(gate.target);
  const std::size_t t = mask_of(gate.target);
  const std::size_t dim = amps_.size();
  switch (gate.kind) {
    case GateKind::X:
      for (std::size_t i = 0; i < dim; ++i) {
        if (!(i & t)) std::swap(amps_[i], amps_[i | t]);
      }
      break;
    case GateKind::H:
      for (std::size_t i = 0; i < dim; ++i) {
        if (i & t) continue;
        const Amplitude a = amps_[i];
        const Amplitude b = amps_[i | t];
        amps_[i] = (a + b) * kInvSqrt2;
        amps_[i | t] = (a - b) * kInvSqrt2;
      }
      break;
    case GateKind::CNOT: {
      check_qubit(gate.control);
      if (gate.control == gate.target) {
        throw QsimError(QsimError::Code::MalformedCircuit, "CNOT control equals target");
      }
      const std::size_t c = mask_of(gate.control);
      for (std::size_t i = 0; i < dim; ++i) {
        if ((i & c) && !(i & t)) std::swap(amps_[i], amps_[i | t]);
      }
      break;
    }
  }
}

double Statevector::norm() const {
  double sum = 0.0;
  for (const auto& a : amps_) sum += std::norm(a);
  return std::sqrt(sum);
}

std::vector<double> Statevector::probabilities() const {
  std::vector<double> p(amps_.size());
  std::transform(amps_.begin(), amps_.end(), p.begin(), [](const Amplitude& a) { return std::norm(a); });
  return p;
}

std::size_t Statevector::index_of(std::string_view bits) {
  check_bits(bits);
  std::size_t idx = 0;
  for (char c : bits) idx = (idx << 1) | static_cast<std::size_t>(c == '1');
  return idx;
}

std::string Statevector::bits_of(std::size_t index, int num_qubits) {
  std::string bits(static_cast<std::size_t>(num_qubits), '0');
  for (int q = 0; q < num_qubits; ++q) {
    if (index & (std::size_t{1} << static_cast<unsigned>(num_qubits - 1 - q))) bits[static_cast<std::size_t>(q)] = '1';
  }
  return bits;
}

Statevector apply_gate(Statevector state, const Gate& gate) {
  state.apply(gate);
  return state;
}

Statevector evolve(const CircuitSpec& circuit) {
  validate(circuit);
  Statevector state(circuit.numQubits);
  for (const auto& g : circuit.gates) state.apply(g);
  return state;
}

Counts simulate(const CircuitSpec& circuit, std::int64_t shots, std::uint64_t seed,
                const std::optional<NoiseModel>& noise) {
  if (shots < 1) throw QsimError(QsimError::Code::InvalidShots, "shots must be >= 1");
  if (noise) validate(*noise);
  const Statevector state = evolve(circuit);

  std::vector<double> cdf = state.probabilities();
  std::partial_sum(cdf.begin(), cdf.end(), cdf.begin());
  const double total = cdf.back();

  std::mt19937_64 rng(seed);
  std::mt19937_64 noise_rng(seed ^ kNoiseStreamSalt);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);

  std::map<std::size_t, std::int64_t> by_index;
  for (std::int64_t s = 0; s < shots; ++s) {
    const double r = uniform(rng) * total;
    auto it = std::upper_bound(cdf.begin(), cdf.end(), r);
    if (it == cdf.end()) --it;
    ++by_index[static_cast<std::size_t>(it - cdf.begin())];
  }

  Counts counts;
  const int n = circuit.numQubits;
  for (const auto& [idx, hits] : by_index) {
    if (!noise || noise->readoutFlipProb == 0.0) {
      counts[Statevector::bits_of(idx, n)] += hits;
      continue;
    }
    const std::string ideal = Statevector::bits_of(idx, n);
    for (std::int64_t h = 0; h < hits; ++h) {
      std::string observed = ideal;
      for (auto& bit : observed) {
        if (uniform(noise_rng) < noise->readoutFlipProb) bit = bit == '0' ? '1' : '0';
      }
      ++counts[observed];
    }
  }
  return counts;
}

CircuitSpec build_superposition_circuit(std::string_view bitsA, std::string_view bitsB) {
  check_bits(bitsA);
  check_bits(bitsB);
  if (bitsA.size() != bitsB.size()) {
    throw QsimError(QsimError::Code::LengthMismatch, "bitstrings differ in length (" + std::to_string(bitsA.size()) +
                                                         " vs " + std::to_string(bitsB.size()) + ")");
  }
  const int n = static_cast<int>(bitsA.size());
  CircuitSpec circuit{n, {}, true};

  std::vector<int> differing;
  for (int i = 0; i < n; ++i) {
    if (bitsA[static_cast<std::size_t>(i)] != bitsB[static_cast<std::size_t>(i)]) differing.push_back(i);
  }

  std::string_view base = bitsA;
  // The pivot must start at |0> so H leaves both branches with +1/sqrt(2).
  if (!differing.empty() && bitsA[static_cast<std::size_t>(differing.front())] == '1') base = bitsB;

  for (int i = 0; i < n; ++i) {
    if (base[static_cast<std::size_t>(i)] == '1') circuit.gates.push_back(Gate::x(i));
  }
  if (!differing.empty()) {
    const int pivot = differing.front();
    circuit.gates.push_back(Gate::h(pivot));
    for (auto it = differing.begin() + 1; it != differing.end(); ++it) {
      circuit.gates.push_back(Gate::cnot(pivot, *it));
    }
  }
  return circuit;
}

void to_json(nlohmann::json& j, const Gate& gate) {
  switch (gate.kind) {
    case GateKind::X: j = nlohmann::json::array({"X", gate.target}); break;
    case GateKind::H: j = nlohmann::json::array({"H", gate.target}); break;
    case GateKind::CNOT: j = nlohmann::json::array({"CNOT", gate.control, gate.target}); break;
  }
}

void from_json(const nlohmann::json& j, Gate& gate) {
  if (!j.is_array() || j.empty() || !j[0].is_string()) {
    throw QsimError(QsimError::Code::MalformedCircuit, "gate must be [name, qubits...]");
  }
  const auto name = j[0].get<std::string>();
  auto qubit = [&](std::size_t i) {
    if (i >= j.size() || !j[i].is_number_integer()) {
      throw QsimError(QsimError::Code::MalformedCircuit, "gate " + name + " needs integer qubit operands");
    }
    return j[i].get<int>();
  };
  if (name == "X" && j.size() == 2) {
    gate = Gate::x(qubit(1));
  } else if (name == "H" && j.size() == 2) {
    gate = Gate::h(qubit(1));
  } else if (name == "CNOT" && j.size() == 3) {
    gate = Gate::cnot(qubit(1), qubit(2));
  } else {
    throw QsimError(QsimError::Code::MalformedCircuit, "unsupported gate '" + j.dump() + "'");
  }
}

void to_json(nlohmann::json& j, const CircuitSpec& circuit) {
  j = nlohmann::json{{"numQubits", circuit.numQubits}, {"gates", circuit.gates}};
}

void from_json(const nlohmann::json& j, CircuitSpec& circuit) {
  if (!j.is_object() || !j.contains("numQubits") || !j["numQubits"].is_number_integer() || !j.contains("gates") ||
      !j["gates"].is_array()) {
    throw QsimError(QsimError::Code::MalformedCircuit, "circuit must carry integer numQubits and a gates array");
  }
  circuit.numQubits = j["numQubits"].get<int>();
  circuit.gates = j["gates"].get<std::vector<Gate>>();
  circuit.measureAll = true;
}

}  // namespace qbridge::qsim
