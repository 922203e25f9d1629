// Copyright 2025 The postvar developers
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include "postvar/pauli.hpp"
#include "postvar/rng.hpp"

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace postvar {

/// Dense simulation refuses registers larger than this.
inline constexpr int kQubitCap = 20;

/// One-parameter rotations follow exp(-i angle P / 2); the +-pi/2 shift
/// rule for first derivatives is exact under this convention.
struct Gate {
    enum class Kind { RX, RY, RZ, CNOT };

    Kind kind = Kind::RY;
    double angle = 0.0;  // radians; ignored for CNOT
    int q0 = 0;          // rotation target, or CNOT control
    int q1 = 0;          // CNOT target

    static Gate rx(double angle, int qubit) { return {Kind::RX, angle, qubit, qubit}; }
    static Gate ry(double angle, int qubit) { return {Kind::RY, angle, qubit, qubit}; }
    static Gate rz(double angle, int qubit) { return {Kind::RZ, angle, qubit, qubit}; }
    static Gate cnot(int control, int target) { return {Kind::CNOT, 0.0, control, target}; }
};

struct Circuit {
    int num_qubits = 1;
    std::vector<Gate> gates;

    explicit Circuit(int n = 1) : num_qubits(n) {}

    Circuit& append(const Gate& g) {
        gates.push_back(g);
        return *this;
    }
};

/// Gate-reversed circuit with negated rotation angles (CNOT is self-inverse).
Circuit adjoint(const Circuit& circuit);

/// Normalised pure state over 2^n basis states.  Qubit 0 is the most
/// significant bit of the basis index, so |10> on two qubits is index 2.
class StateVector {
  public:
    static StateVector zero_state(int num_qubits);

    /// Validates the length (2^n) and the l2 norm (within 1e-10).
    static StateVector from_amplitudes(int num_qubits,
                                       std::vector<std::complex<double>> amplitudes);

    int num_qubits() const { return n_; }
    const std::vector<std::complex<double>>& amplitudes() const { return amps_; }
    double norm() const;

  private:
    StateVector(int n, std::vector<std::complex<double>> amps)
        : n_(n), amps_(std::move(amps)) {}

    friend StateVector apply_gate(const StateVector&, const Gate&);
    friend StateVector run_circuit(const StateVector&, const Circuit&);
    friend std::vector<double> basis_probabilities(const StateVector&, std::string_view);

    int n_;
    std::vector<std::complex<double>> amps_;
};

StateVector apply_gate(const StateVector& state, const Gate& gate);

/// Applies the gates in list order; the empty circuit is the identity.
StateVector run_circuit(const StateVector& state, const Circuit& circuit);

/// <psi| P |psi>, computed by mask arithmetic over the amplitudes.
double expectation(const StateVector& state, const PauliString& pauli);

/// |<a|b>|^2.
double state_fidelity(const StateVector& a, const StateVector& b);

/// Born probabilities after rotating each qubit into the requested
/// measurement basis (H for X, H S^dagger for Y, nothing for Z).  `basis`
/// is a word over {X, Y, Z} with one letter per qubit.
std::vector<double> basis_probabilities(const StateVector& state,
                                        std::string_view basis);

/// One computational-basis sample from a probability table; returns the
/// sampled basis index.
std::uint64_t sample_index(const std::vector<double>& probabilities, Rng& rng);

/// Rotates into `basis` and samples one outcome.  Bit q of the result is
/// the measured bit of qubit q.
std::uint64_t sample_in_basis(const StateVector& state, std::string_view basis,
                              Rng& rng);

/// Renders packed outcome bits as a string, qubit 0 first.
std::string bits_to_string(std::uint64_t bits, int num_qubits);

/// Full unitary of a circuit as a dense matrix (n <= 6).
Eigen::MatrixXcd dense_unitary(const Circuit& circuit);

}  // namespace postvar
