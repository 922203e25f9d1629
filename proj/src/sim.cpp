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

#include "postvar/sim.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <stdexcept>

namespace postvar {

namespace {

using cd = std::complex<double>;

constexpr double kNormTolerance = 1e-10;

void check_qubits(int n) {
    if (n < 1 || n > kQubitCap) {
        throw std::invalid_argument("qubit count must be in [1, " +
                                    std::to_string(kQubitCap) + "], got " +
                                    std::to_string(n));
    }
}

void check_gate_indices(const Gate& gate, int n) {
    if (gate.q0 < 0 || gate.q0 >= n) {
        throw std::invalid_argument("gate qubit index out of range");
    }
    if (gate.kind == Gate::Kind::CNOT) {
        if (gate.q1 < 0 || gate.q1 >= n) {
            throw std::invalid_argument("gate qubit index out of range");
        }
        if (gate.q0 == gate.q1) {
            throw std::invalid_argument("CNOT control and target must differ");
        }
    }
}

std::array<cd, 4> rotation_matrix(const Gate& gate) {
    const double c = std::cos(gate.angle / 2.0);
    const double s = std::sin(gate.angle / 2.0);
    switch (gate.kind) {
        case Gate::Kind::RX:
            return {cd(c, 0), cd(0, -s), cd(0, -s), cd(c, 0)};
        case Gate::Kind::RY:
            return {cd(c, 0), cd(-s, 0), cd(s, 0), cd(c, 0)};
        case Gate::Kind::RZ:
            return {cd(c, -s), cd(0, 0), cd(0, 0), cd(c, s)};
        default:
            throw std::logic_error("not a rotation gate");
    }
}

// u is row-major [u00 u01; u10 u11]; qubit q maps to index bit (n-1-q).
void apply_single_qubit(std::vector<cd>& amps, int n, int qubit,
                        const std::array<cd, 4>& u) {
    const std::size_t stride = std::size_t{1} << (n - 1 - qubit);
    const std::size_t size = amps.size();
    for (std::size_t block = 0; block < size; block += 2 * stride) {
        for (std::size_t i = block; i < block + stride; ++i) {
            const cd a0 = amps[i];
            const cd a1 = amps[i + stride];
            amps[i] = u[0] * a0 + u[1] * a1;
            amps[i + stride] = u[2] * a0 + u[3] * a1;
        }
    }
}

void apply_cnot(std::vector<cd>& amps, int n, int control, int target) {
    const std::size_t cmask = std::size_t{1} << (n - 1 - control);
    const std::size_t tmask = std::size_t{1} << (n - 1 - target);
    const std::size_t size = amps.size();
    for (std::size_t i = 0; i < size; ++i) {
        if ((i & cmask) != 0 && (i & tmask) == 0) {
            std::swap(amps[i], amps[i | tmask]);
        }
    }
}

void apply_gate_inplace(std::vector<cd>& amps, int n, const Gate& gate) {
    check_gate_indices(gate, n);
    if (gate.kind == Gate::Kind::CNOT) {
        apply_cnot(amps, n, gate.q0, gate.q1);
    } else {
        apply_single_qubit(amps, n, gate.q0, rotation_matrix(gate));
    }
}

char basis_letter_at(std::string_view basis, int q) {
    const char letter = basis[static_cast<std::size_t>(q)];
    if (letter != 'X' && letter != 'Y' && letter != 'Z') {
        throw std::invalid_argument("measurement basis may only contain X, Y, Z");
    }
    return letter;
}

}  // namespace

Circuit adjoint(const Circuit& circuit) {
    Circuit reversed(circuit.num_qubits);
    reversed.gates.reserve(circuit.gates.size());
    for (auto it = circuit.gates.rbegin(); it != circuit.gates.rend(); ++it) {
        Gate g = *it;
        if (g.kind != Gate::Kind::CNOT) {
            g.angle = -g.angle;
        }
        reversed.gates.push_back(g);
    }
    return reversed;
}

StateVector StateVector::zero_state(int num_qubits) {
    check_qubits(num_qubits);
    std::vector<cd> amps(std::size_t{1} << num_qubits, cd(0.0, 0.0));
    amps[0] = cd(1.0, 0.0);
    return StateVector(num_qubits, std::move(amps));
}

StateVector StateVector::from_amplitudes(int num_qubits, std::vector<cd> amplitudes) {
    check_qubits(num_qubits);
    if (amplitudes.size() != (std::size_t{1} << num_qubits)) {
        throw std::invalid_argument("amplitude count must be exactly 2^n");
    }
    StateVector state(num_qubits, std::move(amplitudes));
    if (std::abs(state.norm() - 1.0) > kNormTolerance) {
        throw std::invalid_argument("state vector is not normalised");
    }
    return state;
}

double StateVector::norm() const {
    double sum = 0.0;
    for (const cd& a : amps_) {
        sum += std::norm(a);
    }
    return std::sqrt(sum);
}

StateVector apply_gate(const StateVector& state, const Gate& gate) {
    StateVector next = state;
    apply_gate_inplace(next.amps_, next.n_, gate);
    return next;
}

StateVector run_circuit(const StateVector& state, const Circuit& circuit) {
    if (circuit.num_qubits != state.num_qubits()) {
        throw std::invalid_argument("circuit width does not match the state");
    }
    StateVector next = state;
    for (const Gate& gate : circuit.gates) {
        apply_gate_inplace(next.amps_, next.n_, gate);
    }
    return next;
}

double expectation(const StateVector& state, const PauliString& pauli) {
    if (pauli.num_qubits() != state.num_qubits()) {
        throw std::invalid_argument("pauli word length does not match the state");
    }
    const auto& amps = state.amplitudes();
    const auto x = static_cast<std::uint64_t>(pauli.x_mask());
    const auto z = static_cast<std::uint64_t>(pauli.z_mask());
    const int y_count = std::popcount(pauli.x_mask() & pauli.z_mask());

    // <psi|P|psi> = sum_i conj(psi[i ^ x]) * phase(i) * psi[i] with
    // phase(i) = i^{#Y} (-1)^{popcount(i & z)}.  The result is real for
    // any Pauli word; the imaginary parts cancel pairwise.
    cd acc(0.0, 0.0);
    for (std::size_t i = 0; i < amps.size(); ++i) {
        const double sign = (std::popcount(i & z) & 1) ? -1.0 : 1.0;
        acc += std::conj(amps[i ^ x]) * (sign * amps[i]);
    }
    static constexpr cd kIPow[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
    return (kIPow[y_count & 3] * acc).real();
}

double state_fidelity(const StateVector& a, const StateVector& b) {
    if (a.num_qubits() != b.num_qubits()) {
        throw std::invalid_argument("states have different qubit counts");
    }
    cd overlap(0.0, 0.0);
    const auto& av = a.amplitudes();
    const auto& bv = b.amplitudes();
    for (std::size_t i = 0; i < av.size(); ++i) {
        overlap += std::conj(av[i]) * bv[i];
    }
    return std::norm(overlap);
}

std::vector<double> basis_probabilities(const StateVector& state,
                                        std::string_view basis) {
    const int n = state.num_qubits();
    if (static_cast<int>(basis.size()) != n) {
        throw std::invalid_argument("basis word length does not match the state");
    }
    static const double kInvSqrt2 = 1.0 / std::sqrt(2.0);
    // H and H * S^dagger as row-major 2x2 blocks.
    static const std::array<cd, 4> kHadamard = {
        cd(kInvSqrt2, 0), cd(kInvSqrt2, 0), cd(kInvSqrt2, 0), cd(-kInvSqrt2, 0)};
    static const std::array<cd, 4> kHadamardSdg = {
        cd(kInvSqrt2, 0), cd(0, -kInvSqrt2), cd(kInvSqrt2, 0), cd(0, kInvSqrt2)};

    std::vector<cd> amps = state.amplitudes();
    for (int q = 0; q < n; ++q) {
        switch (basis_letter_at(basis, q)) {
            case 'X':
                apply_single_qubit(amps, n, q, kHadamard);
                break;
            case 'Y':
                apply_single_qubit(amps, n, q, kHadamardSdg);
                break;
            default:
                break;
        }
    }
    std::vector<double> probs(amps.size());
    for (std::size_t i = 0; i < amps.size(); ++i) {
        probs[i] = std::norm(amps[i]);
    }
    return probs;
}

std::uint64_t sample_index(const std::vector<double>& probabilities, Rng& rng) {
    const double draw = rng.uniform01();
    double cumulative = 0.0;
    for (std::size_t i = 0; i < probabilities.size(); ++i) {
        cumulative += probabilities[i];
        if (draw < cumulative) {
            return i;
        }
    }
    return probabilities.size() - 1;  // rounding slack
}

std::uint64_t sample_in_basis(const StateVector& state, std::string_view basis,
                              Rng& rng) {
    const std::vector<double> probs = basis_probabilities(state, basis);
    const std::uint64_t index = sample_index(probs, rng);
    // Repack: index bit (n-1-q) -> result bit q.
    const int n = state.num_qubits();
    std::uint64_t bits = 0;
    for (int q = 0; q < n; ++q) {
        bits |= ((index >> (n - 1 - q)) & 1ULL) << q;
    }
    return bits;
}

std::string bits_to_string(std::uint64_t bits, int num_qubits) {
    std::string out(static_cast<std::size_t>(num_qubits), '0');
    for (int q = 0; q < num_qubits; ++q) {
        if ((bits >> q) & 1ULL) {
            out[static_cast<std::size_t>(q)] = '1';
        }
    }
    return out;
}

Eigen::MatrixXcd dense_unitary(const Circuit& circuit) {
    if (circuit.num_qubits > 6) {
        throw std::invalid_argument("dense unitaries are capped at 6 qubits");
    }
    const int n = circuit.num_qubits;
    const Eigen::Index dim = Eigen::Index{1} << n;
    Eigen::MatrixXcd u(dim, dim);
    for (Eigen::Index col = 0; col < dim; ++col) {
        std::vector<cd> amps(static_cast<std::size_t>(dim), cd(0.0, 0.0));
        amps[static_cast<std::size_t>(col)] = cd(1.0, 0.0);
        for (const Gate& gate : circuit.gates) {
            apply_gate_inplace(amps, n, gate);
        }
        for (Eigen::Index row = 0; row < dim; ++row) {
            u(row, col) = amps[static_cast<std::size_t>(row)];
        }
    }
    return u;
}

}  // namespace postvar
