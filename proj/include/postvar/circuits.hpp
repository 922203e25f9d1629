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

#include "postvar/sim.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace postvar {

/// Parameter assignment with every entry in {0, +pi/2, -pi/2}.  These are
/// the absolute parameter values of one fixed circuit in the shifted
/// ensemble (expansion around the all-zero setting).
struct ShiftVector {
    std::vector<double> values;

    static ShiftVector zeros(int parameter_count) {
        return ShiftVector{std::vector<double>(static_cast<std::size_t>(parameter_count), 0.0)};
    }

    int size() const { return static_cast<int>(values.size()); }

    /// Count of nonzero entries (the derivative order of the circuit).
    int order() const;

    /// Compact rendering, one char per entry: '0', '+' or '-'.
    std::string signs() const;

    static ShiftVector from_signs(std::string_view signs);

    friend bool operator==(const ShiftVector& a, const ShiftVector& b) {
        return a.values == b.values;
    }
};

/// Throws std::invalid_argument unless every entry is 0 or +-pi/2 (exact).
void validate_shift(const ShiftVector& shift);

/// Ring direction policy for the entangling layers.  A plain repeated ring
/// is not the identity at zero parameters; alternating the second ring's
/// gate order makes the two rings cancel (CNOT is self-inverse), which is
/// what the identity-at-zero contract requires.
enum class EntanglerClosure {
    kAlternatingRings,  // even layers forward, odd layers reversed (default)
    kForwardRings,      // every layer forward; identity-at-zero not enforced
};

/// Layered ansatz: per layer, an RY rotation on every qubit followed by a
/// ring of CNOTs (skipped for a single qubit).  parameter_count = n * layers.
struct AnsatzSpec {
    int num_qubits = 4;
    int layers = 2;
    EntanglerClosure closure = EntanglerClosure::kAlternatingRings;

    int parameter_count() const { return num_qubits * layers; }
};

/// Validates the spec; with the alternating closure this simulates the
/// zero-parameter circuit on all basis states (random states above 8
/// qubits) and requires it to be the identity within 1e-12.
AnsatzSpec make_ansatz_spec(int num_qubits, int layers = 2,
                            EntanglerClosure closure = EntanglerClosure::kAlternatingRings);

/// Encodes a feature block of length l (divisible by n, entries in
/// [0, 2*pi)) as alternating rotation layers: row r of the l/n x n grid
/// becomes RZ gates when r is even and RX gates when r is odd, with column
/// j landing on qubit j.  Produces exactly l gates.
Circuit encode_data(std::span<const double> features, int num_qubits);

Circuit build_ansatz(const AnsatzSpec& spec, std::span<const double> theta);

Circuit build_ansatz(const AnsatzSpec& spec, const ShiftVector& shift);

/// All shift vectors of order <= order_cap in a canonical order: ascending
/// order, then lexicographic nonzero positions, then sign patterns with +
/// before - (leftmost position most significant).  The first element is
/// always the all-zero shift.
std::vector<ShiftVector> enumerate_shifts(int parameter_count, int order_cap);

/// Exact value of sum_{l=0}^{cap} C(k,l) 2^l.  Throws std::overflow_error
/// when the count does not fit a signed 64-bit integer.
std::int64_t count_shifts(int parameter_count, int order_cap);

}  // namespace postvar
