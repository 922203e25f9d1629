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

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace postvar {

/// Word over {I, X, Y, Z} stored as an (x mask, z mask) bit pair:
/// X -> (1,0), Y -> (1,1), Z -> (0,1), I -> (0,0).
///
/// Qubit q occupies mask bit (n-1-q), matching the basis-index convention
/// of the simulator where qubit 0 is the most significant index bit.  The
/// masks make expectation kernels O(2^n) without materialising the
/// 2^n x 2^n operator.
class PauliString {
  public:
    PauliString(int num_qubits, std::uint32_t x_mask, std::uint32_t z_mask);

    /// Parses a word such as "IXZY" (leftmost letter = qubit 0).
    static PauliString from_word(std::string_view word);

    static PauliString identity(int num_qubits) {
        return PauliString(num_qubits, 0, 0);
    }

    int num_qubits() const { return n_; }

    /// Number of non-identity letters.
    int locality() const;

    /// 'I', 'X', 'Y' or 'Z' at qubit position q.
    char letter(int qubit) const;

    /// Renders the word, e.g. "IXZY".
    std::string word() const;

    std::uint32_t x_mask() const { return x_mask_; }
    std::uint32_t z_mask() const { return z_mask_; }

    bool is_identity() const { return x_mask_ == 0 && z_mask_ == 0; }

    /// Qubits with a non-identity letter, ascending.
    std::vector<int> support() const;

    friend bool operator==(const PauliString& a, const PauliString& b) {
        return a.n_ == b.n_ && a.x_mask_ == b.x_mask_ && a.z_mask_ == b.z_mask_;
    }
    friend bool operator!=(const PauliString& a, const PauliString& b) {
        return !(a == b);
    }
    friend bool operator<(const PauliString& a, const PauliString& b) {
        if (a.n_ != b.n_) return a.n_ < b.n_;
        if (a.x_mask_ != b.x_mask_) return a.x_mask_ < b.x_mask_;
        return a.z_mask_ < b.z_mask_;
    }

  private:
    int n_;
    std::uint32_t x_mask_;
    std::uint32_t z_mask_;
};

/// All Pauli words on n qubits with locality <= locality_cap, in a canonical
/// order: ascending locality, then lexicographic support positions, then
/// letters with X < Y < Z (leftmost support position most significant).
/// The first element is always the identity word.
std::vector<PauliString> enumerate_local_paulis(int num_qubits, int locality_cap);

/// Exact value of sum_{l=0}^{cap} C(n,l) 3^l.  Throws std::overflow_error
/// if the count does not fit a signed 64-bit integer.
std::int64_t count_local_paulis(int num_qubits, int locality_cap);

/// Variance proxy for single-qubit Clifford (Pauli-basis) shadow
/// estimation: 4^locality.  Pauli words have unit spectral norm, so the
/// observable-norm factor is 1.
double shadow_norm_bound(const PauliString& p);

/// Dense 2^n x 2^n matrix of the word.  Only intended for small systems;
/// throws for n > 6.
Eigen::MatrixXcd pauli_dense_matrix(const PauliString& p);

/// Expansion of a Hermitian matrix in the Pauli-word basis.  Terms are
/// emitted in (x_mask, z_mask) numeric order; coefficients with magnitude
/// below 1e-12 are dropped as floating noise.
struct PauliDecomposition {
    int num_qubits = 0;
    std::vector<std::pair<PauliString, double>> terms;

    /// Sum of coeff * dense Pauli matrix over all retained terms.
    Eigen::MatrixXcd reconstruct() const;

    /// Coefficient of `p`, or 0 when absent.
    double coefficient(const PauliString& p) const;
};

/// Decomposes a Hermitian matrix H (2^n x 2^n, n <= 6) as
/// sum_P tr(P H) / 2^n * P.  Inputs farther than 1e-10 (max-entry) from
/// Hermitian are rejected with std::invalid_argument.
PauliDecomposition pauli_decompose(const Eigen::MatrixXcd& hermitian);

}  // namespace postvar
