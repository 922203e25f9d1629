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

#include "postvar/pauli.hpp"

#include <bit>
#include <complex>
#include <limits>
#include <stdexcept>

namespace postvar {

namespace {

constexpr int kDensePauliCap = 6;
constexpr double kCoefficientFloor = 1e-12;

void check_qubit_count(int n) {
    if (n < 1 || n > 20) {
        throw std::invalid_argument("pauli word length must be in [1, 20], got " +
                                    std::to_string(n));
    }
}

// Phase picked up when the word maps basis state |i> to |i ^ x_mask>:
// i^{#Y} * (-1)^{popcount(i & z_mask)}.  The z mask covers Y and Z letters.
std::complex<double> basis_phase(std::uint64_t index, std::uint32_t z_mask,
                                 int y_count) {
    static constexpr std::complex<double> kIPow[4] = {
        {1.0, 0.0}, {0.0, 1.0}, {-1.0, 0.0}, {0.0, -1.0}};
    const bool negate = std::popcount(index & static_cast<std::uint64_t>(z_mask)) & 1;
    std::complex<double> phase = kIPow[y_count & 3];
    return negate ? -phase : phase;
}

}  // namespace

PauliString::PauliString(int num_qubits, std::uint32_t x_mask, std::uint32_t z_mask)
    : n_(num_qubits), x_mask_(x_mask), z_mask_(z_mask) {
    check_qubit_count(num_qubits);
    const std::uint32_t valid = (num_qubits == 32)
                                    ? ~0u
                                    : ((1u << num_qubits) - 1u);
    if ((x_mask & ~valid) != 0 || (z_mask & ~valid) != 0) {
        throw std::invalid_argument("pauli mask has bits outside the register");
    }
}

PauliString PauliString::from_word(std::string_view word) {
    const int n = static_cast<int>(word.size());
    check_qubit_count(n);
    std::uint32_t x = 0;
    std::uint32_t z = 0;
    for (int q = 0; q < n; ++q) {
        const std::uint32_t bit = 1u << (n - 1 - q);
        switch (word[static_cast<std::size_t>(q)]) {
            case 'I':
                break;
            case 'X':
                x |= bit;
                break;
            case 'Y':
                x |= bit;
                z |= bit;
                break;
            case 'Z':
                z |= bit;
                break;
            default:
                throw std::invalid_argument("pauli word may only contain I, X, Y, Z");
        }
    }
    return PauliString(n, x, z);
}

int PauliString::locality() const {
    return std::popcount(x_mask_ | z_mask_);
}

char PauliString::letter(int qubit) const {
    if (qubit < 0 || qubit >= n_) {
        throw std::invalid_argument("qubit index out of range");
    }
    const std::uint32_t bit = 1u << (n_ - 1 - qubit);
    const bool x = x_mask_ & bit;
    const bool z = z_mask_ & bit;
    if (x && z) return 'Y';
    if (x) return 'X';
    if (z) return 'Z';
    return 'I';
}

std::string PauliString::word() const {
    std::string out(static_cast<std::size_t>(n_), 'I');
    for (int q = 0; q < n_; ++q) {
        out[static_cast<std::size_t>(q)] = letter(q);
    }
    return out;
}

std::vector<int> PauliString::support() const {
    std::vector<int> qubits;
    for (int q = 0; q < n_; ++q) {
        if (letter(q) != 'I') {
            qubits.push_back(q);
        }
    }
    return qubits;
}

std::vector<PauliString> enumerate_local_paulis(int num_qubits, int locality_cap) {
    check_qubit_count(num_qubits);
    if (locality_cap < 0 || locality_cap > num_qubits) {
        throw std::invalid_argument("locality cap must be in [0, n]");
    }

    std::vector<PauliString> out;
    out.push_back(PauliString::identity(num_qubits));

    // Letters X=0, Y=1, Z=2 per support position; positions ascend.
    std::vector<int> positions;
    std::vector<int> letters;
    for (int weight = 1; weight <= locality_cap; ++weight) {
        positions.assign(static_cast<std::size_t>(weight), 0);
        for (int i = 0; i < weight; ++i) {
            positions[static_cast<std::size_t>(i)] = i;
        }
        while (true) {
            letters.assign(static_cast<std::size_t>(weight), 0);
            while (true) {
                std::uint32_t x = 0;
                std::uint32_t z = 0;
                for (int i = 0; i < weight; ++i) {
                    const std::uint32_t bit =
                        1u << (num_qubits - 1 - positions[static_cast<std::size_t>(i)]);
                    const int letter = letters[static_cast<std::size_t>(i)];
                    if (letter != 2) x |= bit;  // X or Y
                    if (letter != 0) z |= bit;  // Y or Z
                }
                out.emplace_back(num_qubits, x, z);

                // Next letter assignment, rightmost position fastest.
                int slot = weight - 1;
                while (slot >= 0 && letters[static_cast<std::size_t>(slot)] == 2) {
                    letters[static_cast<std::size_t>(slot)] = 0;
                    --slot;
                }
                if (slot < 0) break;
                ++letters[static_cast<std::size_t>(slot)];
            }

            // Next combination of support positions, lexicographic.
            int slot = weight - 1;
            while (slot >= 0 &&
                   positions[static_cast<std::size_t>(slot)] == num_qubits - weight + slot) {
                --slot;
            }
            if (slot < 0) break;
            ++positions[static_cast<std::size_t>(slot)];
            for (int i = slot + 1; i < weight; ++i) {
                positions[static_cast<std::size_t>(i)] =
                    positions[static_cast<std::size_t>(i - 1)] + 1;
            }
        }
    }
    return out;
}

std::int64_t count_local_paulis(int num_qubits, int locality_cap) {
    check_qubit_count(num_qubits);
    if (locality_cap < 0 || locality_cap > num_qubits) {
        throw std::invalid_argument("locality cap must be in [0, n]");
    }
    unsigned __int128 total = 0;
    unsigned __int128 binom = 1;  // C(n, l)
    unsigned __int128 pow3 = 1;
    for (int l = 0; l <= locality_cap; ++l) {
        total += binom * pow3;
        if (total > static_cast<unsigned __int128>(std::numeric_limits<std::int64_t>::max())) {
            throw std::overflow_error("pauli count exceeds 64-bit range");
        }
        binom = binom * static_cast<unsigned>(num_qubits - l) / static_cast<unsigned>(l + 1);
        pow3 *= 3;
    }
    return static_cast<std::int64_t>(total);
}

double shadow_norm_bound(const PauliString& p) {
    double bound = 1.0;
    for (int i = 0; i < p.locality(); ++i) {
        bound *= 4.0;
    }
    return bound;
}

Eigen::MatrixXcd pauli_dense_matrix(const PauliString& p) {
    if (p.num_qubits() > kDensePauliCap) {
        throw std::invalid_argument("dense pauli matrices are capped at 6 qubits");
    }
    const Eigen::Index dim = Eigen::Index{1} << p.num_qubits();
    const int y_count = std::popcount(p.x_mask() & p.z_mask());
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(dim, dim);
    for (Eigen::Index col = 0; col < dim; ++col) {
        const auto row = static_cast<Eigen::Index>(
            static_cast<std::uint64_t>(col) ^ p.x_mask());
        m(row, col) = basis_phase(static_cast<std::uint64_t>(col), p.z_mask(), y_count);
    }
    return m;
}

Eigen::MatrixXcd PauliDecomposition::reconstruct() const {
    const Eigen::Index dim = Eigen::Index{1} << num_qubits;
    Eigen::MatrixXcd sum = Eigen::MatrixXcd::Zero(dim, dim);
    for (const auto& [word, coeff] : terms) {
        sum += coeff * pauli_dense_matrix(word);
    }
    return sum;
}

double PauliDecomposition::coefficient(const PauliString& p) const {
    for (const auto& [word, coeff] : terms) {
        if (word == p) {
            return coeff;
        }
    }
    return 0.0;
}

PauliDecomposition pauli_decompose(const Eigen::MatrixXcd& hermitian) {
    const Eigen::Index dim = hermitian.rows();
    if (dim != hermitian.cols() || dim == 0 || (dim & (dim - 1)) != 0) {
        throw std::invalid_argument("matrix must be square with power-of-two size");
    }
    int n = 0;
    while ((Eigen::Index{1} << n) < dim) {
        ++n;
    }
    if (n < 1 || n > kDensePauliCap) {
        throw std::invalid_argument("dense decomposition supports 1..6 qubits");
    }
    const double hermit_gap =
        (hermitian - hermitian.adjoint()).cwiseAbs().maxCoeff();
    if (hermit_gap > 1e-10) {
        throw std::invalid_argument("matrix is not Hermitian (deviation " +
                                    std::to_string(hermit_gap) + ")");
    }

    PauliDecomposition result;
    result.num_qubits = n;
    const double scale = 1.0 / static_cast<double>(dim);
    const auto mask_limit = static_cast<std::uint32_t>(dim);
    for (std::uint32_t x = 0; x < mask_limit; ++x) {
        for (std::uint32_t z = 0; z < mask_limit; ++z) {
            const int y_count = std::popcount(x & z);
            // tr(P H) = sum_j phase(j) H(j, j ^ x); P(j^x, j) = phase(j).
            std::complex<double> trace = 0.0;
            for (Eigen::Index j = 0; j < dim; ++j) {
                const auto flipped = static_cast<Eigen::Index>(
                    static_cast<std::uint64_t>(j) ^ x);
                trace += basis_phase(static_cast<std::uint64_t>(j), z, y_count) *
                         hermitian(j, flipped);
            }
            const double coeff = trace.real() * scale;
            if (std::abs(coeff) > kCoefficientFloor) {
                result.terms.emplace_back(PauliString(n, x, z), coeff);
            }
        }
    }
    return result;
}

}  // namespace postvar
