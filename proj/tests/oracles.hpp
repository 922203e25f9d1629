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
//
// Independent dense-matrix oracles.  Everything here goes through explicit
// Kronecker products and full matrix-vector products, deliberately sharing
// no code with the mask-based kernels under test.

#pragma once

#include "postvar/rng.hpp"
#include "postvar/sim.hpp"

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>

#include <complex>
#include <string>

namespace oracle {

using Eigen::MatrixXcd;
using Eigen::VectorXcd;

inline Eigen::Matrix2cd pauli_2x2(char letter) {
    using cd = std::complex<double>;
    Eigen::Matrix2cd m;
    switch (letter) {
        case 'I':
            m << cd(1, 0), cd(0, 0), cd(0, 0), cd(1, 0);
            break;
        case 'X':
            m << cd(0, 0), cd(1, 0), cd(1, 0), cd(0, 0);
            break;
        case 'Y':
            m << cd(0, 0), cd(0, -1), cd(0, 1), cd(0, 0);
            break;
        case 'Z':
            m << cd(1, 0), cd(0, 0), cd(0, 0), cd(-1, 0);
            break;
        default:
            throw std::invalid_argument("bad pauli letter");
    }
    return m;
}

// Qubit 0 is the leftmost Kronecker factor (most significant index bit).
inline MatrixXcd pauli_kron(const std::string& word) {
    MatrixXcd m = pauli_2x2(word.at(0));
    for (std::size_t q = 1; q < word.size(); ++q) {
        m = Eigen::kroneckerProduct(m, pauli_2x2(word[q])).eval();
    }
    return m;
}

inline Eigen::Matrix2cd rotation_2x2(postvar::Gate::Kind kind, double angle) {
    using cd = std::complex<double>;
    const double c = std::cos(angle / 2.0);
    const double s = std::sin(angle / 2.0);
    Eigen::Matrix2cd m;
    switch (kind) {
        case postvar::Gate::Kind::RX:
            m << cd(c, 0), cd(0, -s), cd(0, -s), cd(c, 0);
            break;
        case postvar::Gate::Kind::RY:
            m << cd(c, 0), cd(-s, 0), cd(s, 0), cd(c, 0);
            break;
        case postvar::Gate::Kind::RZ:
            m << cd(c, -s), cd(0, 0), cd(0, 0), cd(c, s);
            break;
        default:
            throw std::invalid_argument("not a rotation");
    }
    return m;
}

inline MatrixXcd gate_matrix(const postvar::Gate& gate, int n) {
    const Eigen::Index dim = Eigen::Index{1} << n;
    if (gate.kind == postvar::Gate::Kind::CNOT) {
        MatrixXcd m = MatrixXcd::Zero(dim, dim);
        for (Eigen::Index j = 0; j < dim; ++j) {
            const bool control_on = (j >> (n - 1 - gate.q0)) & 1;
            Eigen::Index target = j;
            if (control_on) {
                target = j ^ (Eigen::Index{1} << (n - 1 - gate.q1));
            }
            m(target, j) = 1.0;
        }
        return m;
    }
    MatrixXcd m = MatrixXcd::Identity(1, 1);
    for (int q = 0; q < n; ++q) {
        if (q == gate.q0) {
            m = Eigen::kroneckerProduct(m, rotation_2x2(gate.kind, gate.angle)).eval();
        } else {
            m = Eigen::kroneckerProduct(m, Eigen::Matrix2cd::Identity()).eval();
        }
    }
    return m;
}

inline MatrixXcd circuit_matrix(const postvar::Circuit& circuit) {
    const Eigen::Index dim = Eigen::Index{1} << circuit.num_qubits;
    MatrixXcd m = MatrixXcd::Identity(dim, dim);
    for (const postvar::Gate& gate : circuit.gates) {
        m = gate_matrix(gate, circuit.num_qubits) * m;
    }
    return m;
}

inline VectorXcd to_eigen(const postvar::StateVector& state) {
    VectorXcd v(static_cast<Eigen::Index>(state.amplitudes().size()));
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        v(i) = state.amplitudes()[static_cast<std::size_t>(i)];
    }
    return v;
}

inline double dense_expectation(const postvar::StateVector& state, const std::string& word) {
    const VectorXcd psi = to_eigen(state);
    return (psi.adjoint() * pauli_kron(word) * psi)(0, 0).real();
}

inline postvar::StateVector random_state(int n, postvar::Rng& rng) {
    std::vector<std::complex<double>> amps(std::size_t{1} << n);
    double norm = 0.0;
    for (auto& a : amps) {
        a = {rng.normal(), rng.normal()};
        norm += std::norm(a);
    }
    norm = std::sqrt(norm);
    for (auto& a : amps) {
        a /= norm;
    }
    return postvar::StateVector::from_amplitudes(n, std::move(amps));
}

inline postvar::Circuit random_circuit(int n, int gate_count, postvar::Rng& rng) {
    postvar::Circuit circuit(n);
    for (int g = 0; g < gate_count; ++g) {
        const auto pick = rng.uniform_int(n >= 2 ? 4 : 3);
        const int q = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(n)));
        const double angle = rng.uniform(-3.2, 3.2);
        switch (pick) {
            case 0:
                circuit.append(postvar::Gate::rx(angle, q));
                break;
            case 1:
                circuit.append(postvar::Gate::ry(angle, q));
                break;
            case 2:
                circuit.append(postvar::Gate::rz(angle, q));
                break;
            default: {
                int target = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(n - 1)));
                if (target >= q) {
                    ++target;
                }
                circuit.append(postvar::Gate::cnot(q, target));
                break;
            }
        }
    }
    return circuit;
}

inline Eigen::MatrixXd random_matrix(Eigen::Index rows, Eigen::Index cols,
                                     postvar::Rng& rng, double lo = -1.0,
                                     double hi = 1.0) {
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        for (Eigen::Index j = 0; j < cols; ++j) {
            m(i, j) = rng.uniform(lo, hi);
        }
    }
    return m;
}

}  // namespace oracle
