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

#include "postvar/circuits.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace postvar {

namespace {

constexpr double kHalfPi = std::numbers::pi / 2.0;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

void append_ring(Circuit& circuit, int n, bool reversed) {
    if (n < 2) {
        return;
    }
    if (!reversed) {
        for (int q = 0; q < n; ++q) {
            circuit.append(Gate::cnot(q, (q + 1) % n));
        }
    } else {
        for (int q = n - 1; q >= 0; --q) {
            circuit.append(Gate::cnot(q, (q + 1) % n));
        }
    }
}

bool circuit_is_identity(const Circuit& circuit, double tolerance) {
    const int n = circuit.num_qubits;
    if (n <= 8) {
        const std::size_t dim = std::size_t{1} << n;
        for (std::size_t basis = 0; basis < dim; ++basis) {
            std::vector<std::complex<double>> amps(dim, {0.0, 0.0});
            amps[basis] = {1.0, 0.0};
            const auto out =
                run_circuit(StateVector::from_amplitudes(n, std::move(amps)), circuit);
            for (std::size_t i = 0; i < dim; ++i) {
                const std::complex<double> want =
                    (i == basis) ? std::complex<double>{1.0, 0.0} : std::complex<double>{0.0, 0.0};
                if (std::abs(out.amplitudes()[i] - want) > tolerance) {
                    return false;
                }
            }
        }
        return true;
    }
    // Too wide for the basis sweep; spot-check random states instead.
    for (std::uint64_t trial = 0; trial < 3; ++trial) {
        Rng rng(derive_seed(0x1d5a7u, trial));
        const std::size_t dim = std::size_t{1} << n;
        std::vector<std::complex<double>> amps(dim);
        double norm = 0.0;
        for (auto& a : amps) {
            a = {rng.normal(), rng.normal()};
            norm += std::norm(a);
        }
        norm = std::sqrt(norm);
        for (auto& a : amps) {
            a /= norm;
        }
        const auto input = StateVector::from_amplitudes(n, amps);
        if (state_fidelity(input, run_circuit(input, circuit)) < 1.0 - tolerance) {
            return false;
        }
    }
    return true;
}

}  // namespace

int ShiftVector::order() const {
    int count = 0;
    for (const double v : values) {
        if (v != 0.0) {
            ++count;
        }
    }
    return count;
}

std::string ShiftVector::signs() const {
    std::string out;
    out.reserve(values.size());
    for (const double v : values) {
        out.push_back(v == 0.0 ? '0' : (v > 0.0 ? '+' : '-'));
    }
    return out;
}

ShiftVector ShiftVector::from_signs(std::string_view signs) {
    ShiftVector shift;
    shift.values.reserve(signs.size());
    for (const char c : signs) {
        switch (c) {
            case '0':
                shift.values.push_back(0.0);
                break;
            case '+':
                shift.values.push_back(kHalfPi);
                break;
            case '-':
                shift.values.push_back(-kHalfPi);
                break;
            default:
                throw std::invalid_argument("shift signs may only contain 0, +, -");
        }
    }
    return shift;
}

void validate_shift(const ShiftVector& shift) {
    for (const double v : shift.values) {
        if (v != 0.0 && v != kHalfPi && v != -kHalfPi) {
            throw std::invalid_argument("shift entries must be 0 or +-pi/2");
        }
    }
}

AnsatzSpec make_ansatz_spec(int num_qubits, int layers, EntanglerClosure closure) {
    if (num_qubits < 1 || num_qubits > kQubitCap) {
        throw std::invalid_argument("ansatz qubit count out of range");
    }
    if (layers < 1) {
        throw std::invalid_argument("ansatz needs at least one layer");
    }
    AnsatzSpec spec{num_qubits, layers, closure};
    if (closure == EntanglerClosure::kAlternatingRings) {
        const std::vector<double> zeros(static_cast<std::size_t>(spec.parameter_count()), 0.0);
        if (!circuit_is_identity(build_ansatz(spec, zeros), 1e-12)) {
            throw std::invalid_argument(
                "ansatz is not the identity at zero parameters; "
                "use an even layer count with the alternating closure");
        }
    }
    return spec;
}

Circuit encode_data(std::span<const double> features, int num_qubits) {
    if (num_qubits < 1 || num_qubits > kQubitCap) {
        throw std::invalid_argument("encoder qubit count out of range");
    }
    if (features.empty() || features.size() % static_cast<std::size_t>(num_qubits) != 0) {
        throw std::invalid_argument("feature count must be a positive multiple of the qubit count");
    }
    Circuit circuit(num_qubits);
    const int rows = static_cast<int>(features.size()) / num_qubits;
    for (int r = 0; r < rows; ++r) {
        for (int q = 0; q < num_qubits; ++q) {
            const double angle = features[static_cast<std::size_t>(r * num_qubits + q)];
            if (!(angle >= 0.0 && angle < kTwoPi)) {
                throw std::invalid_argument("encoded features must lie in [0, 2*pi)");
            }
            circuit.append(r % 2 == 0 ? Gate::rz(angle, q) : Gate::rx(angle, q));
        }
    }
    return circuit;
}

Circuit build_ansatz(const AnsatzSpec& spec, std::span<const double> theta) {
    if (static_cast<int>(theta.size()) != spec.parameter_count()) {
        throw std::invalid_argument("ansatz expects " +
                                    std::to_string(spec.parameter_count()) +
                                    " parameters, got " + std::to_string(theta.size()));
    }
    Circuit circuit(spec.num_qubits);
    for (int layer = 0; layer < spec.layers; ++layer) {
        for (int q = 0; q < spec.num_qubits; ++q) {
            circuit.append(Gate::ry(theta[static_cast<std::size_t>(layer * spec.num_qubits + q)], q));
        }
        const bool reversed = spec.closure == EntanglerClosure::kAlternatingRings && layer % 2 == 1;
        append_ring(circuit, spec.num_qubits, reversed);
    }
    return circuit;
}

Circuit build_ansatz(const AnsatzSpec& spec, const ShiftVector& shift) {
    validate_shift(shift);
    return build_ansatz(spec, std::span<const double>(shift.values));
}

std::vector<ShiftVector> enumerate_shifts(int parameter_count, int order_cap) {
    if (parameter_count < 1) {
        throw std::invalid_argument("parameter count must be positive");
    }
    if (order_cap < 0 || order_cap > parameter_count) {
        throw std::invalid_argument("order cap must be in [0, k]");
    }

    std::vector<ShiftVector> out;
    out.push_back(ShiftVector::zeros(parameter_count));

    std::vector<int> positions;
    for (int order = 1; order <= order_cap; ++order) {
        positions.resize(static_cast<std::size_t>(order));
        for (int i = 0; i < order; ++i) {
            positions[static_cast<std::size_t>(i)] = i;
        }
        while (true) {
            // Sign patterns: bit 0 of the counter drives the last position;
            // 0 means +pi/2, so + sorts before - at every position.
            for (std::uint32_t pattern = 0; pattern < (1u << order); ++pattern) {
                ShiftVector shift = ShiftVector::zeros(parameter_count);
                for (int i = 0; i < order; ++i) {
                    const bool minus = (pattern >> (order - 1 - i)) & 1u;
                    shift.values[static_cast<std::size_t>(positions[static_cast<std::size_t>(i)])] =
                        minus ? -kHalfPi : kHalfPi;
                }
                out.push_back(std::move(shift));
            }

            int slot = order - 1;
            while (slot >= 0 &&
                   positions[static_cast<std::size_t>(slot)] == parameter_count - order + slot) {
                --slot;
            }
            if (slot < 0) break;
            ++positions[static_cast<std::size_t>(slot)];
            for (int i = slot + 1; i < order; ++i) {
                positions[static_cast<std::size_t>(i)] =
                    positions[static_cast<std::size_t>(i - 1)] + 1;
            }
        }
    }
    return out;
}

std::int64_t count_shifts(int parameter_count, int order_cap) {
    if (parameter_count < 1) {
        throw std::invalid_argument("parameter count must be positive");
    }
    if (order_cap < 0 || order_cap > parameter_count) {
        throw std::invalid_argument("order cap must be in [0, k]");
    }
    unsigned __int128 total = 0;
    unsigned __int128 binom = 1;  // C(k, l)
    unsigned __int128 pow2 = 1;
    for (int l = 0; l <= order_cap; ++l) {
        total += binom * pow2;
        if (total > static_cast<unsigned __int128>(std::numeric_limits<std::int64_t>::max())) {
            throw std::overflow_error("shift count exceeds 64-bit range");
        }
        binom = binom * static_cast<unsigned>(parameter_count - l) / static_cast<unsigned>(l + 1);
        pow2 *= 2;
    }
    return static_cast<std::int64_t>(total);
}

}  // namespace postvar
