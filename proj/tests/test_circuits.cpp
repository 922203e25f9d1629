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

#include "doctest.h"
#include "oracles.hpp"

#include <cmath>
#include <numbers>
#include <set>

using namespace postvar;

namespace {

constexpr double kPi = std::numbers::pi;

// Brute-force reference: all ternary sign words with at most `cap` nonzeros.
std::set<std::string> brute_force_shift_signs(int k, int cap) {
    std::set<std::string> words;
    std::size_t total = 1;
    for (int i = 0; i < k; ++i) {
        total *= 3;
    }
    for (std::size_t code = 0; code < total; ++code) {
        std::string word(static_cast<std::size_t>(k), '0');
        std::size_t rest = code;
        int weight = 0;
        for (int i = 0; i < k; ++i) {
            const int digit = static_cast<int>(rest % 3);
            rest /= 3;
            if (digit == 1) {
                word[static_cast<std::size_t>(i)] = '+';
                ++weight;
            } else if (digit == 2) {
                word[static_cast<std::size_t>(i)] = '-';
                ++weight;
            }
        }
        if (weight <= cap) {
            words.insert(word);
        }
    }
    return words;
}

Eigen::VectorXd random_features(int count, Rng& rng) {
    Eigen::VectorXd x(count);
    for (int i = 0; i < count; ++i) {
        x(i) = rng.uniform(0.0, 2.0 * kPi);
    }
    return x;
}

double ansatz_expectation(const AnsatzSpec& spec, const Eigen::VectorXd& theta,
                          const Circuit& encoder, const PauliString& observable) {
    const StateVector encoded =
        run_circuit(StateVector::zero_state(spec.num_qubits), encoder);
    const Circuit ansatz =
        build_ansatz(spec, std::span<const double>(theta.data(),
                                                   static_cast<std::size_t>(theta.size())));
    return expectation(run_circuit(encoded, ansatz), observable);
}

}  // namespace

TEST_SUITE("circuits") {

TEST_CASE("encoder: all-zero features act as the identity on |0...0>") {
    const Eigen::VectorXd x = Eigen::VectorXd::Zero(16);
    const Circuit c = encode_data(std::span<const double>(x.data(), 16), 4);
    const StateVector out = run_circuit(StateVector::zero_state(4), c);
    CHECK(std::abs(out.amplitudes()[0]) == doctest::Approx(1.0));
}

TEST_CASE("encoder: gate layout for a 4x4 block") {
    Rng rng(5);
    const Eigen::VectorXd x = random_features(16, rng);
    const Circuit c = encode_data(std::span<const double>(x.data(), 16), 4);
    REQUIRE(c.gates.size() == 16);
    int rz = 0;
    int rx = 0;
    for (std::size_t g = 0; g < c.gates.size(); ++g) {
        const Gate& gate = c.gates[g];
        CHECK(gate.q0 == static_cast<int>(g % 4));
        CHECK(gate.angle == x(static_cast<Eigen::Index>(g)));
        if (gate.kind == Gate::Kind::RZ) ++rz;
        if (gate.kind == Gate::Kind::RX) ++rx;
        // rows alternate starting with RZ
        CHECK(gate.kind == ((g / 4) % 2 == 0 ? Gate::Kind::RZ : Gate::Kind::RX));
    }
    CHECK(rz == 8);
    CHECK(rx == 8);
}

TEST_CASE("encoder: single pi entry in an RX row") {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(16);
    x(4) = kPi;  // row 1 (RX row), qubit 0
    const Circuit c = encode_data(std::span<const double>(x.data(), 16), 4);
    const StateVector got = run_circuit(StateVector::zero_state(4), c);
    const StateVector want =
        apply_gate(StateVector::zero_state(4), Gate::rx(kPi, 0));
    CHECK(state_fidelity(got, want) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("encoder rejects bad shapes and ranges") {
    const Eigen::VectorXd odd = Eigen::VectorXd::Zero(15);
    CHECK_THROWS_AS(encode_data(std::span<const double>(odd.data(), 15), 4),
                    std::invalid_argument);
    Eigen::VectorXd out_of_range = Eigen::VectorXd::Zero(16);
    out_of_range(3) = 2.0 * kPi;  // half-open interval
    CHECK_THROWS_AS(encode_data(std::span<const double>(out_of_range.data(), 16), 4),
                    std::invalid_argument);
    out_of_range(3) = -0.1;
    CHECK_THROWS_AS(encode_data(std::span<const double>(out_of_range.data(), 16), 4),
                    std::invalid_argument);
}

TEST_CASE("ansatz: identity at zero parameters on every basis state") {
    const AnsatzSpec spec = make_ansatz_spec(4, 2);
    const std::vector<double> zeros(8, 0.0);
    const Circuit c = build_ansatz(spec, zeros);
    for (std::size_t basis = 0; basis < 16; ++basis) {
        std::vector<std::complex<double>> amps(16, {0, 0});
        amps[basis] = {1, 0};
        const StateVector out =
            run_circuit(StateVector::from_amplitudes(4, amps), c);
        for (std::size_t i = 0; i < 16; ++i) {
            const std::complex<double> want = i == basis ? 1.0 : 0.0;
            CHECK(std::abs(out.amplitudes()[i] - want) < 1e-12);
        }
    }
}

TEST_CASE("ansatz: gate counts for the default template") {
    const AnsatzSpec spec = make_ansatz_spec(4, 2);
    CHECK(spec.parameter_count() == 8);
    const std::vector<double> theta(8, 0.25);
    const Circuit c = build_ansatz(spec, theta);
    int ry = 0;
    int cnot = 0;
    for (const Gate& g : c.gates) {
        if (g.kind == Gate::Kind::RY) ++ry;
        if (g.kind == Gate::Kind::CNOT) ++cnot;
    }
    CHECK(ry == 8);
    CHECK(cnot == 8);
}

TEST_CASE("ansatz: single qubit degenerates to plain rotations") {
    const AnsatzSpec spec = make_ansatz_spec(1, 1);
    const std::vector<double> theta = {0.8};
    const Circuit c = build_ansatz(spec, theta);
    REQUIRE(c.gates.size() == 1);
    CHECK(c.gates[0].kind == Gate::Kind::RY);
    const StateVector got = run_circuit(StateVector::zero_state(1), c);
    const StateVector want = apply_gate(StateVector::zero_state(1), Gate::ry(0.8, 0));
    CHECK(state_fidelity(got, want) == doctest::Approx(1.0));
}

TEST_CASE("ansatz spec validation") {
    CHECK_THROWS_AS(make_ansatz_spec(4, 1), std::invalid_argument);  // lone ring
    CHECK_THROWS_AS(make_ansatz_spec(0, 2), std::invalid_argument);
    // The forward closure skips the identity requirement.
    const AnsatzSpec forward = make_ansatz_spec(4, 1, EntanglerClosure::kForwardRings);
    CHECK(forward.parameter_count() == 4);
    const std::vector<double> theta(4, 0.0);
    CHECK(build_ansatz(forward, theta).gates.size() == 8);
    CHECK_THROWS_AS(build_ansatz(forward, std::vector<double>(3, 0.0)),
                    std::invalid_argument);
}

TEST_CASE("identity at zero survives composition with the encoder") {
    Rng rng(11);
    const AnsatzSpec spec = make_ansatz_spec(4, 2);
    const std::vector<double> zeros(8, 0.0);
    const Circuit ansatz = build_ansatz(spec, zeros);
    for (int trial = 0; trial < 5; ++trial) {
        const Eigen::VectorXd x = random_features(16, rng);
        const Circuit encoder = encode_data(std::span<const double>(x.data(), 16), 4);
        const StateVector encoded = run_circuit(StateVector::zero_state(4), encoder);
        CHECK(state_fidelity(encoded, run_circuit(encoded, ansatz)) ==
              doctest::Approx(1.0).epsilon(1e-10));
    }
}

TEST_CASE("parameter-shift rule matches finite differences") {
    Rng rng(21);
    const AnsatzSpec spec = make_ansatz_spec(3, 2);
    const int k = spec.parameter_count();
    const auto paulis = enumerate_local_paulis(3, 2);
    for (int trial = 0; trial < 6; ++trial) {
        const Eigen::VectorXd x = random_features(6, rng);
        const Circuit encoder = encode_data(std::span<const double>(x.data(), 6), 3);
        Eigen::VectorXd theta(k);
        for (int u = 0; u < k; ++u) {
            theta(u) = rng.uniform(-kPi, kPi);
        }
        const PauliString& observable =
            paulis[1 + rng.uniform_int(paulis.size() - 1)];  // skip identity
        for (int u = 0; u < k; ++u) {
            Eigen::VectorXd up = theta;
            Eigen::VectorXd down = theta;
            up(u) += kPi / 2.0;
            down(u) -= kPi / 2.0;
            const double shift_rule = 0.5 * (ansatz_expectation(spec, up, encoder, observable) -
                                             ansatz_expectation(spec, down, encoder, observable));

            const double h = 1e-5;
            Eigen::VectorXd fwd = theta;
            Eigen::VectorXd bwd = theta;
            fwd(u) += h;
            bwd(u) -= h;
            const double finite_diff =
                (ansatz_expectation(spec, fwd, encoder, observable) -
                 ansatz_expectation(spec, bwd, encoder, observable)) /
                (2.0 * h);
            CHECK(std::abs(shift_rule - finite_diff) < 1e-6);
        }
    }
}

TEST_CASE("shift enumeration: exhaustive k=1") {
    const auto shifts = enumerate_shifts(1, 1);
    REQUIRE(shifts.size() == 3);
    CHECK(shifts[0].signs() == "0");
    CHECK(shifts[1].signs() == "+");
    CHECK(shifts[2].signs() == "-");
}

TEST_CASE("shift enumeration: k=2 first order") {
    const auto shifts = enumerate_shifts(2, 1);
    REQUIRE(shifts.size() == 5);
    CHECK(shifts[0].signs() == "00");
    CHECK(shifts[1].signs() == "+0");
    CHECK(shifts[2].signs() == "-0");
    CHECK(shifts[3].signs() == "0+");
    CHECK(shifts[4].signs() == "0-");
}

TEST_CASE("shift enumeration matches brute force and the count") {
    for (int k = 1; k <= 5; ++k) {
        for (int cap = 0; cap <= k; ++cap) {
            const auto shifts = enumerate_shifts(k, cap);
            CHECK(static_cast<std::int64_t>(shifts.size()) == count_shifts(k, cap));
            std::set<std::string> got;
            for (const auto& s : shifts) {
                CHECK(s.order() <= cap);
                validate_shift(s);
                got.insert(s.signs());
            }
            CHECK(got.size() == shifts.size());  // duplicate-free
            CHECK(got == brute_force_shift_signs(k, cap));
        }
    }
}

TEST_CASE("shift enumeration is stable across calls") {
    const auto a = enumerate_shifts(6, 2);
    const auto b = enumerate_shifts(6, 2);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].signs() == b[i].signs());
    }
    CHECK(a.front().order() == 0);
}

TEST_CASE("shift counts") {
    CHECK(count_shifts(8, 0) == 1);
    CHECK(count_shifts(8, 1) == 17);
    CHECK(count_shifts(8, 2) == 129);
    CHECK_THROWS_AS(count_shifts(4, 5), std::invalid_argument);
    CHECK_THROWS_AS(count_shifts(0, 0), std::invalid_argument);
    CHECK_THROWS_AS(count_shifts(80, 40), std::overflow_error);
}

TEST_CASE("shift sign parsing") {
    const ShiftVector s = ShiftVector::from_signs("0+-0");
    CHECK(s.order() == 2);
    CHECK(s.values[1] == doctest::Approx(kPi / 2.0));
    CHECK(s.values[2] == doctest::Approx(-kPi / 2.0));
    CHECK_THROWS_AS(ShiftVector::from_signs("0x"), std::invalid_argument);
    ShiftVector bad = ShiftVector::zeros(2);
    bad.values[0] = 0.3;
    CHECK_THROWS_AS(validate_shift(bad), std::invalid_argument);
}

}  // TEST_SUITE
