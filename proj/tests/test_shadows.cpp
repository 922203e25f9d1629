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

#include "postvar/shadows.hpp"

#include "doctest.h"
#include "oracles.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

using namespace postvar;

namespace {

Circuit random_product_prep(int n, Rng& rng) {
    Circuit prep(n);
    for (int q = 0; q < n; ++q) {
        prep.append(Gate::ry(rng.uniform(-3.0, 3.0), q));
        prep.append(Gate::rz(rng.uniform(-3.0, 3.0), q));
    }
    return prep;
}

}  // namespace

TEST_SUITE("shadows") {

TEST_CASE("degenerate empty collection") {
    CHECK(collect_shadows(Circuit(1), 0, 1).empty());
}

TEST_CASE("bases are uniform and Z outcomes deterministic on |0>") {
    const auto records = collect_shadows(Circuit(1), 30000, 77);
    int z_count = 0;
    for (const auto& record : records) {
        if (record.basis_letter(0) == 'Z') {
            ++z_count;
            CHECK(record.outcome_bit(0) == 0);
        }
    }
    const double z_fraction = static_cast<double>(z_count) / 30000.0;
    CHECK(z_fraction == doctest::Approx(1.0 / 3.0).epsilon(0.06));
}

TEST_CASE("collection is deterministic under the seed") {
    Rng rng(4);
    const Circuit prep = random_product_prep(2, rng);
    const auto a = collect_shadows(prep, 500, 99);
    const auto b = collect_shadows(prep, 500, 99);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].basis_bits == b[i].basis_bits);
        CHECK(a[i].outcome_bits == b[i].outcome_bits);
    }
    const auto c = collect_shadows(prep, 500, 100);
    bool any_difference = false;
    for (std::size_t i = 0; i < c.size(); ++i) {
        any_difference |= (a[i].basis_bits != c[i].basis_bits) ||
                          (a[i].outcome_bits != c[i].outcome_bits);
    }
    CHECK(any_difference);
}

TEST_CASE("identity observable estimates to exactly one") {
    const auto records = collect_shadows(Circuit(2), 50, 5);
    CHECK(estimate_pauli(records, PauliString::identity(2), 5) == 1.0);
}

TEST_CASE("estimates land near the exact expectations on |0>") {
    const auto records = collect_shadows(Circuit(1), 100000, 2025);
    CHECK(estimate_pauli(records, PauliString::from_word("Z"), 10) ==
          doctest::Approx(1.0).epsilon(0.05));
    CHECK(std::abs(estimate_pauli(records, PauliString::from_word("X"), 10)) < 0.05);
}

TEST_CASE("group means are unbiased across repetitions") {
    Rng rng(314);
    const Circuit prep = random_product_prep(2, rng);
    const StateVector state = run_circuit(StateVector::zero_state(2), prep);

    const int repetitions = 200;
    const int records_per_rep = 300;
    std::vector<std::vector<ShadowRecord>> collections;
    collections.reserve(repetitions);
    for (int rep = 0; rep < repetitions; ++rep) {
        collections.push_back(
            collect_shadows(prep, records_per_rep, derive_seed(9000, rep)));
    }

    const auto paulis = enumerate_local_paulis(2, 2);
    for (const PauliString& p : paulis) {
        if (p.is_identity()) {
            continue;
        }
        const double exact = expectation(state, p);
        double sum = 0.0;
        double sum_sq = 0.0;
        for (const auto& records : collections) {
            const double estimate = estimate_pauli(records, p, 1);
            sum += estimate;
            sum_sq += estimate * estimate;
        }
        const double mean = sum / repetitions;
        const double variance =
            (sum_sq - repetitions * mean * mean) / (repetitions - 1);
        const double standard_error = std::sqrt(variance / repetitions);
        CHECK(std::abs(mean - exact) <= 3.0 * standard_error + 1e-12);
    }
}

TEST_CASE("estimator input validation") {
    const auto records = collect_shadows(Circuit(1), 4, 1);
    CHECK_THROWS_AS(estimate_pauli(records, PauliString::from_word("Z"), 0),
                    std::invalid_argument);
    CHECK_THROWS_AS(estimate_pauli(records, PauliString::from_word("Z"), 5),
                    std::runtime_error);
    CHECK_THROWS_AS(estimate_pauli({}, PauliString::from_word("Z"), 1),
                    std::runtime_error);
}

TEST_CASE("text serialisation round trip") {
    Rng rng(8);
    const Circuit prep = random_product_prep(3, rng);
    const auto records = collect_shadows(prep, 64, 4242);

    std::stringstream stream;
    write_shadows(stream, records, 3, 4242);
    const std::string text = stream.str();
    CHECK(text.rfind("n=3 T=64 seed=4242\n", 0) == 0);

    std::stringstream reread(text);
    const ShadowFile file = read_shadows(reread);
    CHECK(file.num_qubits == 3);
    CHECK(file.seed == 4242);
    REQUIRE(file.records.size() == records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        CHECK(file.records[i].basis_bits == records[i].basis_bits);
        CHECK(file.records[i].outcome_bits == records[i].outcome_bits);
    }
}

TEST_CASE("malformed shadow files are rejected") {
    std::stringstream empty("");
    CHECK_THROWS_AS(read_shadows(empty), std::runtime_error);
    std::stringstream bad_header("m=3 T=1 seed=0\nXQZ\t000\n");
    CHECK_THROWS_AS(read_shadows(bad_header), std::runtime_error);
    std::stringstream bad_letter("n=3 T=1 seed=0\nXQZ\t000\n");
    CHECK_THROWS_AS(read_shadows(bad_letter), std::runtime_error);
    std::stringstream bad_count("n=3 T=2 seed=0\nXYZ\t000\n");
    CHECK_THROWS_AS(read_shadows(bad_count), std::runtime_error);
    std::stringstream bad_bits("n=3 T=1 seed=0\nXYZ\t0a0\n");
    CHECK_THROWS_AS(read_shadows(bad_bits), std::runtime_error);
}

TEST_CASE("budget: frozen direct example") {
    // m = d = 1, eps = 1, delta = 2/e makes ln(2 m d / delta) = 1.
    const BudgetPlan plan =
        plan_budget(Strategy::kHybrid, MeasureMode::kDirect, 1, 1, 1, 1, 1.0,
                    2.0 / std::numbers::e, 1.0);
    CHECK(plan.shots_per_unit == 2);
    CHECK(plan.total_shots == 2);

    // Exactly quadruples when the target error halves (the log is unchanged).
    const BudgetPlan tighter =
        plan_budget(Strategy::kHybrid, MeasureMode::kDirect, 1, 1, 1, 1, 0.5,
                    2.0 / std::numbers::e, 1.0);
    CHECK(tighter.shots_per_unit == 8);
}

TEST_CASE("budget: shot accounting per mode") {
    const BudgetPlan direct = plan_budget(Strategy::kHybrid, MeasureMode::kDirect, 3, 5,
                                          2, 7, 0.25, 0.05, 16.0);
    CHECK(direct.neuron_count == 15);
    CHECK(direct.total_shots == 15 * 7 * direct.shots_per_unit);
    CHECK(direct.groups == 1);

    const BudgetPlan shadows = plan_budget(Strategy::kHybrid, MeasureMode::kShadows, 3, 5,
                                           2, 7, 0.25, 0.05, 16.0);
    CHECK(shadows.shots_per_unit ==
          static_cast<std::int64_t>(std::ceil(34.0 * 16.0 / (0.25 * 0.25))));
    CHECK(shadows.total_shots == 3 * 7 * shadows.shots_per_unit * shadows.groups);
}

TEST_CASE("budget: favored mode per strategy") {
    const BudgetPlan ansatz = plan_budget(Strategy::kAnsatzExpansion, MeasureMode::kShadows,
                                          17, 1, 4, 10, 0.2, 0.1, 4.0);
    CHECK(ansatz.favored == MeasureMode::kDirect);

    // 1-local observables on 4 qubits: 13 observables, variance proxy 4.
    const BudgetPlan local = plan_budget(Strategy::kObservableConstruction,
                                         MeasureMode::kShadows, 1, 13, 4, 10, 0.2, 0.1, 4.0);
    CHECK(local.favored == MeasureMode::kShadows);

    // Variance proxy above the observable count: shadows do not pay off.
    const BudgetPlan heavy = plan_budget(Strategy::kObservableConstruction,
                                         MeasureMode::kShadows, 1, 13, 4, 10, 0.2, 0.1, 16.0);
    CHECK(heavy.favored == MeasureMode::kDirect);
}

TEST_CASE("budget: monotonicity") {
    Rng rng(606);
    for (int trial = 0; trial < 40; ++trial) {
        const std::int64_t p = 1 + static_cast<std::int64_t>(rng.uniform_int(5));
        const std::int64_t q = 1 + static_cast<std::int64_t>(rng.uniform_int(20));
        const std::int64_t d = 1 + static_cast<std::int64_t>(rng.uniform_int(50));
        const double eps = rng.uniform(0.05, 1.5);
        const double delta = rng.uniform(0.01, 0.9);
        const auto mode = trial % 2 == 0 ? MeasureMode::kDirect : MeasureMode::kShadows;
        const BudgetPlan base =
            plan_budget(Strategy::kHybrid, mode, p, q, 3, d, eps, delta, 16.0);
        const BudgetPlan tighter_eps =
            plan_budget(Strategy::kHybrid, mode, p, q, 3, d, eps * 0.7, delta, 16.0);
        const BudgetPlan tighter_delta =
            plan_budget(Strategy::kHybrid, mode, p, q, 3, d, eps, delta * 0.5, 16.0);
        const BudgetPlan more_neurons =
            plan_budget(Strategy::kHybrid, mode, p, q + 3, 3, d, eps, delta, 16.0);
        const BudgetPlan more_data =
            plan_budget(Strategy::kHybrid, mode, p, q, 3, d + 9, eps, delta, 16.0);
        CHECK(tighter_eps.total_shots >= base.total_shots);
        CHECK(tighter_delta.total_shots >= base.total_shots);
        CHECK(more_neurons.total_shots >= base.total_shots);
        CHECK(more_data.total_shots >= base.total_shots);
    }
}

TEST_CASE("budget: argument validation") {
    CHECK_THROWS_AS(plan_budget(Strategy::kHybrid, MeasureMode::kDirect, 0, 1, 1, 1,
                                0.1, 0.1, 1.0),
                    std::invalid_argument);
    CHECK_THROWS_AS(plan_budget(Strategy::kHybrid, MeasureMode::kDirect, 1, 1, 1, 1,
                                2.0, 0.1, 1.0),
                    std::invalid_argument);
    CHECK_THROWS_AS(plan_budget(Strategy::kHybrid, MeasureMode::kDirect, 1, 1, 1, 1,
                                0.1, 1.0, 1.0),
                    std::invalid_argument);
    CHECK_THROWS_AS(plan_budget(Strategy::kHybrid, MeasureMode::kShadows, 1, 1, 1, 1,
                                0.1, 0.1, 0.5),
                    std::invalid_argument);
}

TEST_CASE("planned shadow budget covers the target error") {
    // Down-scaled version of the coverage contract: 20 seeded repetitions
    // of the n=2, 1-local plan; at least 90% must meet the entry budget.
    const auto observables = enumerate_local_paulis(2, 1);
    std::vector<PauliString> targets;
    for (const auto& p : observables) {
        if (!p.is_identity()) {
            targets.push_back(p);
        }
    }
    const std::int64_t m = static_cast<std::int64_t>(targets.size());
    const BudgetPlan plan = plan_budget(Strategy::kObservableConstruction,
                                        MeasureMode::kShadows, 1, m, 2, 5, 0.2, 0.1, 4.0);

    int covered = 0;
    Rng state_rng(50607);
    std::vector<Circuit> preps;
    std::vector<StateVector> states;
    for (int i = 0; i < 5; ++i) {
        preps.push_back(random_product_prep(2, state_rng));
        states.push_back(run_circuit(StateVector::zero_state(2), preps.back()));
    }
    for (int trial = 0; trial < 20; ++trial) {
        double worst = 0.0;
        for (int i = 0; i < 5; ++i) {
            const auto records =
                collect_shadows(preps[static_cast<std::size_t>(i)],
                                plan.shots_per_unit * plan.groups,
                                derive_seed(111, trial, static_cast<std::uint64_t>(i)));
            for (const auto& p : targets) {
                const double estimate =
                    estimate_pauli(records, p, static_cast<int>(plan.groups));
                worst = std::max(worst,
                                 std::abs(estimate - expectation(states[static_cast<std::size_t>(i)], p)));
            }
        }
        if (worst <= plan.epsilon) {
            ++covered;
        }
    }
    CHECK(covered >= 18);
}

}  // TEST_SUITE
