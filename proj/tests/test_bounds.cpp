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

#include "postvar/bounds.hpp"

#include "doctest.h"
#include "oracles.hpp"
#include "postvar/rng.hpp"

#include <cmath>

using namespace postvar;

namespace {

// Entrywise-uniform perturbation with a prescribed max-norm.
Eigen::MatrixXd perturbation_with_max_norm(Eigen::Index rows, Eigen::Index cols,
                                           double max_norm, Rng& rng) {
    Eigen::MatrixXd delta(rows, cols);
    double peak = 0.0;
    for (Eigen::Index i = 0; i < rows; ++i) {
        for (Eigen::Index j = 0; j < cols; ++j) {
            delta(i, j) = rng.uniform(-1.0, 1.0);
            peak = std::max(peak, std::abs(delta(i, j)));
        }
    }
    return delta * (max_norm / peak);
}

}  // namespace

TEST_SUITE("bounds") {

TEST_CASE("spectral helpers with a known diagonal") {
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(3, 2);
    a(0, 0) = 3.0;
    a(1, 1) = 0.5;
    CHECK(spectral_norm(a) == doctest::Approx(3.0));
    CHECK(smallest_nonzero_singular(a) == doctest::Approx(0.5));
    CHECK(numeric_rank(a) == 2);

    a(1, 1) = 1e-12;  // below the relative cutoff
    CHECK(numeric_rank(a) == 1);
    CHECK(smallest_nonzero_singular(a) == doctest::Approx(3.0));

    CHECK_THROWS_AS(smallest_nonzero_singular(Eigen::MatrixXd::Zero(2, 2)),
                    std::invalid_argument);
}

TEST_CASE("pseudoinverse of a diagonal matrix") {
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(2, 2);
    a(0, 0) = 1.0;
    a(1, 1) = 2.0;
    const Eigen::MatrixXd pinv = pseudoinverse(a);
    CHECK(pinv(0, 0) == doctest::Approx(1.0));
    CHECK(pinv(1, 1) == doctest::Approx(0.5));
    CHECK(std::abs(pinv(0, 1)) < 1e-14);
}

TEST_CASE("first threshold: frozen identity example") {
    const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(2, 2);
    Eigen::VectorXd y(2);
    y << 1, 1;
    const Theorem1Threshold threshold = theorem1_threshold(eye, eye, y, 0.1);
    // rank branch: 1 / sqrt(2 * 2 * 2)
    CHECK(threshold.rank_branch == doctest::Approx(1.0 / std::sqrt(8.0)));
    // loss branch: 0.1 / (6 * sqrt(2) * ||(1,1)|| * 1 * 1) = 0.1 / 12
    CHECK(threshold.loss_branch == doctest::Approx(0.1 / 12.0));
    CHECK(threshold.value == doctest::Approx(0.1 / 12.0));

    // linear in epsilon on the loss branch only
    const Theorem1Threshold scaled = theorem1_threshold(eye, eye, y, 1.0);
    CHECK(scaled.loss_branch == doctest::Approx(10.0 * threshold.loss_branch));
    CHECK(scaled.rank_branch == doctest::Approx(threshold.rank_branch));
    CHECK(threshold.value > 0.0);
}

TEST_CASE("second threshold: frozen evaluations") {
    CHECK(theorem2_threshold(4, 0.1) == doctest::Approx(0.025));
    CHECK(theorem2_threshold(1, 2.0) == doctest::Approx(1.0));
    CHECK(theorem2_threshold(8, 0.1) ==
          doctest::Approx(theorem2_threshold(4, 0.1) / std::sqrt(2.0)));
    CHECK_THROWS_AS(theorem2_threshold(0, 0.1), std::invalid_argument);
    CHECK_THROWS_AS(theorem2_threshold(4, 0.0), std::invalid_argument);
}

TEST_CASE("rank lemma: premise implies equal ranks") {
    Rng rng(70);
    const Eigen::MatrixXd a = oracle::random_matrix(12, 5, rng);
    CHECK(rank_lemma_premise(a, a));

    int premise_hits = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const Eigen::MatrixXd base = oracle::random_matrix(12, 5, rng);
        const double budget =
            0.9 * smallest_nonzero_singular(base) / std::sqrt(5.0 * 12.0 * 5.0);
        const Eigen::MatrixXd moved =
            base + perturbation_with_max_norm(12, 5, budget, rng);
        if (rank_lemma_premise(base, moved)) {
            ++premise_hits;
            CHECK(numeric_rank(base) == numeric_rank(moved));
        }
    }
    CHECK(premise_hits > 50);  // the 0.9 scaling should pass most trials
}

TEST_CASE("rank lemma: no claim outside the premise") {
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(2, 2);
    a(0, 0) = 1.0;
    a(1, 1) = 1e-12;  // numerically rank 1
    Eigen::MatrixXd b = a;
    b(1, 1) = 0.5;  // rank 2, large perturbation
    CHECK_FALSE(rank_lemma_premise(a, b));
}

TEST_CASE("pseudoinverse gap: zero at equality and frozen diagonal case") {
    Rng rng(71);
    const Eigen::MatrixXd a = oracle::random_matrix(10, 4, rng);
    const WedinGap same = wedin_gap(a, a);
    CHECK(same.lhs == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(same.rhs == doctest::Approx(0.0).epsilon(1e-12));

    Eigen::MatrixXd diag_a = Eigen::MatrixXd::Zero(2, 2);
    diag_a(0, 0) = 1.0;
    diag_a(1, 1) = 2.0;
    Eigen::MatrixXd diag_b = diag_a;
    diag_b(1, 1) = 2.1;
    const WedinGap gap = wedin_gap(diag_a, diag_b);
    CHECK(gap.lhs == doctest::Approx(0.5 - 1.0 / 2.1));
    CHECK(gap.rhs == doctest::Approx(2.0 * 1.0 * 1.0 * 0.1));
    CHECK(gap.lhs <= gap.rhs + 1e-10);
}

TEST_CASE("pseudoinverse gap holds on random full-rank pairs") {
    Rng rng(72);
    for (int trial = 0; trial < 200; ++trial) {
        const Eigen::Index d = 6 + static_cast<Eigen::Index>(rng.uniform_int(10));
        const Eigen::Index m = 2 + static_cast<Eigen::Index>(rng.uniform_int(4));
        const Eigen::MatrixXd a = oracle::random_matrix(d, m, rng);
        const Eigen::MatrixXd b =
            a + perturbation_with_max_norm(d, m, 0.01, rng);
        if (numeric_rank(a) != numeric_rank(b)) {
            continue;  // not covered by the bound
        }
        const WedinGap gap = wedin_gap(a, b);
        CHECK(gap.lhs <= gap.rhs + 1e-10);
    }
    CHECK_THROWS_AS(wedin_gap(Eigen::MatrixXd::Identity(2, 2),
                              Eigen::MatrixXd::Zero(2, 2)),
                    std::invalid_argument);
}

TEST_CASE("loss gap: identical matrices yield zero") {
    Rng rng(73);
    const Eigen::MatrixXd q = oracle::random_matrix(20, 4, rng);
    Eigen::VectorXd y(20);
    for (Eigen::Index i = 0; i < 20; ++i) {
        y(i) = rng.normal();
    }
    const PerturbationReport report =
        verify_loss_gap(q, q, y, GapMode::kUnconstrained, 0.1);
    CHECK(report.delta_loss == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(report.observed_max_norm == 0.0);
    CHECK(report.satisfied);
    CHECK(report.theorem == "1");
}

TEST_CASE("loss gap: ball mode within the second threshold") {
    Rng rng(74);
    for (int trial = 0; trial < 5; ++trial) {
        const Eigen::MatrixXd q = oracle::random_matrix(50, 10, rng);
        Eigen::VectorXd y(50);
        for (Eigen::Index i = 0; i < 50; ++i) {
            y(i) = rng.uniform01() < 0.5 ? -1.0 : 1.0;
        }
        const double budget = 0.9 * theorem2_threshold(10, 0.1);
        const Eigen::MatrixXd qhat = q + perturbation_with_max_norm(50, 10, budget, rng);
        const PerturbationReport report = verify_loss_gap(q, qhat, y, GapMode::kBall, 0.1);
        CHECK(report.theorem == "2");
        CHECK(report.observed_max_norm <= report.max_norm_threshold);
        CHECK(report.delta_loss < report.epsilon);
        CHECK(report.satisfied);
        // reverse-triangle intermediate, with optimizer slack
        CHECK(report.delta_loss <=
              2.0 * std::sqrt(10.0) * report.observed_max_norm + 1e-6);
    }
}

TEST_CASE("loss gap: logistic ball mode within the second threshold") {
    Rng rng(75);
    for (int trial = 0; trial < 3; ++trial) {
        const Eigen::MatrixXd q = oracle::random_matrix(50, 10, rng);
        Eigen::VectorXd y(50);
        for (Eigen::Index i = 0; i < 50; ++i) {
            y(i) = rng.uniform01() < 0.5 ? 0.0 : 1.0;
        }
        const double budget = 0.9 * theorem2_threshold(10, 0.1);
        const Eigen::MatrixXd qhat = q + perturbation_with_max_norm(50, 10, budget, rng);
        const PerturbationReport report =
            verify_loss_gap(q, qhat, y, GapMode::kLogisticBall, 0.1);
        CHECK(report.theorem == "bce");
        CHECK(report.delta_loss < report.epsilon);
        CHECK(report.satisfied);
    }
}

TEST_CASE("loss gap: unconstrained mode within the first threshold") {
    Rng rng(76);
    for (int trial = 0; trial < 5; ++trial) {
        const Eigen::MatrixXd q = oracle::random_matrix(50, 10, rng);
        Eigen::VectorXd y(50);
        for (Eigen::Index i = 0; i < 50; ++i) {
            y(i) = rng.uniform01() < 0.5 ? -1.0 : 1.0;
        }
        // Threshold depends on sigma_min(Qhat); probing with the unperturbed
        // matrix is close enough to stay inside after the 0.9 scaling.
        const double probe = theorem1_threshold(q, q, y, 0.1).value;
        const Eigen::MatrixXd qhat =
            q + perturbation_with_max_norm(50, 10, 0.9 * probe, rng);
        const PerturbationReport report =
            verify_loss_gap(q, qhat, y, GapMode::kUnconstrained, 0.1);
        if (report.observed_max_norm <= report.max_norm_threshold) {
            CHECK(report.delta_loss < report.epsilon);
        }
        CHECK(report.satisfied);
    }
}

TEST_CASE("threshold input validation") {
    const Eigen::MatrixXd q = Eigen::MatrixXd::Identity(3, 3);
    Eigen::VectorXd y = Eigen::VectorXd::Ones(3);
    CHECK_THROWS_AS(theorem1_threshold(q, Eigen::MatrixXd::Identity(2, 2), y, 0.1),
                    std::invalid_argument);
    CHECK_THROWS_AS(theorem1_threshold(q, q, y, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(theorem1_threshold(Eigen::MatrixXd::Zero(3, 3),
                                       Eigen::MatrixXd::Zero(3, 3), y, 0.1),
                    std::invalid_argument);
}

}  // TEST_SUITE
