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

#include "postvar/head.hpp"

#include <cmath>
#include <stdexcept>

namespace postvar {

namespace {

constexpr double kRankCutoff = 1e-10;

Eigen::VectorXd singular_values(const Eigen::MatrixXd& matrix) {
    Eigen::BDCSVD<Eigen::MatrixXd> svd(matrix);
    return svd.singularValues();
}

}  // namespace

double smallest_nonzero_singular(const Eigen::MatrixXd& matrix) {
    const Eigen::VectorXd sigma = singular_values(matrix);
    const double cutoff = kRankCutoff * sigma(0);
    double smallest = 0.0;
    for (Eigen::Index i = 0; i < sigma.size(); ++i) {
        if (sigma(i) > cutoff && sigma(i) > 0.0) {
            smallest = sigma(i);
        }
    }
    if (smallest == 0.0) {
        throw std::invalid_argument("matrix has no nonzero singular values");
    }
    return smallest;
}

int numeric_rank(const Eigen::MatrixXd& matrix) {
    const Eigen::VectorXd sigma = singular_values(matrix);
    if (sigma.size() == 0 || sigma(0) == 0.0) {
        return 0;
    }
    const double cutoff = kRankCutoff * sigma(0);
    int rank = 0;
    for (Eigen::Index i = 0; i < sigma.size(); ++i) {
        if (sigma(i) > cutoff) {
            ++rank;
        }
    }
    return rank;
}

double spectral_norm(const Eigen::MatrixXd& matrix) {
    return singular_values(matrix)(0);
}

Eigen::MatrixXd pseudoinverse(const Eigen::MatrixXd& matrix) {
    Eigen::BDCSVD<Eigen::MatrixXd> svd(matrix,
                                       Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd& sigma = svd.singularValues();
    const double cutoff = kRankCutoff * sigma(0);
    Eigen::VectorXd inverted = Eigen::VectorXd::Zero(sigma.size());
    for (Eigen::Index i = 0; i < sigma.size(); ++i) {
        if (sigma(i) > cutoff) {
            inverted(i) = 1.0 / sigma(i);
        }
    }
    return svd.matrixV() * inverted.asDiagonal() * svd.matrixU().transpose();
}

Theorem1Threshold theorem1_threshold(const Eigen::MatrixXd& Q,
                                     const Eigen::MatrixXd& Qhat,
                                     const Eigen::VectorXd& y, double epsilon) {
    if (Q.rows() != Qhat.rows() || Q.cols() != Qhat.cols()) {
        throw std::invalid_argument("Q and Qhat must share a shape");
    }
    if (Q.rows() != y.size()) {
        throw std::invalid_argument("label count does not match Q");
    }
    if (!(epsilon > 0.0)) {
        throw std::invalid_argument("epsilon must be positive");
    }
    const auto d = static_cast<double>(Q.rows());
    const auto m = static_cast<double>(Q.cols());

    const double sigma_min = std::min(smallest_nonzero_singular(Q),
                                      smallest_nonzero_singular(Qhat));
    Theorem1Threshold threshold;
    threshold.rank_branch = sigma_min / std::sqrt(std::min(m, d) * m * d);
    const double q_norm = spectral_norm(Q);
    const double pinv_norm = 1.0 / smallest_nonzero_singular(Q);
    threshold.loss_branch =
        epsilon / (6.0 * std::sqrt(m) * y.norm() * q_norm * pinv_norm * pinv_norm);
    threshold.value = std::min(threshold.rank_branch, threshold.loss_branch);
    return threshold;
}

double theorem2_threshold(Eigen::Index m, double epsilon) {
    if (m < 1) {
        throw std::invalid_argument("m must be at least 1");
    }
    if (!(epsilon > 0.0)) {
        throw std::invalid_argument("epsilon must be positive");
    }
    return epsilon / (2.0 * std::sqrt(static_cast<double>(m)));
}

bool rank_lemma_premise(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
    if (A.rows() != B.rows() || A.cols() != B.cols()) {
        throw std::invalid_argument("matrices must share a shape");
    }
    const auto rows = static_cast<double>(A.rows());
    const auto cols = static_cast<double>(A.cols());
    const double gap = (A - B).cwiseAbs().maxCoeff();
    const double sigma_min =
        std::min(smallest_nonzero_singular(A), smallest_nonzero_singular(B));
    return gap < sigma_min / std::sqrt(std::min(rows, cols) * rows * cols);
}

WedinGap wedin_gap(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
    if (A.rows() != B.rows() || A.cols() != B.cols()) {
        throw std::invalid_argument("matrices must share a shape");
    }
    if (numeric_rank(A) != numeric_rank(B)) {
        throw std::invalid_argument("pseudoinverse perturbation bound needs equal ranks");
    }
    WedinGap gap;
    const Eigen::MatrixXd a_pinv = pseudoinverse(A);
    const Eigen::MatrixXd b_pinv = pseudoinverse(B);
    gap.lhs = spectral_norm(b_pinv - a_pinv);
    gap.rhs = 2.0 * spectral_norm(a_pinv) * spectral_norm(b_pinv) * spectral_norm(B - A);
    return gap;
}

GapMode gap_mode_from_string(const std::string& name) {
    if (name == "unconstrained") return GapMode::kUnconstrained;
    if (name == "ball") return GapMode::kBall;
    if (name == "logistic-ball") return GapMode::kLogisticBall;
    throw std::invalid_argument("unknown gap mode: " + name);
}

std::string to_string(GapMode mode) {
    switch (mode) {
        case GapMode::kUnconstrained:
            return "unconstrained";
        case GapMode::kBall:
            return "ball";
        case GapMode::kLogisticBall:
            return "logistic-ball";
    }
    return "?";
}

PerturbationReport verify_loss_gap(const Eigen::MatrixXd& Q, const Eigen::MatrixXd& Qhat,
                                   const Eigen::VectorXd& y, GapMode mode, double epsilon) {
    if (Q.rows() != Qhat.rows() || Q.cols() != Qhat.cols()) {
        throw std::invalid_argument("Q and Qhat must share a shape");
    }
    if (Q.rows() != y.size()) {
        throw std::invalid_argument("label count does not match Q");
    }
    if (!(epsilon > 0.0)) {
        throw std::invalid_argument("epsilon must be positive");
    }

    PerturbationReport report;
    report.epsilon = epsilon;
    report.observed_max_norm = (Qhat - Q).cwiseAbs().maxCoeff();

    switch (mode) {
        case GapMode::kUnconstrained: {
            report.theorem = "1";
            report.max_norm_threshold = theorem1_threshold(Q, Qhat, y, epsilon).value;
            const RegressionModel reference = fit_least_squares(Q, y);
            const RegressionModel perturbed = fit_least_squares(Qhat, y);
            const double base = compute_loss(LossKind::kRmse, y, predict(reference, Q));
            const double moved = compute_loss(LossKind::kRmse, y, predict(perturbed, Q));
            report.delta_loss = moved - base;
            break;
        }
        case GapMode::kBall: {
            report.theorem = "2";
            report.max_norm_threshold = theorem2_threshold(Q.cols(), epsilon);
            const RegressionModel reference = fit_constrained(Q, y, Constraint::ball());
            const RegressionModel perturbed = fit_constrained(Qhat, y, Constraint::ball());
            const double base = compute_loss(LossKind::kRmse, y, predict(reference, Q));
            const double moved = compute_loss(LossKind::kRmse, y, predict(perturbed, Q));
            report.delta_loss = moved - base;
            break;
        }
        case GapMode::kLogisticBall: {
            report.theorem = "bce";
            report.max_norm_threshold = theorem2_threshold(Q.cols(), epsilon);
            const RegressionModel reference = fit_logistic(Q, y, Constraint::ball());
            const RegressionModel perturbed = fit_logistic(Qhat, y, Constraint::ball());
            const double base = compute_loss(LossKind::kBce, y, predict(reference, Q));
            const double moved = compute_loss(LossKind::kBce, y, predict(perturbed, Q));
            report.delta_loss = moved - base;
            break;
        }
    }
    report.satisfied =
        report.observed_max_norm > report.max_norm_threshold || report.delta_loss < epsilon;
    return report;
}

}  // namespace postvar
