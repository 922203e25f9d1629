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

#include <string>

namespace postvar {

/// Smallest nonzero singular value; values below 1e-10 * sigma_max count
/// as zero.  Throws for an (effectively) zero matrix.
double smallest_nonzero_singular(const Eigen::MatrixXd& matrix);

/// Rank with the same 1e-10 * sigma_max cutoff.
int numeric_rank(const Eigen::MatrixXd& matrix);

/// Largest singular value.
double spectral_norm(const Eigen::MatrixXd& matrix);

/// Moore-Penrose pseudoinverse with the 1e-10 * sigma_max cutoff.
Eigen::MatrixXd pseudoinverse(const Eigen::MatrixXd& matrix);

/// Max-norm perturbation budget under which the unconstrained
/// least-squares loss gap stays below epsilon: the minimum of the
/// rank-stability branch  min(s_min(Q), s_min(Qhat)) / sqrt(min(m,d) m d)
/// and the loss branch  epsilon / (6 sqrt(m) ||Y|| ||Q|| ||Q^+||^2).
struct Theorem1Threshold {
    double rank_branch = 0.0;
    double loss_branch = 0.0;
    double value = 0.0;  // min of the two
};

Theorem1Threshold theorem1_threshold(const Eigen::MatrixXd& Q,
                                     const Eigen::MatrixXd& Qhat,
                                     const Eigen::VectorXd& y, double epsilon);

/// Ball-constrained budget: epsilon / (2 sqrt(m)).  The same bound covers
/// the BCE head (the sigmoid log-losses are 1-Lipschitz in the logits).
double theorem2_threshold(Eigen::Index m, double epsilon);

/// True iff ||A - B||_max < min(s_min(A), s_min(B)) / sqrt(min(M,N) M N),
/// the premise under which ranks provably match.
bool rank_lemma_premise(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B);

/// Both sides of the pseudoinverse perturbation bound
/// ||B^+ - A^+|| <= 2 ||A^+|| ||B^+|| ||B - A|| (requires equal ranks).
struct WedinGap {
    double lhs = 0.0;
    double rhs = 0.0;
};

WedinGap wedin_gap(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B);

enum class GapMode { kUnconstrained, kBall, kLogisticBall };

GapMode gap_mode_from_string(const std::string& name);
std::string to_string(GapMode mode);

/// Outcome of one loss-gap trial.  `satisfied` is the guarantee direction:
/// whenever the observed max-norm sits below the threshold, the loss gap
/// must be below epsilon.
struct PerturbationReport {
    std::string theorem;  // "1", "2" or "bce"
    double max_norm_threshold = 0.0;
    double observed_max_norm = 0.0;
    double delta_loss = 0.0;
    double epsilon = 0.0;
    bool satisfied = false;
};

/// Fits the mode's head on Q and on Qhat, evaluates both parameter sets on
/// Q, and reports the loss gap against the matching threshold.
/// kUnconstrained uses the pseudoinverse head and RMSE (theorem "1");
/// kBall the unit-ball head and RMSE ("2"); kLogisticBall the unit-ball
/// logistic head and BCE ("bce", labels must be 0/1).
PerturbationReport verify_loss_gap(const Eigen::MatrixXd& Q, const Eigen::MatrixXd& Qhat,
                                   const Eigen::VectorXd& y, GapMode mode, double epsilon);

}  // namespace postvar
